#include "ecl/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ecl::eval {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double nan_mean(const std::vector<double>& values) {
  double sum = 0.0;
  std::size_t n = 0;
  for (double v : values) {
    if (!std::isnan(v)) {
      sum += v;
      ++n;
    }
  }
  return n == 0 ? kNaN : sum / static_cast<double>(n);
}

}  // namespace

std::vector<int> class_thirds(const std::vector<long>& counts) {
  const std::size_t c = counts.size();
  std::vector<int> order(c);
  for (std::size_t i = 0; i < c; ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (counts[a] != counts[b]) return counts[a] > counts[b];
    return a < b;
  });
  const std::size_t base = c / 3;
  const std::size_t rem = c % 3;
  const std::size_t head_n = base + (rem > 0 ? 1 : 0);
  const std::size_t mid_n = base + (rem > 1 ? 1 : 0);
  std::vector<int> third(c, 2);
  for (std::size_t i = 0; i < c; ++i) {
    if (i < head_n) {
      third[order[i]] = 0;
    } else if (i < head_n + mid_n) {
      third[order[i]] = 1;
    }
  }
  return third;
}

MetricsRecord evaluate(const PredictFn& predict, const data::LabeledDataset& testset) {
  if (testset.empty()) throw std::invalid_argument("evaluate: empty test set");
  const int c = testset.num_classes;
  std::vector<long> total(c, 0);
  std::vector<long> correct(c, 0);
  for (std::size_t i = 0; i < testset.size(); ++i) {
    const int y = testset.ys[i];
    const int pred = predict(std::span<const double>(testset.xs.row(i), testset.input_dim()));
    total[y]++;
    if (pred == y) correct[y]++;
  }

  MetricsRecord r;
  r.per_class.resize(c, kNaN);
  long correct_all = 0;
  for (int k = 0; k < c; ++k) {
    correct_all += correct[k];
    if (total[k] > 0) {
      r.per_class[k] = static_cast<double>(correct[k]) / static_cast<double>(total[k]);
    }
  }
  r.overall = static_cast<double>(correct_all) / static_cast<double>(testset.size());

  const std::vector<int> third = class_thirds(total);
  std::vector<double> groups[3];
  for (int k = 0; k < c; ++k) {
    if (total[k] > 0) groups[third[k]].push_back(r.per_class[k]);
  }
  r.head = nan_mean(groups[0]);
  r.mid = nan_mean(groups[1]);
  r.tail = nan_mean(groups[2]);
  return r;
}

MetricsRecord mean_record(const std::vector<MetricsRecord>& client_records) {
  if (client_records.empty()) throw std::invalid_argument("mean_record: no records");
  MetricsRecord mean;
  mean.method = client_records.front().method;
  mean.seed = client_records.front().seed;
  mean.client = -1;

  std::vector<double> overall, head, mid, tail;
  for (const MetricsRecord& r : client_records) {
    overall.push_back(r.overall);
    head.push_back(r.head);
    mid.push_back(r.mid);
    tail.push_back(r.tail);
  }
  mean.overall = nan_mean(overall);
  mean.head = nan_mean(head);
  mean.mid = nan_mean(mid);
  mean.tail = nan_mean(tail);

  const std::size_t c = client_records.front().per_class.size();
  mean.per_class.resize(c, kNaN);
  for (std::size_t k = 0; k < c; ++k) {
    std::vector<double> col;
    for (const MetricsRecord& r : client_records) col.push_back(r.per_class.at(k));
    mean.per_class[k] = nan_mean(col);
  }
  return mean;
}

}  // namespace ecl::eval
