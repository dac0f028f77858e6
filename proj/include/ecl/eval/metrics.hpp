#pragma once
// Accuracy metrics with per-class and head/mid/tail breakdowns.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ecl/data/dataset.hpp"

namespace ecl::eval {

struct MetricsRecord {
  std::string method;
  std::uint64_t seed = 0;
  int client = -1;  // -1 renders as "mean"
  double overall = 0.0;
  double head = 0.0;
  double mid = 0.0;
  double tail = 0.0;
  // NaN for classes with no test samples.
  std::vector<double> per_class;
};

using PredictFn = std::function<int(std::span<const double>)>;

// Head/mid/tail membership (0/1/2) per class: classes sorted by count desc
// (ties by ascending id) and cut into thirds, remainders assigned headward.
std::vector<int> class_thirds(const std::vector<long>& counts);

// Exact counting of correct predictions, overall and per class. Group
// accuracies average only classes with test samples.
MetricsRecord evaluate(const PredictFn& predict, const data::LabeledDataset& testset);

// Client-macro average: NaN-aware mean of each field across records.
MetricsRecord mean_record(const std::vector<MetricsRecord>& client_records);

}  // namespace ecl::eval
