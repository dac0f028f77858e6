#include "ecl/data/partition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ecl/rng.hpp"

namespace ecl::data {

void PartitionSpec::validate() const {
  if (num_clients < 1) throw std::invalid_argument("PartitionSpec: num_clients must be >= 1");
  if (!(alpha > 0.0)) throw std::invalid_argument("PartitionSpec: alpha must be > 0");
}

std::vector<long> largest_remainder(const std::vector<double>& weights, long total) {
  if (weights.empty()) throw std::invalid_argument("largest_remainder: empty weights");
  if (total < 0) throw std::invalid_argument("largest_remainder: negative total");
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("largest_remainder: weights must be finite and >= 0");
    }
    sum += w;
  }
  if (sum <= 0.0) throw std::invalid_argument("largest_remainder: weights sum to zero");

  std::vector<long> out(weights.size());
  std::vector<std::pair<double, std::size_t>> frac(weights.size());
  long assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double t = weights[i] / sum * static_cast<double>(total);
    out[i] = static_cast<long>(std::floor(t));
    assigned += out[i];
    frac[i] = {t - std::floor(t), i};
  }
  long leftover = total - assigned;
  std::sort(frac.begin(), frac.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (std::size_t i = 0; leftover > 0; ++i, --leftover) out[frac[i].second]++;
  return out;
}

std::vector<ClientDataset> dirichlet_partition(const LabeledDataset& ds, const PartitionSpec& spec) {
  spec.validate();
  ds.validate();
  const std::size_t k = static_cast<std::size_t>(spec.num_clients);

  std::vector<std::vector<std::size_t>> per_client(k);
  for (int c = 0; c < ds.num_classes; ++c) {
    const std::vector<std::size_t> idx = ds.indices_of_class(c);
    if (idx.empty()) continue;

    rng::Rng g(rng::derive_seed(spec.seed, "dirichlet", static_cast<std::uint64_t>(c)));
    std::vector<double> p(k);
    double sum = 0.0;
    for (double& v : p) {
      v = rng::gamma(g, spec.alpha);
      sum += v;
    }
    if (sum <= 0.0) p.assign(k, 1.0);  // underflow fallback; keeps the draw total
    const std::vector<long> share = largest_remainder(p, static_cast<long>(idx.size()));

    rng::Rng gs(rng::derive_seed(spec.seed, "dirichlet.shuffle", static_cast<std::uint64_t>(c)));
    std::vector<std::size_t> order = idx;
    rng::shuffle(order, gs);

    std::size_t at = 0;
    for (std::size_t i = 0; i < k; ++i) {
      for (long j = 0; j < share[i]; ++j) per_client[i].push_back(order[at++]);
    }
  }

  std::vector<ClientDataset> clients;
  clients.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    std::sort(per_client[i].begin(), per_client[i].end());
    LabeledDataset sub = ds.subset(per_client[i]);
    sub.num_classes = ds.num_classes;
    clients.push_back(ClientDataset::make(static_cast<int>(i), std::move(sub)));
  }
  return clients;
}

}  // namespace ecl::data
