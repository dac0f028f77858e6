#include "ecl/data/balance.hpp"

#include <algorithm>
#include <stdexcept>

#include "ecl/data/partition.hpp"
#include "ecl/rng.hpp"

namespace ecl::data {

LabeledDataset restrict_to_classes(const LabeledDataset& ds, const std::vector<int>& classes) {
  std::vector<bool> wanted(ds.num_classes, false);
  for (int c : classes) wanted.at(c) = true;
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (wanted[ds.ys[i]]) keep.push_back(i);
  }
  return ds.subset(keep);
}

LabeledDataset balance_subset(const LabeledDataset& ds, const std::vector<int>& classes,
                              std::uint64_t seed) {
  if (classes.empty()) throw std::invalid_argument("balance_subset: empty class set");
  std::vector<int> sorted = classes;
  std::sort(sorted.begin(), sorted.end());

  std::vector<std::vector<std::size_t>> per_class;
  std::size_t max_count = 0;
  for (int c : sorted) {
    std::vector<std::size_t> idx = ds.indices_of_class(c);
    if (idx.empty()) {
      throw std::invalid_argument("balance_subset: class " + std::to_string(c) + " has no samples");
    }
    max_count = std::max(max_count, idx.size());
    per_class.push_back(std::move(idx));
  }

  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const std::vector<std::size_t>& idx = per_class[i];
    keep.insert(keep.end(), idx.begin(), idx.end());
    rng::Rng g(rng::derive_seed(seed, "balance", static_cast<std::uint64_t>(sorted[i])));
    for (std::size_t extra = idx.size(); extra < max_count; ++extra) {
      keep.push_back(idx[rng::bounded(g, idx.size())]);
    }
  }
  return ds.subset(keep);
}

LabeledDataset build_client_testset(const LabeledDataset& pool,
                                    const std::vector<long>& client_counts, long test_size,
                                    std::uint64_t seed) {
  if (client_counts.size() != static_cast<std::size_t>(pool.num_classes)) {
    throw std::invalid_argument("build_client_testset: count table width mismatch");
  }
  if (test_size < 1) throw std::invalid_argument("build_client_testset: test_size must be >= 1");
  long total = 0;
  for (long n : client_counts) {
    if (n < 0) throw std::invalid_argument("build_client_testset: negative count");
    total += n;
  }
  if (total == 0) throw std::invalid_argument("build_client_testset: client has no samples");

  std::vector<double> weights(client_counts.begin(), client_counts.end());
  const std::vector<long> target = largest_remainder(weights, test_size);

  std::vector<std::size_t> keep;
  for (int c = 0; c < pool.num_classes; ++c) {
    if (target[c] == 0) continue;
    const std::vector<std::size_t> idx = pool.indices_of_class(c);
    if (static_cast<long>(idx.size()) < target[c]) {
      throw std::runtime_error("build_client_testset: pool exhausted for class " + std::to_string(c));
    }
    rng::Rng g(rng::derive_seed(seed, "testset", static_cast<std::uint64_t>(c)));
    std::vector<std::size_t> chosen =
        rng::sample_without_replacement(idx.size(), static_cast<std::size_t>(target[c]), g);
    std::sort(chosen.begin(), chosen.end());
    for (std::size_t j : chosen) keep.push_back(idx[j]);
  }
  return pool.subset(keep);
}

}  // namespace ecl::data
