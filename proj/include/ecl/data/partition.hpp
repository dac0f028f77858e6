#pragma once
// Dirichlet non-IID partitioning across clients.

#include <cstdint>

#include "ecl/data/dataset.hpp"

namespace ecl::data {

struct PartitionSpec {
  int num_clients = 1;
  double alpha = 0.2;
  std::uint64_t seed = 0;

  void validate() const;
};

// Integerizes fractional targets weights[i] * total (weights need not be
// normalized): floors first, then hands the remainder to the largest
// fractional parts, ties to the lowest index.
std::vector<long> largest_remainder(const std::vector<double>& weights, long total);

// For each class independently draws client proportions from
// Dirichlet(alpha * 1_K) and deals that class's samples out by
// largest-remainder rounding. Every sample lands on exactly one client;
// empty clients are possible and legal.
std::vector<ClientDataset> dirichlet_partition(const LabeledDataset& ds, const PartitionSpec& spec);

}  // namespace ecl::data
