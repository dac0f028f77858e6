#pragma once
// Class-balanced resampling and per-client test-set construction.

#include <cstdint>

#include "ecl/data/dataset.hpp"

namespace ecl::data {

// Restriction to a class subset, original sample order preserved.
LabeledDataset restrict_to_classes(const LabeledDataset& ds, const std::vector<int>& classes);

// Restricts to `classes` and oversamples every class with replacement up to
// the largest per-class count within the subset. Each listed class must have
// at least one sample.
LabeledDataset balance_subset(const LabeledDataset& ds, const std::vector<int>& classes,
                              std::uint64_t seed);

// Draws a test set from `pool` (without replacement) whose label histogram is
// the largest-remainder match of the client's training proportions.
LabeledDataset build_client_testset(const LabeledDataset& pool,
                                    const std::vector<long>& client_counts, long test_size,
                                    std::uint64_t seed);

}  // namespace ecl::data
