#pragma once
// Long-tail shaping by imbalance factor.

#include <cstdint>

#include "ecl/data/dataset.hpp"

namespace ecl::data {

// Class c keeps round(n0 * IF^(-c / (C-1))) samples, where n0 is the largest
// original per-class count; the survivors are subsampled uniformly without
// replacement. Counts are nonincreasing in the class index.
LabeledDataset shape_longtail(const LabeledDataset& ds, double imbalance_factor, std::uint64_t seed);

// The per-class target counts the shaping applies; exposed for checks.
std::vector<long> longtail_profile(long n0, int num_classes, double imbalance_factor);

}  // namespace ecl::data
