#pragma once
// Synthetic Gaussian-blob classification data.

#include <cstdint>

#include "ecl/data/dataset.hpp"

namespace ecl::data {

// Each class draws per_class_count samples from an isotropic Gaussian around
// a deterministic unit-norm mean; both the means and the noise are derived
// from `seed` per class, so the class geometry is stable across different
// sample counts.
LabeledDataset synth_generate(int num_classes, std::size_t input_dim, long per_class_count,
                              double spread, std::uint64_t seed);

// Per-class mean used by synth_generate, exposed for oracle-style checks.
std::vector<double> synth_class_mean(int cls, std::size_t input_dim, std::uint64_t seed);

// Splits a dataset per class: the first train_per_class samples of each class
// go to the first output, the next test_per_class to the second.
std::pair<LabeledDataset, LabeledDataset> split_per_class(const LabeledDataset& ds,
                                                          long train_per_class,
                                                          long test_per_class);

}  // namespace ecl::data
