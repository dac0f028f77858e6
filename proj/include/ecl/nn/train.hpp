#pragma once
// Mini-batch SGD training loop with deterministic per-epoch shuffling.

#include <cstdint>
#include <vector>

#include "ecl/nn/loss.hpp"
#include "ecl/nn/model.hpp"
#include "ecl/nn/sgd.hpp"

namespace ecl::nn {

// Runs `epochs` epochs over (xs, ys). class_counts is consulted only for the
// balanced-softmax loss and must then cover all classes. The freeze mask on
// `model` is respected; `opt` must have been created against that mask.
// Returns the mean per-sample loss of the final epoch (NaN when epochs == 0).
double train_epochs(ModelParams& model, const Mat& xs, const std::vector<int>& ys,
                    const std::vector<long>& class_counts, int epochs, LossKind kind,
                    std::size_t batch_size, OptState& opt, std::uint64_t shuffle_seed);

}  // namespace ecl::nn
