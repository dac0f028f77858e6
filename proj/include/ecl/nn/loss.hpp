#pragma once
// Classification losses. Both return the mean batch loss together with the
// gradient w.r.t. the logits, stabilized by max-subtraction.

#include <vector>

#include "ecl/nn/tensor.hpp"

namespace ecl::nn {

enum class LossKind { cross_entropy, balanced_softmax };

struct LossResult {
  double loss = 0.0;
  Mat dlogits;
};

// Row-wise softmax, stabilized.
Mat softmax_rows(const Mat& logits);

LossResult ce_loss(const Mat& logits, const std::vector<int>& labels);

// Balanced softmax: the normalizer weights each class term by its sample
// count and spans only classes with a positive count. Every label in the
// batch must have a positive count.
LossResult bsce_loss(const Mat& logits, const std::vector<int>& labels,
                     const std::vector<long>& class_counts);

}  // namespace ecl::nn
