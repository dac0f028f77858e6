#pragma once
// SGD with momentum and weight decay. Momentum buffers exist only for the
// groups that were unfrozen when the state was created.

#include <optional>
#include <vector>

#include "ecl/nn/model.hpp"

namespace ecl::nn {

struct SgdHyper {
  double lr = 0.01;
  double momentum = 0.0;
  double weight_decay = 0.0;

  void validate() const;
};

struct OptState {
  SgdHyper hyper;
  std::vector<std::optional<LayerParams>> block_buf;
  std::optional<LayerParams> classifier_buf;

  // Zero buffers matching the model's unfrozen groups.
  static OptState create(const ModelParams& model, const SgdHyper& hyper);
};

// buf <- momentum*buf + grad + weight_decay*param; param <- param - lr*buf.
// Gradients must cover exactly the unfrozen groups.
void sgd_step(ModelParams& model, const Gradients& grads, OptState& opt);

}  // namespace ecl::nn
