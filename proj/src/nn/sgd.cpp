#include "ecl/nn/sgd.hpp"

#include <cmath>
#include <stdexcept>

namespace ecl::nn {

void SgdHyper::validate() const {
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw std::invalid_argument("SgdHyper: lr must be finite and >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw std::invalid_argument("SgdHyper: momentum must be in [0, 1)");
  if (!(weight_decay >= 0.0)) throw std::invalid_argument("SgdHyper: weight_decay must be >= 0");
}

OptState OptState::create(const ModelParams& model, const SgdHyper& hyper) {
  hyper.validate();
  OptState s;
  s.hyper = hyper;
  s.block_buf.resize(model.blocks.size());
  for (std::size_t l = 0; l < model.blocks.size(); ++l) {
    if (!model.frozen(l)) {
      LayerParams buf;
      buf.w = Mat(model.blocks[l].w.rows, model.blocks[l].w.cols);
      buf.b.assign(model.blocks[l].b.size(), 0.0);
      s.block_buf[l] = std::move(buf);
    }
  }
  if (!model.frozen(model.classifier_group())) {
    LayerParams buf;
    buf.w = Mat(model.classifier.w.rows, model.classifier.w.cols);
    buf.b.assign(model.classifier.b.size(), 0.0);
    s.classifier_buf = std::move(buf);
  }
  return s;
}

namespace {

void step_group(LayerParams& param, const LayerParams& grad, LayerParams& buf, const SgdHyper& h) {
  if (grad.w.rows != param.w.rows || grad.w.cols != param.w.cols || grad.b.size() != param.b.size()) {
    throw std::invalid_argument("sgd_step: gradient shape mismatch");
  }
  for (std::size_t i = 0; i < param.w.size(); ++i) {
    buf.w.a[i] = h.momentum * buf.w.a[i] + grad.w.a[i] + h.weight_decay * param.w.a[i];
    param.w.a[i] -= h.lr * buf.w.a[i];
  }
  for (std::size_t i = 0; i < param.b.size(); ++i) {
    buf.b[i] = h.momentum * buf.b[i] + grad.b[i] + h.weight_decay * param.b[i];
    param.b[i] -= h.lr * buf.b[i];
  }
}

}  // namespace

void sgd_step(ModelParams& model, const Gradients& grads, OptState& opt) {
  if (grads.blocks.size() != model.blocks.size()) {
    throw std::invalid_argument("sgd_step: gradient group count mismatch");
  }
  for (std::size_t l = 0; l < model.blocks.size(); ++l) {
    const bool frozen = model.frozen(l);
    if (grads.blocks[l].has_value() == frozen) {
      throw std::invalid_argument(frozen ? "sgd_step: gradient supplied for frozen block"
                                         : "sgd_step: gradient missing for unfrozen block");
    }
    if (frozen) continue;
    if (!opt.block_buf[l]) throw std::invalid_argument("sgd_step: opt state missing block buffer");
    step_group(model.blocks[l], *grads.blocks[l], *opt.block_buf[l], opt.hyper);
  }
  const bool cls_frozen = model.frozen(model.classifier_group());
  if (grads.classifier.has_value() == cls_frozen) {
    throw std::invalid_argument(cls_frozen ? "sgd_step: gradient supplied for frozen classifier"
                                           : "sgd_step: gradient missing for unfrozen classifier");
  }
  if (!cls_frozen) {
    if (!opt.classifier_buf) throw std::invalid_argument("sgd_step: opt state missing classifier buffer");
    step_group(model.classifier, *grads.classifier, *opt.classifier_buf, opt.hyper);
  }
}

}  // namespace ecl::nn
