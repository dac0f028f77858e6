#include "ecl/nn/model.hpp"

#include <cmath>
#include <stdexcept>

#include "ecl/rng.hpp"

namespace ecl::nn {

void ArchSpec::validate() const {
  if (input_dim == 0) throw std::invalid_argument("ArchSpec: input_dim must be >= 1");
  if (block_widths.empty()) throw std::invalid_argument("ArchSpec: block_widths must be non-empty");
  for (std::size_t w : block_widths) {
    if (w == 0) throw std::invalid_argument("ArchSpec: block widths must be >= 1");
  }
  if (num_classes == 0) throw std::invalid_argument("ArchSpec: num_classes must be >= 1");
}

void ModelParams::unfreeze_all() {
  freeze.assign(num_groups(), false);
}

void ModelParams::set_trainable_groups(const std::vector<std::size_t>& groups) {
  freeze.assign(num_groups(), true);
  for (std::size_t g : groups) freeze.at(g) = false;
}

void ModelParams::freeze_backbone() {
  set_trainable_groups({classifier_group()});
}

void ModelParams::freeze_all_but_last_block() {
  set_trainable_groups({blocks.size() - 1, classifier_group()});
}

bool ModelParams::params_equal(const ModelParams& other) const {
  return spec == other.spec && blocks == other.blocks && classifier == other.classifier;
}

namespace {

// Round through float: checkpoints store 32-bit values.
double f32(double x) {
  return static_cast<double>(static_cast<float>(x));
}

LayerParams init_layer(std::size_t out, std::size_t in, std::uint64_t seed) {
  const double a = std::sqrt(6.0 / static_cast<double>(in + out));
  rng::Rng g(seed);
  LayerParams layer;
  layer.w = Mat(out, in);
  for (double& v : layer.w.a) v = f32(rng::uniform(g, -a, a));
  layer.b.resize(out);
  for (double& v : layer.b) v = f32(rng::uniform(g, -a, a));
  return layer;
}

}  // namespace

ModelParams init_model(const ArchSpec& spec) {
  spec.validate();
  ModelParams m;
  m.spec = spec;
  std::size_t in = spec.input_dim;
  for (std::size_t l = 0; l < spec.block_widths.size(); ++l) {
    const std::size_t out = spec.block_widths[l];
    m.blocks.push_back(init_layer(out, in, rng::derive_seed(spec.init_seed, "init.block", l)));
    in = out;
  }
  m.classifier = init_layer(spec.num_classes, in, rng::derive_seed(spec.init_seed, "init.classifier"));
  m.freeze.assign(m.num_groups(), false);
  return m;
}

Mat forward(const ModelParams& model, const Mat& inputs, ForwardCache* cache) {
  if (inputs.cols != model.spec.input_dim) {
    throw std::invalid_argument("forward: input width does not match spec");
  }
  if (cache) {
    cache->activations.clear();
    cache->activations.push_back(inputs);
  }
  Mat h = inputs;
  for (const LayerParams& block : model.blocks) {
    Mat z;
    affine_forward(h, block.w, block.b, z);
    for (double& v : z.a) v = v > 0.0 ? v : 0.0;
    h = std::move(z);
    if (cache) cache->activations.push_back(h);
  }
  Mat logits;
  affine_forward(h, model.classifier.w, model.classifier.b, logits);
  return logits;
}

Gradients backward(const ModelParams& model, const ForwardCache& cache, const Mat& dlogits) {
  const std::size_t num_blocks = model.blocks.size();
  if (cache.activations.size() != num_blocks + 1) {
    throw std::invalid_argument("backward: cache does not match model depth");
  }
  Gradients grads;
  grads.blocks.resize(num_blocks);

  // Deepest unfrozen block; backprop does not need to descend past it.
  std::size_t lowest_unfrozen = num_blocks;  // one-past when all blocks frozen
  for (std::size_t l = 0; l < num_blocks; ++l) {
    if (!model.frozen(l)) {
      lowest_unfrozen = l;
      break;
    }
  }

  const Mat& features = cache.activations.back();
  Mat dh;
  if (!model.frozen(model.classifier_group())) {
    LayerParams g;
    matmul_at_b(dlogits, features, g.w);
    g.b = column_sums(dlogits);
    grads.classifier = std::move(g);
  }
  if (lowest_unfrozen == num_blocks) return grads;
  matmul_a_b(dlogits, model.classifier.w, dh);

  for (std::size_t l = num_blocks; l-- > lowest_unfrozen;) {
    const Mat& h_out = cache.activations[l + 1];
    // ReLU mask from the stored post-activation.
    Mat dz = dh;
    for (std::size_t i = 0; i < dz.size(); ++i) {
      if (h_out.a[i] <= 0.0) dz.a[i] = 0.0;
    }
    if (!model.frozen(l)) {
      LayerParams g;
      matmul_at_b(dz, cache.activations[l], g.w);
      g.b = column_sums(dz);
      grads.blocks[l] = std::move(g);
    }
    if (l > lowest_unfrozen) {
      matmul_a_b(dz, model.blocks[l].w, dh);
    }
  }
  return grads;
}

}  // namespace ecl::nn
