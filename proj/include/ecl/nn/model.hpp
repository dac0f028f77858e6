#pragma once
// Feed-forward model: a chain of affine+ReLU blocks (the backbone) topped by
// a linear classifier. Parameter groups (one per block, one for the
// classifier) carry a freeze flag honored by every training entry point.

#include <cstdint>
#include <optional>
#include <vector>

#include "ecl/nn/tensor.hpp"

namespace ecl::nn {

struct ArchSpec {
  std::size_t input_dim = 0;
  std::vector<std::size_t> block_widths;
  std::size_t num_classes = 0;
  std::uint64_t init_seed = 0;

  void validate() const;
  std::size_t feature_dim() const { return block_widths.back(); }
  bool operator==(const ArchSpec&) const = default;
};

struct LayerParams {
  Mat w;                  // out x in
  std::vector<double> b;  // out

  bool operator==(const LayerParams&) const = default;
};

struct ModelParams {
  ArchSpec spec;
  std::vector<LayerParams> blocks;
  LayerParams classifier;
  // One flag per parameter group: blocks in order, classifier last.
  std::vector<bool> freeze;

  std::size_t num_groups() const { return blocks.size() + 1; }
  std::size_t classifier_group() const { return blocks.size(); }
  bool frozen(std::size_t group) const { return freeze.at(group); }

  void unfreeze_all();
  // Freezes everything, then unfreezes the listed groups.
  void set_trainable_groups(const std::vector<std::size_t>& groups);
  void freeze_backbone();               // classifier-only training
  void freeze_all_but_last_block();     // last block + classifier training

  bool params_equal(const ModelParams& other) const;  // exact, ignores freeze
};

// Per-layer uniform init in [-a, a] with a = sqrt(6 / (fan_in + fan_out)),
// streams derived from init_seed. Values are rounded through float so that
// fresh models survive the 32-bit checkpoint format bit-exactly.
ModelParams init_model(const ArchSpec& spec);

struct ForwardCache {
  // activations[0] is the input batch; activations[l+1] the ReLU output of
  // block l. The last entry feeds the classifier.
  std::vector<Mat> activations;
};

Mat forward(const ModelParams& model, const Mat& inputs, ForwardCache* cache = nullptr);

// Gradient groups mirror ModelParams; an entry is present iff its group is
// unfrozen.
struct Gradients {
  std::vector<std::optional<LayerParams>> blocks;
  std::optional<LayerParams> classifier;
};

Gradients backward(const ModelParams& model, const ForwardCache& cache, const Mat& dlogits);

}  // namespace ecl::nn
