#pragma once
// Phase II: per-client classifier retraining of the global model, expert
// initialization and training, and joint prediction.

#include <cstdint>
#include <span>
#include <vector>

#include "ecl/data/balance.hpp"
#include "ecl/data/dataset.hpp"
#include "ecl/data/grouping.hpp"
#include "ecl/expert/inference.hpp"
#include "ecl/nn/model.hpp"
#include "ecl/nn/sgd.hpp"

namespace ecl::expert {

struct Phase2Config {
  int num_experts = 2;
  double lambda = 0.5;
  ScalingScheme scheme = ScalingScheme::ecl_scaling;
  NormMode norm_mode = NormMode::per_class_row;
  int retrain_epochs = 30;
  int expert_epochs = 30;
  double lr = 0.01;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  std::size_t batch_size = 64;
  bool reinit_expert_classifier = false;
  std::uint64_t seed = 0;

  void validate() const;
  nn::SgdHyper hyper() const { return {lr, momentum, weight_decay}; }
};

struct PersonalizedState {
  int client_id = -1;
  nn::ModelParams retrained_global;
  // One model per expert, index-aligned with assignment.groups. Empty for
  // clients that hold no data (global-only state).
  std::vector<nn::ModelParams> experts;
  data::ExpertAssignment assignment;
  double lambda = 0.5;
  ScalingScheme scheme = ScalingScheme::ecl_scaling;
  NormMode norm_mode = NormMode::per_class_row;
};

// Backbone frozen, classifier trained with the balanced-softmax loss over the
// client's full data using its per-class counts.
nn::ModelParams retrain_global_classifier(const nn::ModelParams& global,
                                          const data::ClientDataset& client, int epochs,
                                          const nn::SgdHyper& hyper, std::size_t batch_size,
                                          std::uint64_t shuffle_seed);

// Deep copies of the global model (backbone and classifier), all unfrozen.
std::vector<nn::ModelParams> init_experts(const nn::ModelParams& global, int num_experts);

// Experts before the last train the last backbone block plus the classifier
// on their raw class subset; the last expert trains the classifier only on a
// class-balanced subset. Empty groups are left untouched.
void train_expert(nn::ModelParams& expert, int expert_index, int num_experts,
                  const data::ClientDataset& client, const std::vector<int>& group,
                  const Phase2Config& config, std::uint64_t shuffle_seed,
                  std::uint64_t balance_seed);

PersonalizedState personalize_client(const nn::ModelParams& global,
                                     const data::ClientDataset& client,
                                     const Phase2Config& config);

std::vector<PersonalizedState> run_phase2(const nn::ModelParams& global,
                                          const std::vector<data::ClientDataset>& clients,
                                          const Phase2Config& config);

// Joint forward pass: expert logits are norm-scaled per the state's scheme
// and combined with the retrained global logits.
AggregatedLogits aggregate_for_input(const PersonalizedState& state, std::span<const double> x);
int predict(const PersonalizedState& state, std::span<const double> x,
            AggregatedLogits* aggregated = nullptr);

}  // namespace ecl::expert
