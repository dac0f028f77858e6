#include "ecl/expert/personalize.hpp"

#include <stdexcept>

#include "ecl/nn/train.hpp"
#include "ecl/rng.hpp"

namespace ecl::expert {

void Phase2Config::validate() const {
  if (num_experts < 1) throw std::invalid_argument("Phase2Config: num_experts must be >= 1");
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw std::invalid_argument("Phase2Config: lambda must be in [0, 1]");
  }
  if (retrain_epochs < 0 || expert_epochs < 0) {
    throw std::invalid_argument("Phase2Config: epoch counts must be >= 0");
  }
  if (batch_size == 0) throw std::invalid_argument("Phase2Config: batch_size must be >= 1");
  hyper().validate();
}

nn::ModelParams retrain_global_classifier(const nn::ModelParams& global,
                                          const data::ClientDataset& client, int epochs,
                                          const nn::SgdHyper& hyper, std::size_t batch_size,
                                          std::uint64_t shuffle_seed) {
  if (client.empty()) throw std::invalid_argument("retrain_global_classifier: empty client dataset");
  nn::ModelParams model = global;
  model.freeze_backbone();
  nn::OptState opt = nn::OptState::create(model, hyper);
  nn::train_epochs(model, client.data.xs, client.data.ys, client.counts, epochs,
                   nn::LossKind::balanced_softmax, batch_size, opt, shuffle_seed);
  return model;
}

std::vector<nn::ModelParams> init_experts(const nn::ModelParams& global, int num_experts) {
  if (num_experts < 1) throw std::invalid_argument("init_experts: num_experts must be >= 1");
  std::vector<nn::ModelParams> experts(static_cast<std::size_t>(num_experts), global);
  for (nn::ModelParams& e : experts) e.unfreeze_all();
  return experts;
}

void train_expert(nn::ModelParams& expert, int expert_index, int num_experts,
                  const data::ClientDataset& client, const std::vector<int>& group,
                  const Phase2Config& config, std::uint64_t shuffle_seed,
                  std::uint64_t balance_seed) {
  if (group.empty()) return;
  const bool is_last = expert_index == num_experts - 1;

  if (config.reinit_expert_classifier) {
    nn::ArchSpec spec = expert.spec;
    spec.init_seed = rng::derive_seed(balance_seed, "expert.reinit");
    expert.classifier = nn::init_model(spec).classifier;
  }

  data::LabeledDataset subset = is_last ? data::balance_subset(client.data, group, balance_seed)
                                        : data::restrict_to_classes(client.data, group);
  if (is_last) {
    expert.freeze_backbone();
  } else {
    expert.freeze_all_but_last_block();
  }
  nn::OptState opt = nn::OptState::create(expert, config.hyper());
  nn::train_epochs(expert, subset.xs, subset.ys, subset.class_counts(), config.expert_epochs,
                   nn::LossKind::cross_entropy, config.batch_size, opt, shuffle_seed);
}

PersonalizedState personalize_client(const nn::ModelParams& global,
                                     const data::ClientDataset& client,
                                     const Phase2Config& config) {
  config.validate();
  PersonalizedState state;
  state.client_id = client.client_id;
  state.lambda = config.lambda;
  state.scheme = config.scheme;
  state.norm_mode = config.norm_mode;
  state.assignment.owners.assign(global.spec.num_classes, -1);

  if (client.empty()) {
    state.retrained_global = global;
    state.retrained_global.unfreeze_all();
    return state;
  }

  const std::uint64_t cid = static_cast<std::uint64_t>(client.client_id);
  state.assignment = data::sort_and_group(client.counts, config.num_experts);
  state.experts = init_experts(global, config.num_experts);
  state.retrained_global = retrain_global_classifier(
      global, client, config.retrain_epochs, config.hyper(), config.batch_size,
      rng::derive_seed(config.seed, "phase2.retrain", cid));
  for (int m = 0; m < config.num_experts; ++m) {
    train_expert(state.experts[static_cast<std::size_t>(m)], m, config.num_experts, client,
                 state.assignment.groups[static_cast<std::size_t>(m)], config,
                 rng::derive_seed(config.seed, "phase2.expert", cid, static_cast<std::uint64_t>(m)),
                 rng::derive_seed(config.seed, "phase2.balance", cid, static_cast<std::uint64_t>(m)));
  }
  return state;
}

std::vector<PersonalizedState> run_phase2(const nn::ModelParams& global,
                                          const std::vector<data::ClientDataset>& clients,
                                          const Phase2Config& config) {
  std::vector<PersonalizedState> states;
  states.reserve(clients.size());
  for (const data::ClientDataset& client : clients) {
    states.push_back(personalize_client(global, client, config));
  }
  return states;
}

AggregatedLogits aggregate_for_input(const PersonalizedState& state, std::span<const double> x) {
  const std::size_t num_classes = state.retrained_global.spec.num_classes;
  nn::Mat input(1, x.size());
  for (std::size_t j = 0; j < x.size(); ++j) input(0, j) = x[j];

  const nn::Mat z0_mat = nn::forward(state.retrained_global, input);
  std::vector<double> z0(z0_mat.a);

  std::vector<double> zbar(num_classes, 0.0);
  if (!state.experts.empty()) {
    const std::vector<double> global_row_sq = classifier_row_sq_norms(state.retrained_global);
    const double global_mat_sq = classifier_matrix_sq_norm(state.retrained_global);
    for (std::size_t m = 0; m < state.experts.size(); ++m) {
      const std::vector<int>& group = state.assignment.groups[m];
      if (group.empty()) continue;
      const nn::ModelParams& ex = state.experts[m];
      const nn::Mat z_mat = nn::forward(ex, input);
      if (state.scheme == ScalingScheme::no_scaling) {
        for (int c : group) zbar[static_cast<std::size_t>(c)] = z_mat.a[static_cast<std::size_t>(c)];
      } else if (state.norm_mode == NormMode::per_class_row) {
        const std::vector<double> ex_row_sq = classifier_row_sq_norms(ex);
        for (int c : group) {
          const auto cc = static_cast<std::size_t>(c);
          zbar[cc] = scale_logit(z_mat.a[cc], ex_row_sq[cc], global_row_sq[cc]);
        }
      } else {
        const double ex_mat_sq = classifier_matrix_sq_norm(ex);
        for (int c : group) {
          const auto cc = static_cast<std::size_t>(c);
          zbar[cc] = scale_logit(z_mat.a[cc], ex_mat_sq, global_mat_sq);
        }
      }
    }
  }
  return aggregate_logits(zbar, z0, state.lambda, state.assignment);
}

int predict(const PersonalizedState& state, std::span<const double> x,
            AggregatedLogits* aggregated) {
  AggregatedLogits agg = aggregate_for_input(state, x);
  const int label = argmax_class(agg.logits);
  if (aggregated) *aggregated = std::move(agg);
  return label;
}

}  // namespace ecl::expert
