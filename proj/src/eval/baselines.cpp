#include "ecl/eval/baselines.hpp"

#include <stdexcept>

#include "ecl/expert/inference.hpp"
#include "ecl/nn/train.hpp"
#include "ecl/rng.hpp"

namespace ecl::eval {

void BaselineConfig::validate() const {
  if (local_epochs < 0 || ft_epochs < 0) {
    throw std::invalid_argument("BaselineConfig: epoch counts must be >= 0");
  }
  if (batch_size == 0) throw std::invalid_argument("BaselineConfig: batch_size must be >= 1");
  nn::SgdHyper{local_lr, momentum, weight_decay}.validate();
  nn::SgdHyper{ft_lr, momentum, weight_decay}.validate();
}

std::vector<std::optional<nn::ModelParams>> train_local_models(
    const std::vector<data::ClientDataset>& clients, const nn::ArchSpec& arch,
    const BaselineConfig& config) {
  config.validate();
  std::vector<std::optional<nn::ModelParams>> models(clients.size());
  for (std::size_t k = 0; k < clients.size(); ++k) {
    const data::ClientDataset& client = clients[k];
    if (client.empty()) continue;
    const std::uint64_t cid = static_cast<std::uint64_t>(client.client_id);
    nn::ArchSpec spec = arch;
    spec.init_seed = rng::derive_seed(config.seed, "baseline.local.init", cid);
    nn::ModelParams model = nn::init_model(spec);
    nn::OptState opt =
        nn::OptState::create(model, {config.local_lr, config.momentum, config.weight_decay});
    nn::train_epochs(model, client.data.xs, client.data.ys, client.counts, config.local_epochs,
                     nn::LossKind::cross_entropy, config.batch_size, opt,
                     rng::derive_seed(config.seed, "baseline.local.shuffle", cid));
    models[k] = std::move(model);
  }
  return models;
}

std::vector<std::optional<nn::ModelParams>> finetune_global_models(
    const nn::ModelParams& global, const std::vector<data::ClientDataset>& clients,
    const BaselineConfig& config) {
  config.validate();
  std::vector<std::optional<nn::ModelParams>> models(clients.size());
  for (std::size_t k = 0; k < clients.size(); ++k) {
    const data::ClientDataset& client = clients[k];
    if (client.empty()) continue;
    const std::uint64_t cid = static_cast<std::uint64_t>(client.client_id);
    nn::ModelParams model = global;
    model.unfreeze_all();
    nn::OptState opt =
        nn::OptState::create(model, {config.ft_lr, config.momentum, config.weight_decay});
    nn::train_epochs(model, client.data.xs, client.data.ys, client.counts, config.ft_epochs,
                     nn::LossKind::cross_entropy, config.batch_size, opt,
                     rng::derive_seed(config.seed, "baseline.ft.shuffle", cid));
    models[k] = std::move(model);
  }
  return models;
}

PredictFn model_predictor(const nn::ModelParams& model) {
  return [&model](std::span<const double> x) {
    nn::Mat input(1, x.size());
    for (std::size_t j = 0; j < x.size(); ++j) input(0, j) = x[j];
    const nn::Mat logits = nn::forward(model, input);
    return expert::argmax_class(logits.a);
  };
}

namespace {

std::vector<MetricsRecord> evaluate_models(
    const std::vector<std::optional<nn::ModelParams>>& models,
    const std::vector<data::ClientDataset>& clients,
    const std::vector<data::LabeledDataset>& testsets, const std::string& method,
    std::uint64_t record_seed) {
  if (testsets.size() != clients.size()) {
    throw std::invalid_argument("evaluate_models: testsets/clients mismatch");
  }
  std::vector<MetricsRecord> records;
  for (std::size_t k = 0; k < clients.size(); ++k) {
    if (!models[k] || testsets[k].empty()) continue;
    MetricsRecord r = evaluate(model_predictor(*models[k]), testsets[k]);
    r.method = method;
    r.seed = record_seed;
    r.client = clients[k].client_id;
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace

std::vector<MetricsRecord> run_baseline_local(const std::vector<data::ClientDataset>& clients,
                                              const nn::ArchSpec& arch, const BaselineConfig& config,
                                              const std::vector<data::LabeledDataset>& testsets,
                                              const std::string& method, std::uint64_t record_seed) {
  return evaluate_models(train_local_models(clients, arch, config), clients, testsets, method,
                         record_seed);
}

std::vector<MetricsRecord> run_baseline_fedavg_ft(const nn::ModelParams& global,
                                                  const std::vector<data::ClientDataset>& clients,
                                                  const BaselineConfig& config,
                                                  const std::vector<data::LabeledDataset>& testsets,
                                                  const std::string& method,
                                                  std::uint64_t record_seed) {
  return evaluate_models(finetune_global_models(global, clients, config), clients, testsets, method,
                         record_seed);
}

}  // namespace ecl::eval
