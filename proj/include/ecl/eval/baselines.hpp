#pragma once
// Comparison baselines: purely local training and whole-model fine-tuning of
// the converged global model.

#include <optional>

#include "ecl/data/dataset.hpp"
#include "ecl/eval/metrics.hpp"
#include "ecl/nn/model.hpp"

namespace ecl::eval {

struct BaselineConfig {
  int local_epochs = 60;
  double local_lr = 0.1;
  int ft_epochs = 30;
  double ft_lr = 0.01;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  std::size_t batch_size = 64;
  std::uint64_t seed = 0;

  void validate() const;
};

// One model per client trained from scratch on its local data with
// cross-entropy; empty clients yield nullopt.
std::vector<std::optional<nn::ModelParams>> train_local_models(
    const std::vector<data::ClientDataset>& clients, const nn::ArchSpec& arch,
    const BaselineConfig& config);

// Whole-model cross-entropy fine-tune of the global model per client.
std::vector<std::optional<nn::ModelParams>> finetune_global_models(
    const nn::ModelParams& global, const std::vector<data::ClientDataset>& clients,
    const BaselineConfig& config);

// Trains and evaluates in one pass; testsets align with clients by index and
// clients without data (or without a test set) are skipped.
std::vector<MetricsRecord> run_baseline_local(const std::vector<data::ClientDataset>& clients,
                                              const nn::ArchSpec& arch, const BaselineConfig& config,
                                              const std::vector<data::LabeledDataset>& testsets,
                                              const std::string& method, std::uint64_t record_seed);

std::vector<MetricsRecord> run_baseline_fedavg_ft(const nn::ModelParams& global,
                                                  const std::vector<data::ClientDataset>& clients,
                                                  const BaselineConfig& config,
                                                  const std::vector<data::LabeledDataset>& testsets,
                                                  const std::string& method,
                                                  std::uint64_t record_seed);

// argmax prediction helper for a bare model.
PredictFn model_predictor(const nn::ModelParams& model);

}  // namespace ecl::eval
