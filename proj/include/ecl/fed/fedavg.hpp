#pragma once
// Phase I orchestration: client sampling, local SGD updates, dataset-size
// weighted aggregation and the learning-rate milestone.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "ecl/data/dataset.hpp"
#include "ecl/nn/model.hpp"

namespace ecl::fed {

struct FedConfig {
  int rounds = 500;
  int clients_total = 20;
  int clients_per_round = 10;
  int local_epochs = 2;
  double lr = 0.1;
  int lr_milestone_round = 200;
  double lr_after_milestone = 0.01;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  std::size_t batch_size = 64;
  std::uint64_t seed = 0;

  void validate() const;
  double lr_at(int round) const { return round < lr_milestone_round ? lr : lr_after_milestone; }
};

struct RoundLog {
  int round = 0;
  double lr_used = 0.0;
  std::vector<int> sampled;      // ascending client ids
  std::vector<double> losses;    // aligned with sampled
  std::optional<double> eval_acc;
};

// Uniform sample without replacement from `eligible`, deterministic in
// (config.seed, round). Returns ascending ids. When eligible is smaller than
// clients_per_round, everyone participates.
std::vector<int> sample_clients(int round, const FedConfig& config, const std::vector<int>& eligible);
std::vector<int> sample_clients(int round, const FedConfig& config);

struct LocalUpdateResult {
  nn::ModelParams model;
  double loss = 0.0;
};

// Local epochs of cross-entropy SGD starting from a copy of the global
// model; momentum state starts fresh each call.
LocalUpdateResult local_update(const nn::ModelParams& global, const data::ClientDataset& client,
                               const FedConfig& config, int round);

// Parameter average weighted by dataset sizes, accumulated in input order.
nn::ModelParams aggregate(const std::vector<nn::ModelParams>& models, const std::vector<long>& sizes);

struct Phase1Result {
  nn::ModelParams global;
  std::vector<RoundLog> logs;
};

Phase1Result run_phase1(const FedConfig& config, const std::vector<data::ClientDataset>& clients,
                        const nn::ArchSpec& arch);

// CSV rows: round,client,loss (plus the lr actually used).
void write_round_log_csv(const std::vector<RoundLog>& logs, const std::filesystem::path& path);

}  // namespace ecl::fed
