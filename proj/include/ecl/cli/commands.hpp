#pragma once
// The orchestrated pipeline behind the eclsim subcommands. All functions are
// deterministic in the config (sub-seeds derive from master_seed) and write
// only under config.output_dir.

#include "ecl/cli/config.hpp"
#include "ecl/data/dataset.hpp"

namespace ecl::cli {

struct ExperimentData {
  data::LabeledDataset train_shaped;         // long-tail shaped training pool
  data::LabeledDataset test_pool;            // balanced evaluation pool
  std::vector<data::ClientDataset> clients;  // Dirichlet partition of train_shaped
};

ExperimentData build_experiment_data(const ExperimentConfig& config);

// Output paths under config.output_dir.
std::filesystem::path global_checkpoint_path(const ExperimentConfig& config);
std::filesystem::path client_checkpoint_path(const ExperimentConfig& config, int client_id);
std::filesystem::path metrics_csv_path(const ExperimentConfig& config);
std::filesystem::path summary_json_path(const ExperimentConfig& config);

// Shapes + partitions only; emits partition_counts.csv (client,class,count)
// and partition_imbalance.csv (client,local_if).
void cmd_partition(const ExperimentConfig& config);

// Full training pipeline: Phase I to a global checkpoint plus round log,
// Phase II to one personalized checkpoint per client.
void cmd_train(const ExperimentConfig& config);

// Loads the checkpoints, rebuilds the test sets and emits metrics.csv and
// summary.json for ECL (with optional lambda sweep) and enabled baselines.
void cmd_eval(const ExperimentConfig& config);

// Recomputes summary.json from an existing metrics.csv.
void cmd_report(const ExperimentConfig& config);

}  // namespace ecl::cli
