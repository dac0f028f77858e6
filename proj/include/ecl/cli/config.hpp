#pragma once
// Experiment configuration: JSON file plus dotted-path overrides, every field
// defaulted to the shipped desk-scale scenario. Unknown keys are rejected.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ecl/eval/baselines.hpp"
#include "ecl/expert/personalize.hpp"
#include "ecl/fed/fedavg.hpp"
#include "ecl/nn/model.hpp"

namespace ecl::cli {

struct DatasetSection {
  std::string kind = "synthetic";  // synthetic | csv
  std::string csv_path;
  std::string csv_test_path;  // balanced evaluation pool for csv datasets
  int num_classes = 10;
  int input_dim = 32;
  long train_per_class = 500;
  long test_per_class = 200;
  double spread = 0.6;
  double imbalance_factor = 100.0;
};

struct PartitionSection {
  int num_clients = 10;
  double alpha = 0.2;
};

struct ArchSection {
  std::vector<std::size_t> block_widths = {128, 64};
};

struct Phase1Section {
  int rounds = 100;
  int clients_per_round = 8;
  int local_epochs = 2;
  double lr = 0.1;
  int lr_milestone_round = 40;
  double lr_after_milestone = 0.01;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  std::size_t batch_size = 64;
};

struct Phase2Section {
  int num_experts = 2;
  double lambda = 0.5;
  std::string scaling_scheme = "ecl_scaling";  // ecl_scaling | no_scaling
  std::string norm_mode = "per_class_row";     // per_class_row | whole_matrix
  int retrain_epochs = 30;
  int expert_epochs = 30;
  double lr = 0.01;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  std::size_t batch_size = 64;
  bool reinit_expert_classifier = false;
};

struct BaselinesSection {
  bool local = true;
  bool fedavg_ft = true;
  int local_epochs = 60;
  double local_lr = 0.1;
  int ft_epochs = 30;
  double ft_lr = 0.01;
};

struct EvalSection {
  long per_client_test_size = 200;
  std::vector<double> lambda_sweep;
};

struct ExperimentConfig {
  std::uint64_t master_seed = 1;
  std::string output_dir = "out";
  DatasetSection dataset;
  PartitionSection partition;
  ArchSection arch;
  Phase1Section phase1;
  Phase2Section phase2;
  BaselinesSection baselines;
  EvalSection eval;

  void validate() const;

  nn::ArchSpec arch_spec() const;       // init_seed derived from master_seed
  fed::FedConfig fed_config() const;
  expert::Phase2Config phase2_config() const;
  eval::BaselineConfig baseline_config() const;
};

// Loads `file` when given (empty config -> all defaults), then applies
// "dotted.path=value" overrides, then validates. Unknown keys and malformed
// values raise std::invalid_argument naming the key.
ExperimentConfig parse_config(const std::optional<std::filesystem::path>& file,
                              const std::vector<std::string>& overrides = {});

expert::ScalingScheme parse_scaling_scheme(const std::string& name);
expert::NormMode parse_norm_mode(const std::string& name);

}  // namespace ecl::cli
