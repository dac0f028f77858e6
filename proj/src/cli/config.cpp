#include "ecl/cli/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "ecl/rng.hpp"

namespace ecl::cli {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw std::invalid_argument("config: " + path + ": " + what);
}

void expect_keys(const json& j, const std::string& path, const std::set<std::string>& known) {
  if (!j.is_object()) fail(path, "expected an object");
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) fail(path.empty() ? key : path + "." + key, "unknown key");
  }
}

template <class T>
void get_num(const json& j, const std::string& path, const char* key, T& out) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  const std::string where = path + "." + key;
  if constexpr (std::is_floating_point_v<T>) {
    if (!v.is_number()) fail(where, "expected a number");
    out = v.get<double>();
  } else {
    if (!v.is_number_integer() && !v.is_number_unsigned()) fail(where, "expected an integer");
    out = v.get<T>();
  }
}

void get_bool(const json& j, const std::string& path, const char* key, bool& out) {
  if (!j.contains(key)) return;
  if (!j.at(key).is_boolean()) fail(path + "." + key, "expected a boolean");
  out = j.at(key).get<bool>();
}

void get_string(const json& j, const std::string& path, const char* key, std::string& out) {
  if (!j.contains(key)) return;
  if (!j.at(key).is_string()) fail(path + "." + key, "expected a string");
  out = j.at(key).get<std::string>();
}

void read_dataset(const json& j, DatasetSection& s) {
  expect_keys(j, "dataset",
              {"kind", "csv_path", "csv_test_path", "num_classes", "input_dim", "train_per_class",
               "test_per_class", "spread", "imbalance_factor"});
  get_string(j, "dataset", "kind", s.kind);
  get_string(j, "dataset", "csv_path", s.csv_path);
  get_string(j, "dataset", "csv_test_path", s.csv_test_path);
  get_num(j, "dataset", "num_classes", s.num_classes);
  get_num(j, "dataset", "input_dim", s.input_dim);
  get_num(j, "dataset", "train_per_class", s.train_per_class);
  get_num(j, "dataset", "test_per_class", s.test_per_class);
  get_num(j, "dataset", "spread", s.spread);
  get_num(j, "dataset", "imbalance_factor", s.imbalance_factor);
}

void read_partition(const json& j, PartitionSection& s) {
  expect_keys(j, "partition", {"num_clients", "alpha"});
  get_num(j, "partition", "num_clients", s.num_clients);
  get_num(j, "partition", "alpha", s.alpha);
}

void read_arch(const json& j, ArchSection& s) {
  expect_keys(j, "arch", {"block_widths"});
  if (j.contains("block_widths")) {
    const json& v = j.at("block_widths");
    if (!v.is_array() || v.empty()) fail("arch.block_widths", "expected a non-empty array");
    s.block_widths.clear();
    for (const json& e : v) {
      if (!e.is_number_integer() && !e.is_number_unsigned()) {
        fail("arch.block_widths", "expected integers");
      }
      const long w = e.get<long>();
      if (w < 1) fail("arch.block_widths", "widths must be >= 1");
      s.block_widths.push_back(static_cast<std::size_t>(w));
    }
  }
}

void read_phase1(const json& j, Phase1Section& s) {
  expect_keys(j, "phase1",
              {"rounds", "clients_per_round", "local_epochs", "lr", "lr_milestone_round",
               "lr_after_milestone", "momentum", "weight_decay", "batch_size"});
  get_num(j, "phase1", "rounds", s.rounds);
  get_num(j, "phase1", "clients_per_round", s.clients_per_round);
  get_num(j, "phase1", "local_epochs", s.local_epochs);
  get_num(j, "phase1", "lr", s.lr);
  get_num(j, "phase1", "lr_milestone_round", s.lr_milestone_round);
  get_num(j, "phase1", "lr_after_milestone", s.lr_after_milestone);
  get_num(j, "phase1", "momentum", s.momentum);
  get_num(j, "phase1", "weight_decay", s.weight_decay);
  get_num(j, "phase1", "batch_size", s.batch_size);
}

void read_phase2(const json& j, Phase2Section& s) {
  expect_keys(j, "phase2",
              {"num_experts", "lambda", "scaling_scheme", "norm_mode", "retrain_epochs",
               "expert_epochs", "lr", "momentum", "weight_decay", "batch_size",
               "reinit_expert_classifier"});
  get_num(j, "phase2", "num_experts", s.num_experts);
  get_num(j, "phase2", "lambda", s.lambda);
  get_string(j, "phase2", "scaling_scheme", s.scaling_scheme);
  get_string(j, "phase2", "norm_mode", s.norm_mode);
  get_num(j, "phase2", "retrain_epochs", s.retrain_epochs);
  get_num(j, "phase2", "expert_epochs", s.expert_epochs);
  get_num(j, "phase2", "lr", s.lr);
  get_num(j, "phase2", "momentum", s.momentum);
  get_num(j, "phase2", "weight_decay", s.weight_decay);
  get_num(j, "phase2", "batch_size", s.batch_size);
  get_bool(j, "phase2", "reinit_expert_classifier", s.reinit_expert_classifier);
}

void read_baselines(const json& j, BaselinesSection& s) {
  expect_keys(j, "baselines",
              {"local", "fedavg_ft", "local_epochs", "local_lr", "ft_epochs", "ft_lr"});
  get_bool(j, "baselines", "local", s.local);
  get_bool(j, "baselines", "fedavg_ft", s.fedavg_ft);
  get_num(j, "baselines", "local_epochs", s.local_epochs);
  get_num(j, "baselines", "local_lr", s.local_lr);
  get_num(j, "baselines", "ft_epochs", s.ft_epochs);
  get_num(j, "baselines", "ft_lr", s.ft_lr);
}

void read_eval(const json& j, EvalSection& s) {
  expect_keys(j, "eval", {"per_client_test_size", "lambda_sweep"});
  get_num(j, "eval", "per_client_test_size", s.per_client_test_size);
  if (j.contains("lambda_sweep")) {
    const json& v = j.at("lambda_sweep");
    if (!v.is_array()) fail("eval.lambda_sweep", "expected an array");
    s.lambda_sweep.clear();
    for (const json& e : v) {
      if (!e.is_number()) fail("eval.lambda_sweep", "expected numbers");
      s.lambda_sweep.push_back(e.get<double>());
    }
  }
}

ExperimentConfig from_json(const json& j) {
  expect_keys(j, "",
              {"master_seed", "output_dir", "dataset", "partition", "arch", "phase1", "phase2",
               "baselines", "eval"});
  ExperimentConfig c;
  get_num(j, "", "master_seed", c.master_seed);
  get_string(j, "", "output_dir", c.output_dir);
  if (j.contains("dataset")) read_dataset(j.at("dataset"), c.dataset);
  if (j.contains("partition")) read_partition(j.at("partition"), c.partition);
  if (j.contains("arch")) read_arch(j.at("arch"), c.arch);
  if (j.contains("phase1")) read_phase1(j.at("phase1"), c.phase1);
  if (j.contains("phase2")) read_phase2(j.at("phase2"), c.phase2);
  if (j.contains("baselines")) read_baselines(j.at("baselines"), c.baselines);
  if (j.contains("eval")) read_eval(j.at("eval"), c.eval);
  return c;
}

json parse_override_value(const std::string& raw) {
  json v = json::parse(raw, nullptr, false);
  if (v.is_discarded()) return json(raw);  // plain string
  return v;
}

}  // namespace

expert::ScalingScheme parse_scaling_scheme(const std::string& name) {
  if (name == "ecl_scaling") return expert::ScalingScheme::ecl_scaling;
  if (name == "no_scaling") return expert::ScalingScheme::no_scaling;
  throw std::invalid_argument("config: phase2.scaling_scheme: unknown scheme '" + name + "'");
}

expert::NormMode parse_norm_mode(const std::string& name) {
  if (name == "per_class_row") return expert::NormMode::per_class_row;
  if (name == "whole_matrix") return expert::NormMode::whole_matrix;
  throw std::invalid_argument("config: phase2.norm_mode: unknown mode '" + name + "'");
}

void ExperimentConfig::validate() const {
  if (dataset.kind != "synthetic" && dataset.kind != "csv") {
    fail("dataset.kind", "must be 'synthetic' or 'csv'");
  }
  if (dataset.kind == "csv" && dataset.csv_path.empty()) {
    fail("dataset.csv_path", "required for csv datasets");
  }
  if (dataset.kind == "csv" && dataset.csv_test_path.empty()) {
    fail("dataset.csv_test_path", "required for csv datasets");
  }
  if (dataset.num_classes < 1) fail("dataset.num_classes", "must be >= 1");
  if (dataset.input_dim < 1) fail("dataset.input_dim", "must be >= 1");
  if (dataset.train_per_class < 1) fail("dataset.train_per_class", "must be >= 1");
  if (dataset.test_per_class < 1) fail("dataset.test_per_class", "must be >= 1");
  if (!(dataset.spread >= 0.0)) fail("dataset.spread", "must be >= 0");
  if (!(dataset.imbalance_factor >= 1.0)) fail("dataset.imbalance_factor", "must be >= 1");
  if (partition.num_clients < 1) fail("partition.num_clients", "must be >= 1");
  if (!(partition.alpha > 0.0)) fail("partition.alpha", "must be > 0");
  if (arch.block_widths.empty()) fail("arch.block_widths", "must be non-empty");
  if (!(phase2.lambda >= 0.0 && phase2.lambda <= 1.0)) fail("phase2.lambda", "must be in [0, 1]");
  parse_scaling_scheme(phase2.scaling_scheme);
  parse_norm_mode(phase2.norm_mode);
  if (eval.per_client_test_size < 1) fail("eval.per_client_test_size", "must be >= 1");
  for (double l : eval.lambda_sweep) {
    if (!(l >= 0.0 && l <= 1.0)) fail("eval.lambda_sweep", "values must be in [0, 1]");
  }
  try {
    fed_config().validate();
    phase2_config().validate();
    baseline_config().validate();
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  if (output_dir.empty()) fail("output_dir", "must be non-empty");
}

nn::ArchSpec ExperimentConfig::arch_spec() const {
  nn::ArchSpec spec;
  spec.input_dim = static_cast<std::size_t>(dataset.input_dim);
  spec.block_widths = arch.block_widths;
  spec.num_classes = static_cast<std::size_t>(dataset.num_classes);
  spec.init_seed = rng::derive_seed(master_seed, "arch.init");
  return spec;
}

fed::FedConfig ExperimentConfig::fed_config() const {
  fed::FedConfig f;
  f.rounds = phase1.rounds;
  f.clients_total = partition.num_clients;
  f.clients_per_round = phase1.clients_per_round;
  f.local_epochs = phase1.local_epochs;
  f.lr = phase1.lr;
  f.lr_milestone_round = phase1.lr_milestone_round;
  f.lr_after_milestone = phase1.lr_after_milestone;
  f.momentum = phase1.momentum;
  f.weight_decay = phase1.weight_decay;
  f.batch_size = phase1.batch_size;
  f.seed = rng::derive_seed(master_seed, "phase1");
  return f;
}

expert::Phase2Config ExperimentConfig::phase2_config() const {
  expert::Phase2Config p;
  p.num_experts = phase2.num_experts;
  p.lambda = phase2.lambda;
  p.scheme = parse_scaling_scheme(phase2.scaling_scheme);
  p.norm_mode = parse_norm_mode(phase2.norm_mode);
  p.retrain_epochs = phase2.retrain_epochs;
  p.expert_epochs = phase2.expert_epochs;
  p.lr = phase2.lr;
  p.momentum = phase2.momentum;
  p.weight_decay = phase2.weight_decay;
  p.batch_size = phase2.batch_size;
  p.reinit_expert_classifier = phase2.reinit_expert_classifier;
  p.seed = rng::derive_seed(master_seed, "phase2");
  return p;
}

eval::BaselineConfig ExperimentConfig::baseline_config() const {
  eval::BaselineConfig b;
  b.local_epochs = baselines.local_epochs;
  b.local_lr = baselines.local_lr;
  b.ft_epochs = baselines.ft_epochs;
  b.ft_lr = baselines.ft_lr;
  b.momentum = phase2.momentum;
  b.weight_decay = phase2.weight_decay;
  b.batch_size = phase2.batch_size;
  b.seed = rng::derive_seed(master_seed, "baselines");
  return b;
}

ExperimentConfig parse_config(const std::optional<std::filesystem::path>& file,
                              const std::vector<std::string>& overrides) {
  json root = json::object();
  if (file) {
    std::ifstream in(*file);
    if (!in) throw std::invalid_argument("config: cannot open " + file->string());
    root = json::parse(in, nullptr, false);
    if (root.is_discarded()) throw std::invalid_argument("config: invalid JSON in " + file->string());
    if (root.is_null()) root = json::object();
  }
  if (const char* env = std::getenv("ECLSIM_OUTPUT_DIR"); env && *env) {
    root["output_dir"] = std::string(env);
  }
  for (const std::string& ov : overrides) {
    const std::size_t eq = ov.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw std::invalid_argument("config: override must look like key.path=value: " + ov);
    }
    std::string pointer = "/" + ov.substr(0, eq);
    for (char& ch : pointer) {
      if (ch == '.') ch = '/';
    }
    root[json::json_pointer(pointer)] = parse_override_value(ov.substr(eq + 1));
  }
  ExperimentConfig c = from_json(root);
  c.validate();
  return c;
}

}  // namespace ecl::cli
