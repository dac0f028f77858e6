#include "ecl/cli/commands.hpp"

#include <charconv>
#include <fstream>
#include <string>

#include "ecl/data/balance.hpp"
#include "ecl/data/longtail.hpp"
#include "ecl/data/partition.hpp"
#include "ecl/data/synth.hpp"
#include "ecl/eval/baselines.hpp"
#include "ecl/eval/report.hpp"
#include "ecl/expert/checkpoint.hpp"
#include "ecl/expert/personalize.hpp"
#include "ecl/fed/fedavg.hpp"
#include "ecl/nn/serialize.hpp"
#include "ecl/rng.hpp"

namespace ecl::cli {

namespace fs = std::filesystem;

namespace {

std::string num_str(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, static_cast<std::size_t>(ptr - buf));
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create directory " + dir.string() + ": " + ec.message());
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  return out;
}

}  // namespace

ExperimentData build_experiment_data(const ExperimentConfig& config) {
  ExperimentData d;
  if (config.dataset.kind == "synthetic") {
    const data::LabeledDataset full = data::synth_generate(
        config.dataset.num_classes, static_cast<std::size_t>(config.dataset.input_dim),
        config.dataset.train_per_class + config.dataset.test_per_class, config.dataset.spread,
        rng::derive_seed(config.master_seed, "dataset"));
    auto [train, test] =
        data::split_per_class(full, config.dataset.train_per_class, config.dataset.test_per_class);
    d.test_pool = std::move(test);
    d.train_shaped = data::shape_longtail(train, config.dataset.imbalance_factor,
                                          rng::derive_seed(config.master_seed, "longtail"));
  } else {
    data::LabeledDataset train = data::load_csv(config.dataset.csv_path);
    d.test_pool = data::load_csv(config.dataset.csv_test_path);
    const int c = std::max(train.num_classes, d.test_pool.num_classes);
    train.num_classes = c;
    d.test_pool.num_classes = c;
    if (train.input_dim() != static_cast<std::size_t>(config.dataset.input_dim)) {
      throw std::invalid_argument("config: dataset.input_dim does not match csv width");
    }
    d.train_shaped = data::shape_longtail(train, config.dataset.imbalance_factor,
                                          rng::derive_seed(config.master_seed, "longtail"));
  }

  data::PartitionSpec spec;
  spec.num_clients = config.partition.num_clients;
  spec.alpha = config.partition.alpha;
  spec.seed = rng::derive_seed(config.master_seed, "partition");
  d.clients = data::dirichlet_partition(d.train_shaped, spec);
  return d;
}

fs::path global_checkpoint_path(const ExperimentConfig& config) {
  return fs::path(config.output_dir) / "checkpoints" / "global.fecl";
}

fs::path client_checkpoint_path(const ExperimentConfig& config, int client_id) {
  char name[32];
  std::snprintf(name, sizeof name, "client_%04d.fecp", client_id);
  return fs::path(config.output_dir) / "checkpoints" / name;
}

fs::path metrics_csv_path(const ExperimentConfig& config) {
  return fs::path(config.output_dir) / "metrics.csv";
}

fs::path summary_json_path(const ExperimentConfig& config) {
  return fs::path(config.output_dir) / "summary.json";
}

namespace {

void write_partition_files(const ExperimentConfig& config, const ExperimentData& d) {
  const fs::path dir(config.output_dir);
  ensure_dir(dir);

  std::ofstream counts = open_out(dir / "partition_counts.csv");
  counts << "client,class,count\n";
  for (const data::ClientDataset& client : d.clients) {
    for (int c = 0; c < d.train_shaped.num_classes; ++c) {
      counts << client.client_id << ',' << c << ',' << client.counts.at(c) << '\n';
    }
  }

  std::ofstream imb = open_out(dir / "partition_imbalance.csv");
  imb << "client,local_if\n";
  for (const data::ClientDataset& client : d.clients) {
    long max_count = 0;
    long min_count = 0;
    for (long n : client.counts) {
      if (n <= 0) continue;
      max_count = std::max(max_count, n);
      min_count = min_count == 0 ? n : std::min(min_count, n);
    }
    if (min_count == 0) {
      imb << client.client_id << ",nan\n";
    } else {
      imb << client.client_id << ','
          << num_str(static_cast<double>(max_count) / static_cast<double>(min_count)) << '\n';
    }
  }
}

}  // namespace

void cmd_partition(const ExperimentConfig& config) {
  write_partition_files(config, build_experiment_data(config));
}

void cmd_train(const ExperimentConfig& config) {
  const ExperimentData d = build_experiment_data(config);
  write_partition_files(config, d);
  ensure_dir(fs::path(config.output_dir) / "checkpoints");

  const fed::Phase1Result phase1 = fed::run_phase1(config.fed_config(), d.clients, config.arch_spec());
  fed::write_round_log_csv(phase1.logs, fs::path(config.output_dir) / "rounds.csv");
  nn::save_model(phase1.global, global_checkpoint_path(config));

  const std::vector<expert::PersonalizedState> states =
      expert::run_phase2(phase1.global, d.clients, config.phase2_config());
  for (const expert::PersonalizedState& state : states) {
    expert::save_state(state, client_checkpoint_path(config, state.client_id));
  }
}

namespace {

struct EvalContext {
  ExperimentData data;
  nn::ModelParams global;
  std::vector<expert::PersonalizedState> states;        // aligned with data.clients
  std::vector<data::LabeledDataset> matched_testsets;   // empty dataset when client is empty
};

EvalContext load_eval_context(const ExperimentConfig& config) {
  EvalContext ctx;
  ctx.data = build_experiment_data(config);
  ctx.global = nn::load_model(global_checkpoint_path(config));

  ctx.states.reserve(ctx.data.clients.size());
  ctx.matched_testsets.resize(ctx.data.clients.size());
  for (const data::ClientDataset& client : ctx.data.clients) {
    expert::PersonalizedState state = expert::load_state(client_checkpoint_path(config, client.client_id));
    if (state.client_id != client.client_id) {
      throw std::runtime_error("checkpoint client id mismatch for client " +
                               std::to_string(client.client_id));
    }
    ctx.states.push_back(std::move(state));
    if (!client.empty()) {
      ctx.matched_testsets[static_cast<std::size_t>(client.client_id)] = data::build_client_testset(
          ctx.data.test_pool, client.counts, config.eval.per_client_test_size,
          rng::derive_seed(config.master_seed, "eval.testset",
                           static_cast<std::uint64_t>(client.client_id)));
    }
  }
  return ctx;
}

// Applies the eval-time lambda/scheme/norm and evaluates one ECL variant on
// matched and (optionally) balanced test sets.
void eval_ecl_variant(EvalContext& ctx, const ExperimentConfig& config, double lambda,
                      const std::string& method, bool balanced,
                      std::vector<eval::MetricsRecord>& records) {
  const expert::ScalingScheme scheme = parse_scaling_scheme(config.phase2.scaling_scheme);
  const expert::NormMode norm = parse_norm_mode(config.phase2.norm_mode);

  std::vector<eval::MetricsRecord> matched_rows;
  std::vector<eval::MetricsRecord> balanced_rows;
  for (std::size_t k = 0; k < ctx.data.clients.size(); ++k) {
    const data::ClientDataset& client = ctx.data.clients[k];
    if (client.empty()) continue;
    expert::PersonalizedState& state = ctx.states[k];
    state.lambda = lambda;
    state.scheme = scheme;
    state.norm_mode = norm;
    const eval::PredictFn fn = [&state](std::span<const double> x) {
      return expert::predict(state, x);
    };
    eval::MetricsRecord r = eval::evaluate(fn, ctx.matched_testsets[k]);
    r.method = method;
    r.seed = config.master_seed;
    r.client = client.client_id;
    matched_rows.push_back(std::move(r));
    if (balanced) {
      eval::MetricsRecord rb = eval::evaluate(fn, ctx.data.test_pool);
      rb.method = method + "@balanced";
      rb.seed = config.master_seed;
      rb.client = client.client_id;
      balanced_rows.push_back(std::move(rb));
    }
  }
  if (!matched_rows.empty()) {
    records.insert(records.end(), matched_rows.begin(), matched_rows.end());
    records.push_back(eval::mean_record(matched_rows));
  }
  if (!balanced_rows.empty()) {
    records.insert(records.end(), balanced_rows.begin(), balanced_rows.end());
    records.push_back(eval::mean_record(balanced_rows));
  }
}

}  // namespace

void cmd_eval(const ExperimentConfig& config) {
  EvalContext ctx = load_eval_context(config);
  ensure_dir(config.output_dir);

  std::vector<eval::MetricsRecord> records;
  eval_ecl_variant(ctx, config, config.phase2.lambda, "ecl", /*balanced=*/true, records);
  for (double l : config.eval.lambda_sweep) {
    eval_ecl_variant(ctx, config, l, "ecl[lambda=" + num_str(l) + "]", /*balanced=*/false, records);
  }

  if (config.baselines.local || config.baselines.fedavg_ft) {
    const eval::BaselineConfig bcfg = config.baseline_config();
    const auto add_rows = [&](const std::vector<std::optional<nn::ModelParams>>& models,
                              const std::string& method) {
      std::vector<eval::MetricsRecord> matched_rows;
      std::vector<eval::MetricsRecord> balanced_rows;
      for (std::size_t k = 0; k < ctx.data.clients.size(); ++k) {
        if (!models[k]) continue;
        const eval::PredictFn fn = eval::model_predictor(*models[k]);
        eval::MetricsRecord r = eval::evaluate(fn, ctx.matched_testsets[k]);
        r.method = method;
        r.seed = config.master_seed;
        r.client = ctx.data.clients[k].client_id;
        matched_rows.push_back(std::move(r));
        eval::MetricsRecord rb = eval::evaluate(fn, ctx.data.test_pool);
        rb.method = method + "@balanced";
        rb.seed = config.master_seed;
        rb.client = ctx.data.clients[k].client_id;
        balanced_rows.push_back(std::move(rb));
      }
      if (!matched_rows.empty()) {
        records.insert(records.end(), matched_rows.begin(), matched_rows.end());
        records.push_back(eval::mean_record(matched_rows));
        records.insert(records.end(), balanced_rows.begin(), balanced_rows.end());
        records.push_back(eval::mean_record(balanced_rows));
      }
    };
    if (config.baselines.local) {
      add_rows(eval::train_local_models(ctx.data.clients, config.arch_spec(), bcfg), "local");
    }
    if (config.baselines.fedavg_ft) {
      add_rows(eval::finetune_global_models(ctx.global, ctx.data.clients, bcfg), "fedavg_ft");
    }
  }

  eval::emit_report(records, ctx.data.train_shaped.num_classes, metrics_csv_path(config),
                    summary_json_path(config));
}

void cmd_report(const ExperimentConfig& config) {
  int num_classes = 0;
  const std::vector<eval::MetricsRecord> records =
      eval::read_metrics_csv(metrics_csv_path(config), &num_classes);
  eval::write_summary_json(records, num_classes, summary_json_path(config));
}

}  // namespace ecl::cli
