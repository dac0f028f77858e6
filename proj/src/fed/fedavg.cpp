#include "ecl/fed/fedavg.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "ecl/nn/train.hpp"
#include "ecl/rng.hpp"

namespace ecl::fed {

void FedConfig::validate() const {
  if (rounds < 0) throw std::invalid_argument("FedConfig: rounds must be >= 0");
  if (clients_total < 1) throw std::invalid_argument("FedConfig: clients_total must be >= 1");
  if (clients_per_round < 1 || clients_per_round > clients_total) {
    throw std::invalid_argument("FedConfig: clients_per_round must be in [1, clients_total]");
  }
  if (local_epochs < 0) throw std::invalid_argument("FedConfig: local_epochs must be >= 0");
  if (lr_milestone_round < 0 || lr_milestone_round > rounds) {
    throw std::invalid_argument("FedConfig: lr_milestone_round must be in [0, rounds]");
  }
  if (batch_size == 0) throw std::invalid_argument("FedConfig: batch_size must be >= 1");
  nn::SgdHyper{lr, momentum, weight_decay}.validate();
}

std::vector<int> sample_clients(int round, const FedConfig& config, const std::vector<int>& eligible) {
  if (eligible.empty()) throw std::invalid_argument("sample_clients: no eligible clients");
  const std::size_t take =
      std::min(static_cast<std::size_t>(config.clients_per_round), eligible.size());
  rng::Rng g(rng::derive_seed(config.seed, "phase1.sample", static_cast<std::uint64_t>(round)));
  std::vector<std::size_t> picks = rng::sample_without_replacement(eligible.size(), take, g);
  std::vector<int> out;
  out.reserve(take);
  for (std::size_t p : picks) out.push_back(eligible[p]);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> sample_clients(int round, const FedConfig& config) {
  std::vector<int> all(static_cast<std::size_t>(config.clients_total));
  for (int i = 0; i < config.clients_total; ++i) all[static_cast<std::size_t>(i)] = i;
  return sample_clients(round, config, all);
}

LocalUpdateResult local_update(const nn::ModelParams& global, const data::ClientDataset& client,
                               const FedConfig& config, int round) {
  if (client.empty()) throw std::invalid_argument("local_update: empty client dataset");
  LocalUpdateResult r;
  r.model = global;
  nn::OptState opt = nn::OptState::create(
      r.model, nn::SgdHyper{config.lr_at(round), config.momentum, config.weight_decay});
  const std::uint64_t shuffle = rng::derive_seed(config.seed, "phase1.shuffle",
                                                 static_cast<std::uint64_t>(round),
                                                 static_cast<std::uint64_t>(client.client_id));
  r.loss = nn::train_epochs(r.model, client.data.xs, client.data.ys, client.counts,
                            config.local_epochs, nn::LossKind::cross_entropy, config.batch_size,
                            opt, shuffle);
  return r;
}

nn::ModelParams aggregate(const std::vector<nn::ModelParams>& models, const std::vector<long>& sizes) {
  if (models.empty()) throw std::invalid_argument("aggregate: empty model list");
  if (sizes.size() != models.size()) throw std::invalid_argument("aggregate: sizes/models mismatch");
  double total = 0.0;
  for (long s : sizes) {
    if (s <= 0) throw std::invalid_argument("aggregate: sizes must be positive");
    total += static_cast<double>(s);
  }
  for (const nn::ModelParams& m : models) {
    if (!(m.spec == models.front().spec)) throw std::invalid_argument("aggregate: architecture mismatch");
  }

  nn::ModelParams out = models.front();
  for (nn::LayerParams& layer : out.blocks) {
    std::fill(layer.w.a.begin(), layer.w.a.end(), 0.0);
    std::fill(layer.b.begin(), layer.b.end(), 0.0);
  }
  std::fill(out.classifier.w.a.begin(), out.classifier.w.a.end(), 0.0);
  std::fill(out.classifier.b.begin(), out.classifier.b.end(), 0.0);
  out.unfreeze_all();

  for (std::size_t k = 0; k < models.size(); ++k) {
    const double w = static_cast<double>(sizes[k]) / total;
    const nn::ModelParams& m = models[k];
    for (std::size_t l = 0; l < out.blocks.size(); ++l) {
      for (std::size_t i = 0; i < out.blocks[l].w.size(); ++i) {
        out.blocks[l].w.a[i] += w * m.blocks[l].w.a[i];
      }
      for (std::size_t i = 0; i < out.blocks[l].b.size(); ++i) {
        out.blocks[l].b[i] += w * m.blocks[l].b[i];
      }
    }
    for (std::size_t i = 0; i < out.classifier.w.size(); ++i) {
      out.classifier.w.a[i] += w * m.classifier.w.a[i];
    }
    for (std::size_t i = 0; i < out.classifier.b.size(); ++i) {
      out.classifier.b[i] += w * m.classifier.b[i];
    }
  }
  return out;
}

Phase1Result run_phase1(const FedConfig& config, const std::vector<data::ClientDataset>& clients,
                        const nn::ArchSpec& arch) {
  config.validate();
  if (clients.size() != static_cast<std::size_t>(config.clients_total)) {
    throw std::invalid_argument("run_phase1: client list does not match clients_total");
  }

  // Clients without data are out of the sampling pool: their aggregation
  // weight would be zero.
  std::vector<int> eligible;
  for (const data::ClientDataset& c : clients) {
    if (!c.empty()) eligible.push_back(c.client_id);
  }
  if (eligible.empty()) throw std::invalid_argument("run_phase1: all clients are empty");

  Phase1Result result;
  result.global = nn::init_model(arch);
  for (int t = 0; t < config.rounds; ++t) {
    RoundLog log;
    log.round = t;
    log.lr_used = config.lr_at(t);
    log.sampled = sample_clients(t, config, eligible);

    std::vector<nn::ModelParams> updated;
    std::vector<long> sizes;
    updated.reserve(log.sampled.size());
    for (int id : log.sampled) {
      const data::ClientDataset& client = clients[static_cast<std::size_t>(id)];
      LocalUpdateResult r = local_update(result.global, client, config, t);
      log.losses.push_back(r.loss);
      updated.push_back(std::move(r.model));
      sizes.push_back(static_cast<long>(client.data.size()));
    }
    result.global = aggregate(updated, sizes);
    result.logs.push_back(std::move(log));
  }
  return result;
}

void write_round_log_csv(const std::vector<RoundLog>& logs, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << "round,client,loss,lr\n";
  char buf[64];
  const auto num = [&](double v) {
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, static_cast<std::size_t>(ptr - buf));
  };
  for (const RoundLog& log : logs) {
    for (std::size_t i = 0; i < log.sampled.size(); ++i) {
      out << log.round << ',' << log.sampled[i] << ',' << num(log.losses[i]) << ','
          << num(log.lr_used) << '\n';
    }
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace ecl::fed
