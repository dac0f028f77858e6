#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "ecl/data/partition.hpp"
#include "ecl/data/synth.hpp"
#include "ecl/expert/checkpoint.hpp"
#include "ecl/expert/personalize.hpp"
#include "ecl/nn/train.hpp"
#include "ecl/rng.hpp"

using namespace ecl;

namespace {

namespace fs = std::filesystem;

nn::ArchSpec tiny_arch(std::uint64_t seed) {
  nn::ArchSpec spec;
  spec.input_dim = 6;
  spec.block_widths = {10, 8};
  spec.num_classes = 4;
  spec.init_seed = seed;
  return spec;
}

data::ClientDataset skewed_client(std::uint64_t seed) {
  const data::LabeledDataset ds = data::synth_generate(4, 6, 30, 0.25, seed);
  // counts 30/18/9/4
  std::vector<std::size_t> keep;
  const std::vector<long> target = {30, 18, 9, 4};
  for (int c = 0; c < 4; ++c) {
    const std::vector<std::size_t> idx = ds.indices_of_class(c);
    keep.insert(keep.end(), idx.begin(), idx.begin() + target[static_cast<std::size_t>(c)]);
  }
  return data::ClientDataset::make(0, ds.subset(keep));
}

expert::Phase2Config tiny_phase2(std::uint64_t seed) {
  expert::Phase2Config c;
  c.num_experts = 2;
  c.lambda = 0.5;
  c.retrain_epochs = 8;
  c.expert_epochs = 8;
  c.lr = 0.05;
  c.momentum = 0.9;
  c.weight_decay = 0.0;
  c.batch_size = 8;
  c.seed = seed;
  return c;
}

std::vector<std::uint8_t> group_bytes(const nn::LayerParams& layer) {
  std::vector<std::uint8_t> bytes;
  const auto put = [&](const double* p, std::size_t n) {
    const auto* b = reinterpret_cast<const std::uint8_t*>(p);
    bytes.insert(bytes.end(), b, b + n * sizeof(double));
  };
  put(layer.w.a.data(), layer.w.size());
  put(layer.b.data(), layer.b.size());
  return bytes;
}

double subset_accuracy(const nn::ModelParams& m, const data::LabeledDataset& ds,
                       const std::vector<int>& classes) {
  std::vector<bool> wanted(static_cast<std::size_t>(ds.num_classes), false);
  for (int c : classes) wanted[static_cast<std::size_t>(c)] = true;
  std::size_t n = 0;
  std::size_t correct = 0;
  const nn::Mat logits = nn::forward(m, ds.xs);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (!wanted[static_cast<std::size_t>(ds.ys[i])]) continue;
    ++n;
    std::size_t best = 0;
    for (std::size_t j = 1; j < logits.cols; ++j) {
      if (logits(i, j) > logits(i, best)) best = j;
    }
    if (static_cast<int>(best) == ds.ys[i]) ++correct;
  }
  return n == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(n);
}

}  // namespace

TEST_CASE("retrain_global_classifier freezes the backbone") {
  const nn::ModelParams global = nn::init_model(tiny_arch(1));
  const data::ClientDataset client = skewed_client(2);

  SUBCASE("zero epochs is a no-op") {
    const nn::ModelParams out =
        expert::retrain_global_classifier(global, client, 0, {0.05, 0.9, 0.0}, 8, 3);
    CHECK(out.params_equal(global));
  }
  SUBCASE("backbone bytes are identical after training") {
    const nn::ModelParams out =
        expert::retrain_global_classifier(global, client, 6, {0.05, 0.9, 0.0}, 8, 3);
    for (std::size_t l = 0; l < global.blocks.size(); ++l) {
      CHECK(group_bytes(out.blocks[l]) == group_bytes(global.blocks[l]));
    }
    CHECK(group_bytes(out.classifier) != group_bytes(global.classifier));
  }
}

TEST_CASE("retrain under uniform counts equals cross-entropy retraining") {
  const nn::ModelParams global = nn::init_model(tiny_arch(4));
  const data::LabeledDataset ds = data::synth_generate(4, 6, 12, 0.25, 5);
  const data::ClientDataset client = data::ClientDataset::make(0, ds);

  const std::uint64_t shuffle_seed = 6;
  const nn::ModelParams bsce_model =
      expert::retrain_global_classifier(global, client, 10, {0.05, 0.9, 0.0}, 8, shuffle_seed);

  nn::ModelParams ce_model = global;
  ce_model.freeze_backbone();
  nn::OptState opt = nn::OptState::create(ce_model, {0.05, 0.9, 0.0});
  nn::train_epochs(ce_model, ds.xs, ds.ys, ds.class_counts(), 10, nn::LossKind::cross_entropy, 8,
                   opt, shuffle_seed);

  for (std::size_t i = 0; i < ce_model.classifier.w.size(); ++i) {
    CHECK(std::abs(ce_model.classifier.w.a[i] - bsce_model.classifier.w.a[i]) <= 1e-12);
  }
  for (std::size_t i = 0; i < ce_model.classifier.b.size(); ++i) {
    CHECK(std::abs(ce_model.classifier.b[i] - bsce_model.classifier.b[i]) <= 1e-12);
  }
}

TEST_CASE("init_experts deep-copies the global model") {
  const nn::ModelParams global = nn::init_model(tiny_arch(7));
  std::vector<nn::ModelParams> experts = expert::init_experts(global, 3);
  REQUIRE(experts.size() == 3);
  for (const nn::ModelParams& e : experts) CHECK(e.params_equal(global));

  experts[1].classifier.w(0, 0) += 1.0;
  CHECK(experts[2].params_equal(global));
  CHECK_FALSE(experts[1].params_equal(global));

  const std::vector<nn::ModelParams> one = expert::init_experts(global, 1);
  CHECK(one.size() == 1);
  CHECK(one[0].params_equal(global));
}

TEST_CASE("train_expert freeze scopes") {
  const nn::ModelParams global = nn::init_model(tiny_arch(8));
  const data::ClientDataset client = skewed_client(9);
  const expert::Phase2Config cfg = tiny_phase2(10);
  const data::ExpertAssignment assign = data::sort_and_group(client.counts, 2);

  SUBCASE("last expert trains the classifier only") {
    nn::ModelParams ex = global;
    expert::train_expert(ex, 1, 2, client, assign.groups[1], cfg, 11, 12);
    for (std::size_t l = 0; l < ex.blocks.size(); ++l) {
      CHECK(group_bytes(ex.blocks[l]) == group_bytes(global.blocks[l]));
    }
    CHECK(group_bytes(ex.classifier) != group_bytes(global.classifier));
  }
  SUBCASE("earlier experts train the last block and classifier") {
    nn::ModelParams ex = global;
    expert::train_expert(ex, 0, 2, client, assign.groups[0], cfg, 13, 14);
    for (std::size_t l = 0; l + 1 < ex.blocks.size(); ++l) {
      CHECK(group_bytes(ex.blocks[l]) == group_bytes(global.blocks[l]));
    }
    CHECK(group_bytes(ex.blocks.back()) != group_bytes(global.blocks.back()));
    CHECK(group_bytes(ex.classifier) != group_bytes(global.classifier));
  }
  SUBCASE("empty group leaves the expert untouched") {
    nn::ModelParams ex = global;
    expert::train_expert(ex, 1, 2, client, {}, cfg, 15, 16);
    CHECK(ex.params_equal(global));
  }
  SUBCASE("training improves accuracy on the expert's own subset") {
    nn::ModelParams ex = global;
    expert::train_expert(ex, 0, 2, client, assign.groups[0], cfg, 17, 18);
    const double before = subset_accuracy(global, client.data, assign.groups[0]);
    const double after = subset_accuracy(ex, client.data, assign.groups[0]);
    CHECK(after > before);
  }
}

TEST_CASE("scale_logit applies the squared norm ratio") {
  CHECK(expert::scale_logit(3.0, 4.0, 4.0) == 3.0);
  CHECK(expert::scale_logit(3.0, 4.0, 1.0) == doctest::Approx(12.0).epsilon(1e-15));
  CHECK(expert::scale_logit(0.0, 7.3, 2.1) == 0.0);
  CHECK_THROWS_AS(expert::scale_logit(1.0, 1.0, 0.0), std::domain_error);
}

TEST_CASE("aggregate_logits endpoints, midpoint and provenance") {
  data::ExpertAssignment assign;
  assign.owners = {0, -1, 1};
  assign.groups = {{0}, {2}};
  const std::vector<double> zbar = {4.0, 99.0, -2.0};  // index 1 unused
  const std::vector<double> z0 = {2.0, 1.5, 6.0};

  const expert::AggregatedLogits at0 = expert::aggregate_logits(zbar, z0, 0.0, assign);
  CHECK(at0.logits == std::vector<double>{2.0, 1.5, 6.0});
  const expert::AggregatedLogits at1 = expert::aggregate_logits(zbar, z0, 1.0, assign);
  CHECK(at1.logits[0] == 4.0);
  CHECK(at1.logits[1] == 1.5);  // unowned stays global
  CHECK(at1.logits[2] == -2.0);
  const expert::AggregatedLogits mid = expert::aggregate_logits(zbar, z0, 0.5, assign);
  CHECK(mid.logits[0] == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(mid.provenance == std::vector<int>{0, -1, 1});

  // affine in lambda
  const double l = 0.3;
  const expert::AggregatedLogits at_l = expert::aggregate_logits(zbar, z0, l, assign);
  for (std::size_t c = 0; c < 3; ++c) {
    CHECK(std::abs(at_l.logits[c] - (l * at1.logits[c] + (1.0 - l) * at0.logits[c])) <= 1e-12);
  }

  CHECK_THROWS_AS(expert::aggregate_logits(zbar, z0, 1.5, assign), std::invalid_argument);
}

TEST_CASE("personalize_client produces a consistent state") {
  const nn::ModelParams global = nn::init_model(tiny_arch(20));
  const data::ClientDataset client = skewed_client(21);
  const expert::Phase2Config cfg = tiny_phase2(22);

  const expert::PersonalizedState s = expert::personalize_client(global, client, cfg);
  CHECK(s.client_id == client.client_id);
  REQUIRE(s.experts.size() == 2);
  // ownership totality over present classes
  for (int c = 0; c < 4; ++c) {
    if (client.counts[static_cast<std::size_t>(c)] > 0) {
      CHECK(s.assignment.owner_of(c) >= 0);
    } else {
      CHECK(s.assignment.owner_of(c) == -1);
    }
  }
  for (const nn::ModelParams& e : s.experts) CHECK(e.spec == global.spec);

  SUBCASE("deterministic bit-exact rerun") {
    const expert::PersonalizedState s2 = expert::personalize_client(global, client, cfg);
    CHECK(s.retrained_global.params_equal(s2.retrained_global));
    for (std::size_t m = 0; m < s.experts.size(); ++m) {
      CHECK(s.experts[m].params_equal(s2.experts[m]));
    }
    CHECK(s.assignment.groups == s2.assignment.groups);
  }
}

TEST_CASE("predict lambda endpoints collapse to the expected models") {
  const nn::ModelParams global = nn::init_model(tiny_arch(23));
  const data::ClientDataset client = skewed_client(24);
  expert::Phase2Config cfg = tiny_phase2(25);

  SUBCASE("lambda 0 equals the retrained global argmax on every input") {
    cfg.lambda = 0.0;
    const expert::PersonalizedState s = expert::personalize_client(global, client, cfg);
    rng::Rng g(26);
    for (int i = 0; i < 50; ++i) {
      std::vector<double> x(6);
      for (double& v : x) v = rng::normal(g);
      nn::Mat in(1, 6);
      for (std::size_t j = 0; j < 6; ++j) in(0, j) = x[j];
      const nn::Mat z0 = nn::forward(s.retrained_global, in);
      std::size_t best = 0;
      for (std::size_t j = 1; j < 4; ++j) {
        if (z0(0, j) > z0(0, best)) best = j;
      }
      expert::AggregatedLogits agg;
      const int pred = expert::predict(s, x, &agg);
      CHECK(pred == static_cast<int>(best));
      for (std::size_t c = 0; c < 4; ++c) CHECK(agg.logits[c] == z0(0, c));
    }
  }
  SUBCASE("single expert, lambda 1, no scaling equals the expert argmax") {
    cfg.num_experts = 1;
    cfg.lambda = 1.0;
    cfg.scheme = expert::ScalingScheme::no_scaling;
    const expert::PersonalizedState s = expert::personalize_client(global, client, cfg);
    REQUIRE(s.experts.size() == 1);
    rng::Rng g(27);
    for (int i = 0; i < 50; ++i) {
      std::vector<double> x(6);
      for (double& v : x) v = rng::normal(g);
      nn::Mat in(1, 6);
      for (std::size_t j = 0; j < 6; ++j) in(0, j) = x[j];
      const nn::Mat z = nn::forward(s.experts[0], in);
      std::size_t best = 0;
      for (std::size_t j = 1; j < 4; ++j) {
        if (z(0, j) > z(0, best)) best = j;
      }
      CHECK(expert::predict(s, x) == static_cast<int>(best));
    }
  }
}

TEST_CASE("aggregation matches a straight-line recomputation on random states") {
  rng::Rng g(3000);
  for (int iter = 0; iter < 100; ++iter) {
    const nn::ArchSpec arch = tiny_arch(4000 + static_cast<std::uint64_t>(iter));
    expert::PersonalizedState s;
    s.client_id = iter;
    s.retrained_global = nn::init_model(arch);
    const int m = 1 + static_cast<int>(rng::bounded(g, 3));
    std::vector<long> counts(4);
    long present = 0;
    for (long& n : counts) {
      n = static_cast<long>(rng::bounded(g, 5));
      present += n > 0 ? 1 : 0;
    }
    if (present == 0) counts[rng::bounded(g, 4)] = 1;
    s.assignment = data::sort_and_group(counts, m);
    for (int e = 0; e < m; ++e) {
      nn::ArchSpec espec = arch;
      espec.init_seed = 5000 + static_cast<std::uint64_t>(iter * 7 + e);
      s.experts.push_back(nn::init_model(espec));
    }
    s.lambda = rng::unit_double(g);
    const bool use_matrix = rng::bounded(g, 2) == 1;
    const bool use_scaling = rng::bounded(g, 2) == 1;
    s.scheme = use_scaling ? expert::ScalingScheme::ecl_scaling : expert::ScalingScheme::no_scaling;
    s.norm_mode = use_matrix ? expert::NormMode::whole_matrix : expert::NormMode::per_class_row;

    std::vector<double> x(6);
    for (double& v : x) v = rng::normal(g);
    expert::AggregatedLogits agg;
    const int label = expert::predict(s, x, &agg);

    // straight-line recomputation from raw forward outputs
    nn::Mat in(1, 6);
    for (std::size_t j = 0; j < 6; ++j) in(0, j) = x[j];
    const nn::Mat z0 = nn::forward(s.retrained_global, in);
    for (int c = 0; c < 4; ++c) {
      const int owner = s.assignment.owner_of(c);
      double expected = 0.0;
      if (owner < 0) {
        expected = z0(0, static_cast<std::size_t>(c));
      } else {
        const nn::ModelParams& ex = s.experts[static_cast<std::size_t>(owner)];
        const nn::Mat z = nn::forward(ex, in);
        double zbar = z(0, static_cast<std::size_t>(c));
        if (use_scaling) {
          double unorm = 0.0;
          double u0norm = 0.0;
          if (use_matrix) {
            for (double v : ex.classifier.w.a) unorm += v * v;
            for (double v : s.retrained_global.classifier.w.a) u0norm += v * v;
          } else {
            for (std::size_t j = 0; j < ex.classifier.w.cols; ++j) {
              unorm += ex.classifier.w(static_cast<std::size_t>(c), j) *
                       ex.classifier.w(static_cast<std::size_t>(c), j);
              u0norm += s.retrained_global.classifier.w(static_cast<std::size_t>(c), j) *
                        s.retrained_global.classifier.w(static_cast<std::size_t>(c), j);
            }
          }
          zbar = unorm / u0norm * zbar;
        }
        expected = s.lambda * zbar + (1.0 - s.lambda) * z0(0, static_cast<std::size_t>(c));
      }
      CHECK(std::abs(agg.logits[static_cast<std::size_t>(c)] - expected) <= 1e-12);
    }

    // argmax consistency
    std::size_t best = 0;
    for (std::size_t c = 1; c < 4; ++c) {
      if (agg.logits[c] > agg.logits[best]) best = c;
    }
    CHECK(label == static_cast<int>(best));
  }
}

TEST_CASE("run_phase2 handles degenerate and empty clients") {
  const nn::ModelParams global = nn::init_model(tiny_arch(30));

  SUBCASE("single expert, single-class client") {
    const data::LabeledDataset ds = data::synth_generate(4, 6, 10, 0.2, 31);
    const data::LabeledDataset only2 = data::restrict_to_classes(ds, {2});
    expert::Phase2Config cfg = tiny_phase2(32);
    cfg.num_experts = 1;
    const expert::PersonalizedState s =
        expert::personalize_client(global, data::ClientDataset::make(5, only2), cfg);
    REQUIRE(s.experts.size() == 1);
    CHECK(s.assignment.groups[0] == std::vector<int>{2});
    CHECK(s.assignment.owner_of(2) == 0);
  }
  SUBCASE("empty client yields a global-only state") {
    data::ClientDataset empty;
    empty.client_id = 3;
    empty.data.num_classes = 4;
    empty.counts.assign(4, 0);
    const expert::PersonalizedState s =
        expert::personalize_client(global, empty, tiny_phase2(33));
    CHECK(s.experts.empty());
    CHECK(s.retrained_global.params_equal(global));
    std::vector<double> x(6, 0.1);
    expert::AggregatedLogits agg;
    (void)expert::predict(s, x, &agg);
    for (int p : agg.provenance) CHECK(p == -1);
  }
}

TEST_CASE("expert classifier reinit flag changes the warm start deterministically") {
  const nn::ModelParams global = nn::init_model(tiny_arch(50));
  const data::ClientDataset client = skewed_client(51);
  expert::Phase2Config warm = tiny_phase2(52);
  expert::Phase2Config cold = warm;
  cold.reinit_expert_classifier = true;

  const expert::PersonalizedState a = expert::personalize_client(global, client, warm);
  const expert::PersonalizedState b = expert::personalize_client(global, client, cold);
  const expert::PersonalizedState b2 = expert::personalize_client(global, client, cold);
  REQUIRE(a.experts.size() == b.experts.size());
  for (std::size_t m = 0; m < a.experts.size(); ++m) {
    CHECK_FALSE(a.experts[m].classifier == b.experts[m].classifier);
    CHECK(b.experts[m].params_equal(b2.experts[m]));
    // backbone handling is unaffected by the classifier reinit
    for (std::size_t l = 0; l + 1 < b.experts[m].blocks.size(); ++l) {
      CHECK(b.experts[m].blocks[l] == global.blocks[l]);
    }
  }
  CHECK(a.retrained_global.params_equal(b.retrained_global));
}

TEST_CASE("personalized checkpoints round-trip") {
  const nn::ModelParams global = nn::init_model(tiny_arch(40));
  const data::ClientDataset client = skewed_client(41);
  expert::Phase2Config cfg = tiny_phase2(42);
  cfg.retrain_epochs = 2;
  cfg.expert_epochs = 2;
  const expert::PersonalizedState s = expert::personalize_client(global, client, cfg);

  const std::vector<std::uint8_t> bytes = expert::serialize_state(s);
  const expert::PersonalizedState back = expert::deserialize_state(bytes);
  CHECK(back.client_id == s.client_id);
  CHECK(back.lambda == s.lambda);
  CHECK(back.scheme == s.scheme);
  CHECK(back.norm_mode == s.norm_mode);
  CHECK(back.assignment.groups == s.assignment.groups);
  CHECK(back.assignment.owners == s.assignment.owners);
  CHECK(expert::serialize_state(back) == bytes);

  SUBCASE("file round-trip") {
    const fs::path p = fs::temp_directory_path() / "ecl_state_test.fecp";
    expert::save_state(s, p);
    const expert::PersonalizedState loaded = expert::load_state(p);
    CHECK(expert::serialize_state(loaded) == bytes);
    fs::remove(p);
  }
  SUBCASE("corrupt magic rejected") {
    std::vector<std::uint8_t> bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS_AS(expert::deserialize_state(bad), std::runtime_error);
  }
  SUBCASE("truncation rejected") {
    std::vector<std::uint8_t> bad = bytes;
    bad.resize(bad.size() / 2);
    CHECK_THROWS_AS(expert::deserialize_state(bad), std::runtime_error);
  }
  SUBCASE("empty state round-trips") {
    data::ClientDataset empty;
    empty.client_id = 7;
    empty.data.num_classes = 4;
    empty.counts.assign(4, 0);
    const expert::PersonalizedState gs = expert::personalize_client(global, empty, cfg);
    const std::vector<std::uint8_t> gbytes = expert::serialize_state(gs);
    const expert::PersonalizedState gback = expert::deserialize_state(gbytes);
    CHECK(gback.experts.empty());
    CHECK(gback.retrained_global.params_equal(gs.retrained_global));
  }
}
