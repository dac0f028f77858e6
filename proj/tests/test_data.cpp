#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>

#include "ecl/data/balance.hpp"
#include "ecl/data/dataset.hpp"
#include "ecl/data/grouping.hpp"
#include "ecl/data/longtail.hpp"
#include "ecl/data/partition.hpp"
#include "ecl/data/synth.hpp"
#include "ecl/rng.hpp"

using namespace ecl;

namespace {

namespace fs = std::filesystem;

fs::path temp_file(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ecl_data_test_" + name);
  fs::remove(p);
  return p;
}

bool row_in_dataset(const data::LabeledDataset& ds, const double* x, int y) {
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.ys[i] != y) continue;
    bool same = true;
    for (std::size_t j = 0; j < ds.input_dim(); ++j) {
      if (ds.xs(i, j) != x[j]) {
        same = false;
        break;
      }
    }
    if (same) return true;
  }
  return false;
}

// Straight-line re-implementation of the documented Dirichlet construction:
// per-class gamma draws from the same substream, normalized and integerized
// by largest remainder.
std::vector<std::vector<long>> oracle_dirichlet_counts(const data::LabeledDataset& ds,
                                                       const data::PartitionSpec& spec) {
  const auto normal = [](rng::Rng& g) {
    const double u1 = 1.0 - rng::unit_double(g);
    const double u2 = rng::unit_double(g);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  };
  const std::function<double(rng::Rng&, double)> gamma = [&](rng::Rng& g, double shape) -> double {
    if (shape < 1.0) {
      const double u = 1.0 - rng::unit_double(g);
      return gamma(g, shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      const double x = normal(g);
      double v = 1.0 + c * x;
      if (v <= 0.0) continue;
      v = v * v * v;
      const double u = 1.0 - rng::unit_double(g);
      if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
    }
  };

  const std::vector<long> totals = ds.class_counts();
  std::vector<std::vector<long>> counts(static_cast<std::size_t>(spec.num_clients),
                                        std::vector<long>(totals.size(), 0));
  for (std::size_t c = 0; c < totals.size(); ++c) {
    if (totals[c] == 0) continue;
    rng::Rng g(rng::derive_seed(spec.seed, "dirichlet", c));
    std::vector<double> p(static_cast<std::size_t>(spec.num_clients));
    double sum = 0.0;
    for (double& v : p) {
      v = gamma(g, spec.alpha);
      sum += v;
    }
    // floor + largest fractional remainder, ties to the lowest index
    std::vector<long> share(p.size());
    std::vector<std::pair<double, std::size_t>> frac(p.size());
    long assigned = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double t = p[i] / sum * static_cast<double>(totals[c]);
      share[i] = static_cast<long>(std::floor(t));
      assigned += share[i];
      frac[i] = {t - std::floor(t), i};
    }
    std::sort(frac.begin(), frac.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    const long leftover = totals[c] - assigned;
    for (long j = 0; j < leftover; ++j) share[frac[static_cast<std::size_t>(j)].second]++;
    for (std::size_t i = 0; i < share.size(); ++i) counts[i][c] += share[i];
  }
  return counts;
}

}  // namespace

TEST_CASE("synth_generate degenerate spread reproduces the class means") {
  const data::LabeledDataset ds = data::synth_generate(3, 6, 4, 0.0, 42);
  ds.validate();
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const std::vector<double> mean = data::synth_class_mean(ds.ys[i], 6, 42);
    for (std::size_t j = 0; j < 6; ++j) CHECK(ds.xs(i, j) == mean[j]);
  }
}

TEST_CASE("synth_generate is deterministic and unit-norm centered") {
  const data::LabeledDataset a = data::synth_generate(4, 8, 10, 0.3, 7);
  const data::LabeledDataset b = data::synth_generate(4, 8, 10, 0.3, 7);
  CHECK(a.xs == b.xs);
  CHECK(a.ys == b.ys);
  for (int c = 0; c < 4; ++c) {
    const std::vector<double> mean = data::synth_class_mean(c, 8, 7);
    double norm = 0.0;
    for (double v : mean) norm += v * v;
    CHECK(std::abs(norm - 1.0) <= 1e-12);
  }
}

TEST_CASE("synth_generate separable data is nearest-centroid perfect") {
  const data::LabeledDataset ds = data::synth_generate(2, 8, 30, 0.05, 3);
  std::vector<std::vector<double>> centroid(2, std::vector<double>(8, 0.0));
  std::vector<long> n(2, 0);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    n[ds.ys[i]]++;
    for (std::size_t j = 0; j < 8; ++j) centroid[ds.ys[i]][j] += ds.xs(i, j);
  }
  for (int c = 0; c < 2; ++c) {
    for (double& v : centroid[c]) v /= static_cast<double>(n[c]);
  }
  for (std::size_t i = 0; i < ds.size(); ++i) {
    double d0 = 0.0;
    double d1 = 0.0;
    for (std::size_t j = 0; j < 8; ++j) {
      d0 += (ds.xs(i, j) - centroid[0][j]) * (ds.xs(i, j) - centroid[0][j]);
      d1 += (ds.xs(i, j) - centroid[1][j]) * (ds.xs(i, j) - centroid[1][j]);
    }
    CHECK((d0 < d1 ? 0 : 1) == ds.ys[i]);
  }
}

TEST_CASE("longtail_profile evaluates the exponential profile") {
  const std::vector<long> if100 = data::longtail_profile(500, 10, 100.0);
  CHECK(if100[0] == 500);
  CHECK(if100[9] == 5);
  const std::vector<long> if10 = data::longtail_profile(500, 10, 10.0);
  CHECK(if10[0] == 500);
  CHECK(if10[9] == 50);
  CHECK(if10[0] / if10[9] == 10);
}

TEST_CASE("shape_longtail IF=1 keeps balanced data unchanged") {
  const data::LabeledDataset ds = data::synth_generate(5, 4, 20, 0.2, 11);
  const data::LabeledDataset shaped = data::shape_longtail(ds, 1.0, 12);
  CHECK(shaped.class_counts() == ds.class_counts());
}

TEST_CASE("shape_longtail counts follow the profile and remain a subset") {
  const data::LabeledDataset ds = data::synth_generate(6, 4, 60, 0.2, 13);
  const data::LabeledDataset shaped = data::shape_longtail(ds, 12.0, 14);
  const std::vector<long> counts = shaped.class_counts();
  const std::vector<long> expect = data::longtail_profile(60, 6, 12.0);
  CHECK(counts == expect);
  for (std::size_t c = 1; c < counts.size(); ++c) CHECK(counts[c] <= counts[c - 1]);
  const double ratio = static_cast<double>(counts.front()) / static_cast<double>(counts.back());
  CHECK(ratio == doctest::Approx(12.0).epsilon(0.15));
  for (std::size_t i = 0; i < shaped.size(); ++i) {
    CHECK(row_in_dataset(ds, shaped.xs.row(i), shaped.ys[i]));
  }
}

TEST_CASE("shape_longtail rejects infeasible requests") {
  const data::LabeledDataset ds = data::synth_generate(3, 4, 5, 0.2, 15);
  CHECK_THROWS_AS(data::shape_longtail(ds, 50.0, 16), std::invalid_argument);
}

TEST_CASE("dirichlet_partition concentrates at huge alpha") {
  const data::LabeledDataset ds = data::synth_generate(1, 4, 1000, 0.1, 17);
  data::PartitionSpec spec;
  spec.num_clients = 4;
  spec.alpha = 1e9;
  spec.seed = 18;
  const std::vector<data::ClientDataset> clients = data::dirichlet_partition(ds, spec);
  for (const data::ClientDataset& c : clients) {
    CHECK(std::abs(static_cast<long>(c.data.size()) - 250) <= 1);
  }
}

TEST_CASE("dirichlet_partition conserves samples without duplication") {
  const data::LabeledDataset ds = data::synth_generate(5, 4, 40, 0.3, 19);
  const data::LabeledDataset shaped = data::shape_longtail(ds, 8.0, 20);
  for (std::uint64_t seed : {21u, 22u, 23u}) {
    data::PartitionSpec spec;
    spec.num_clients = 6;
    spec.alpha = 0.2;
    spec.seed = seed;
    const std::vector<data::ClientDataset> clients = data::dirichlet_partition(shaped, spec);

    std::vector<long> totals(5, 0);
    std::size_t total_rows = 0;
    std::multiset<std::vector<double>> seen;
    for (const data::ClientDataset& c : clients) {
      total_rows += c.data.size();
      const std::vector<long> counts = c.data.class_counts();
      CHECK(counts == c.counts);
      for (int k = 0; k < 5; ++k) totals[k] += counts[k];
      for (std::size_t i = 0; i < c.data.size(); ++i) {
        std::vector<double> row(c.data.xs.row(i), c.data.xs.row(i) + 4);
        row.push_back(static_cast<double>(c.data.ys[i]));
        seen.insert(row);
      }
    }
    CHECK(total_rows == shaped.size());
    CHECK(totals == shaped.class_counts());
    CHECK(seen.size() == shaped.size());
    for (auto it = seen.begin(); it != seen.end(); ++it) CHECK(seen.count(*it) == 1);
  }
}

TEST_CASE("dirichlet_partition is deterministic and matches the reference sampler") {
  const data::LabeledDataset ds = data::synth_generate(4, 3, 50, 0.3, 24);
  data::PartitionSpec spec;
  spec.num_clients = 2;
  spec.alpha = 0.2;
  spec.seed = 25;

  const std::vector<data::ClientDataset> a = data::dirichlet_partition(ds, spec);
  const std::vector<data::ClientDataset> b = data::dirichlet_partition(ds, spec);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].data.xs == b[i].data.xs);
    CHECK(a[i].data.ys == b[i].data.ys);
  }

  const std::vector<std::vector<long>> expect = oracle_dirichlet_counts(ds, spec);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].counts == expect[i]);
  }
}

TEST_CASE("sort_and_group applies the ordering rules") {
  SUBCASE("descending counts split in two") {
    const data::ExpertAssignment a = data::sort_and_group({50, 30, 20, 5}, 2);
    CHECK(a.groups == std::vector<std::vector<int>>{{0, 1}, {2, 3}});
  }
  SUBCASE("ties break by ascending class index") {
    const data::ExpertAssignment a = data::sort_and_group(std::vector<long>(10, 10), 2);
    CHECK(a.groups[0] == std::vector<int>{0, 1, 2, 3, 4});
    CHECK(a.groups[1] == std::vector<int>{5, 6, 7, 8, 9});
  }
  SUBCASE("remainder classes go to head groups") {
    std::vector<long> counts(10);
    for (int c = 0; c < 10; ++c) counts[static_cast<std::size_t>(c)] = 100 - c;
    const data::ExpertAssignment a = data::sort_and_group(counts, 3);
    CHECK(a.groups[0].size() == 4);
    CHECK(a.groups[1].size() == 3);
    CHECK(a.groups[2].size() == 3);
  }
  SUBCASE("more experts than classes flags empty groups") {
    const data::ExpertAssignment a = data::sort_and_group({0, 7, 3}, 3);
    CHECK(a.groups[0] == std::vector<int>{1});
    CHECK(a.groups[1] == std::vector<int>{2});
    CHECK(a.groups[2].empty());
    CHECK(a.has_empty_groups());
    CHECK(a.owner_of(0) == -1);
  }
}

TEST_CASE("sort_and_group properties over random count tables") {
  rng::Rng g(2025);
  for (int iter = 0; iter < 1000; ++iter) {
    const int c = 1 + static_cast<int>(rng::bounded(g, 12));
    std::vector<long> counts(static_cast<std::size_t>(c));
    long present = 0;
    for (long& n : counts) {
      n = static_cast<long>(rng::bounded(g, 20));
      if (n > 0) ++present;
    }
    if (present == 0) {
      counts[static_cast<std::size_t>(rng::bounded(g, static_cast<std::uint64_t>(c)))] = 1;
    }
    const int m = 1 + static_cast<int>(rng::bounded(g, static_cast<std::uint64_t>(c + 2)));
    const data::ExpertAssignment a = data::sort_and_group(counts, m);

    // coverage + disjointness via owners
    std::size_t owned = 0;
    for (int cls = 0; cls < c; ++cls) {
      if (counts[static_cast<std::size_t>(cls)] > 0) {
        CHECK(a.owner_of(cls) >= 0);
        ++owned;
      } else {
        CHECK(a.owner_of(cls) == -1);
      }
    }
    std::size_t grouped = 0;
    for (const auto& grp : a.groups) grouped += grp.size();
    CHECK(grouped == owned);

    // contiguity against the sorted order
    std::vector<int> concat;
    for (const auto& grp : a.groups) concat.insert(concat.end(), grp.begin(), grp.end());
    CHECK(concat == a.sorted_classes);
    for (std::size_t i = 1; i < a.sorted_classes.size(); ++i) {
      const int prev = a.sorted_classes[i - 1];
      const int cur = a.sorted_classes[i];
      const auto cp = counts[static_cast<std::size_t>(prev)];
      const auto cc = counts[static_cast<std::size_t>(cur)];
      CHECK((cp > cc || (cp == cc && prev < cur)));
    }

    // size balance, larger groups first
    std::size_t max_size = 0;
    std::size_t min_size = a.groups.front().size();
    for (std::size_t i = 0; i < a.groups.size(); ++i) {
      max_size = std::max(max_size, a.groups[i].size());
      min_size = std::min(min_size, a.groups[i].size());
      if (i > 0) CHECK(a.groups[i - 1].size() >= a.groups[i].size());
    }
    CHECK(max_size - min_size <= 1);
  }
}

TEST_CASE("balance_subset oversamples to the subset maximum") {
  data::LabeledDataset ds;
  ds.num_classes = 3;
  for (int i = 0; i < 8; ++i) {
    const double x[2] = {static_cast<double>(i), 0.0};
    ds.append_row(x, 2, 0);
  }
  for (int i = 0; i < 2; ++i) {
    const double x[2] = {static_cast<double>(i), 1.0};
    ds.append_row(x, 2, 1);
  }

  SUBCASE("already balanced stays untouched") {
    data::LabeledDataset even;
    even.num_classes = 2;
    for (int i = 0; i < 16; ++i) {
      const double x[1] = {static_cast<double>(i)};
      even.append_row(x, 1, i % 2);
    }
    const data::LabeledDataset out = data::balance_subset(even, {0, 1}, 5);
    CHECK(out.class_counts() == std::vector<long>{8, 8});
    std::multiset<double> xs_in(even.xs.a.begin(), even.xs.a.end());
    std::multiset<double> xs_out(out.xs.a.begin(), out.xs.a.end());
    CHECK(xs_in == xs_out);
  }
  SUBCASE("minority class drawn with replacement from its own samples") {
    const data::LabeledDataset out = data::balance_subset(ds, {0, 1}, 6);
    CHECK(out.class_counts() == std::vector<long>{8, 8, 0});
    for (std::size_t i = 0; i < out.size(); ++i) {
      CHECK(row_in_dataset(ds, out.xs.row(i), out.ys[i]));
    }
  }
  SUBCASE("singleton class set is unchanged") {
    const data::LabeledDataset out = data::balance_subset(ds, {1}, 7);
    CHECK(out.class_counts() == std::vector<long>{0, 2, 0});
  }
  SUBCASE("empty class in the set is an error") {
    CHECK_THROWS_AS(data::balance_subset(ds, {2}, 8), std::invalid_argument);
  }
}

TEST_CASE("build_client_testset matches the largest-remainder histogram") {
  const data::LabeledDataset pool = data::synth_generate(3, 4, 50, 0.2, 30);

  SUBCASE("single-class client") {
    const data::LabeledDataset t = data::build_client_testset(pool, {0, 12, 0}, 20, 31);
    CHECK(t.class_counts() == std::vector<long>{0, 20, 0});
  }
  SUBCASE("50/50 proportions") {
    const data::LabeledDataset t = data::build_client_testset(pool, {30, 30, 0}, 100, 32);
    CHECK(t.class_counts() == std::vector<long>{50, 50, 0});
  }
  SUBCASE("exact rounding") {
    const data::LabeledDataset t = data::build_client_testset(pool, {5, 3, 2}, 10, 33);
    CHECK(t.class_counts() == std::vector<long>{5, 3, 2});
  }
  SUBCASE("histogram equals the largest-remainder target") {
    rng::Rng g(34);
    for (int iter = 0; iter < 50; ++iter) {
      std::vector<long> counts(3);
      long total = 0;
      for (long& n : counts) {
        n = static_cast<long>(rng::bounded(g, 30));
        total += n;
      }
      if (total == 0) continue;
      const long size = 1 + static_cast<long>(rng::bounded(g, 40));
      const data::LabeledDataset t =
          data::build_client_testset(pool, counts, size, 35 + static_cast<std::uint64_t>(iter));
      const std::vector<long> expect =
          data::largest_remainder(std::vector<double>(counts.begin(), counts.end()), size);
      CHECK(t.class_counts() == expect);
    }
  }
  SUBCASE("pool exhaustion is an error") {
    CHECK_THROWS_AS(data::build_client_testset(pool, {1, 0, 0}, 60, 36), std::runtime_error);
  }
}

TEST_CASE("largest_remainder is exact and conserving") {
  CHECK(data::largest_remainder({0.5, 0.3, 0.2}, 10) == std::vector<long>{5, 3, 2});
  rng::Rng g(40);
  for (int iter = 0; iter < 200; ++iter) {
    const std::size_t n = 1 + rng::bounded(g, 8);
    std::vector<double> w(n);
    for (double& v : w) v = rng::unit_double(g) + 1e-12;
    const long total = static_cast<long>(rng::bounded(g, 1000));
    const std::vector<long> out = data::largest_remainder(w, total);
    long sum = 0;
    for (long v : out) {
      CHECK(v >= 0);
      sum += v;
    }
    CHECK(sum == total);
  }
}

TEST_CASE("csv round-trip and error reporting") {
  SUBCASE("write then load reproduces the dataset") {
    const data::LabeledDataset ds = data::synth_generate(3, 5, 10, 0.4, 50);
    const fs::path p = temp_file("roundtrip.csv");
    data::save_csv(ds, p);
    const data::LabeledDataset back = data::load_csv(p);
    CHECK(back.num_classes == ds.num_classes);
    CHECK(back.ys == ds.ys);
    CHECK(back.xs == ds.xs);
    fs::remove(p);
  }
  SUBCASE("two well-formed rows") {
    const fs::path p = temp_file("ok.csv");
    std::ofstream(p) << "0,1.5,2.5\n1,-3.0,0.25\n";
    const data::LabeledDataset ds = data::load_csv(p);
    CHECK(ds.size() == 2);
    CHECK(ds.num_classes == 2);
    fs::remove(p);
  }
  SUBCASE("header row is skipped") {
    const fs::path p = temp_file("header.csv");
    std::ofstream(p) << "label,f1,f2\n0,1.0,2.0\n";
    const data::LabeledDataset ds = data::load_csv(p);
    CHECK(ds.size() == 1);
    fs::remove(p);
  }
  SUBCASE("ragged row names the offending row") {
    const fs::path p = temp_file("ragged.csv");
    std::ofstream(p) << "0,1.0,2.0\n1,3.0\n";
    try {
      data::load_csv(p);
      FAIL("expected a parse error");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()).find("row 2") != std::string::npos);
    }
    fs::remove(p);
  }
  SUBCASE("non-numeric feature is an error") {
    const fs::path p = temp_file("nonnum.csv");
    std::ofstream(p) << "0,1.0,oops\n";
    CHECK_THROWS_AS(data::load_csv(p), std::runtime_error);
    fs::remove(p);
  }
  SUBCASE("negative label is an error") {
    const fs::path p = temp_file("neglabel.csv");
    std::ofstream(p) << "-1,1.0,2.0\n";
    CHECK_THROWS_AS(data::load_csv(p), std::runtime_error);
    fs::remove(p);
  }
}
