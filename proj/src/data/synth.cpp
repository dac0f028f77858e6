#include "ecl/data/synth.hpp"

#include <cmath>
#include <stdexcept>

#include "ecl/rng.hpp"

namespace ecl::data {

std::vector<double> synth_class_mean(int cls, std::size_t input_dim, std::uint64_t seed) {
  rng::Rng g(rng::derive_seed(seed, "synth.mean", static_cast<std::uint64_t>(cls)));
  std::vector<double> mean(input_dim);
  double norm_sq = 0.0;
  for (double& v : mean) {
    v = rng::normal(g);
    norm_sq += v * v;
  }
  const double norm = std::sqrt(norm_sq);
  if (norm == 0.0) {
    mean.assign(input_dim, 0.0);
    mean[0] = 1.0;
    return mean;
  }
  for (double& v : mean) v /= norm;
  return mean;
}

LabeledDataset synth_generate(int num_classes, std::size_t input_dim, long per_class_count,
                              double spread, std::uint64_t seed) {
  if (num_classes <= 0 || input_dim == 0 || per_class_count <= 0) {
    throw std::invalid_argument("synth_generate: dimensions must be positive");
  }
  if (!(spread >= 0.0)) throw std::invalid_argument("synth_generate: spread must be >= 0");

  LabeledDataset ds;
  ds.num_classes = num_classes;
  ds.xs = nn::Mat(static_cast<std::size_t>(num_classes) * per_class_count, input_dim);
  ds.ys.resize(ds.xs.rows);

  std::size_t at = 0;
  std::vector<double> x(input_dim);
  for (int c = 0; c < num_classes; ++c) {
    const std::vector<double> mean = synth_class_mean(c, input_dim, seed);
    rng::Rng g(rng::derive_seed(seed, "synth.sample", static_cast<std::uint64_t>(c)));
    for (long i = 0; i < per_class_count; ++i, ++at) {
      double* row = ds.xs.row(at);
      for (std::size_t j = 0; j < input_dim; ++j) {
        row[j] = mean[j] + spread * rng::normal(g);
      }
      ds.ys[at] = c;
    }
  }
  return ds;
}

std::pair<LabeledDataset, LabeledDataset> split_per_class(const LabeledDataset& ds,
                                                          long train_per_class,
                                                          long test_per_class) {
  std::vector<std::size_t> train_idx;
  std::vector<std::size_t> test_idx;
  for (int c = 0; c < ds.num_classes; ++c) {
    const std::vector<std::size_t> idx = ds.indices_of_class(c);
    if (static_cast<long>(idx.size()) < train_per_class + test_per_class) {
      throw std::invalid_argument("split_per_class: class " + std::to_string(c) +
                                  " has too few samples");
    }
    train_idx.insert(train_idx.end(), idx.begin(), idx.begin() + train_per_class);
    test_idx.insert(test_idx.end(), idx.begin() + train_per_class,
                    idx.begin() + train_per_class + test_per_class);
  }
  return {ds.subset(train_idx), ds.subset(test_idx)};
}

}  // namespace ecl::data
