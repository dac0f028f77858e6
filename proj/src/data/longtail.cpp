#include "ecl/data/longtail.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ecl/rng.hpp"

namespace ecl::data {

std::vector<long> longtail_profile(long n0, int num_classes, double imbalance_factor) {
  if (n0 <= 0) throw std::invalid_argument("longtail_profile: n0 must be positive");
  if (!(imbalance_factor >= 1.0)) {
    throw std::invalid_argument("longtail_profile: imbalance factor must be >= 1");
  }
  std::vector<long> target(num_classes);
  for (int c = 0; c < num_classes; ++c) {
    const double expo = num_classes > 1
                            ? -static_cast<double>(c) / static_cast<double>(num_classes - 1)
                            : 0.0;
    const long n = std::llround(static_cast<double>(n0) * std::pow(imbalance_factor, expo));
    if (n < 1) {
      throw std::invalid_argument("longtail_profile: class " + std::to_string(c) +
                                  " target rounds to zero; lower the imbalance factor");
    }
    target[c] = n;
  }
  return target;
}

LabeledDataset shape_longtail(const LabeledDataset& ds, double imbalance_factor, std::uint64_t seed) {
  ds.validate();
  const std::vector<long> counts = ds.class_counts();
  const long n0 = *std::max_element(counts.begin(), counts.end());
  const std::vector<long> target = longtail_profile(n0, ds.num_classes, imbalance_factor);

  std::vector<std::size_t> keep;
  for (int c = 0; c < ds.num_classes; ++c) {
    const std::vector<std::size_t> idx = ds.indices_of_class(c);
    if (static_cast<long>(idx.size()) < target[c]) {
      throw std::invalid_argument("shape_longtail: class " + std::to_string(c) + " has " +
                                  std::to_string(idx.size()) + " samples, needs " +
                                  std::to_string(target[c]));
    }
    rng::Rng g(rng::derive_seed(seed, "longtail", static_cast<std::uint64_t>(c)));
    std::vector<std::size_t> chosen =
        rng::sample_without_replacement(idx.size(), static_cast<std::size_t>(target[c]), g);
    std::sort(chosen.begin(), chosen.end());
    for (std::size_t k : chosen) keep.push_back(idx[k]);
  }
  std::sort(keep.begin(), keep.end());  // preserve input order
  return ds.subset(keep);
}

}  // namespace ecl::data
