#include "ecl/data/grouping.hpp"

#include <algorithm>
#include <stdexcept>

namespace ecl::data {

bool ExpertAssignment::has_empty_groups() const {
  return std::any_of(groups.begin(), groups.end(),
                     [](const std::vector<int>& g) { return g.empty(); });
}

ExpertAssignment sort_and_group(const std::vector<long>& class_counts, int num_experts) {
  if (num_experts < 1) throw std::invalid_argument("sort_and_group: need at least one expert");

  ExpertAssignment a;
  a.owners.assign(class_counts.size(), -1);
  for (std::size_t c = 0; c < class_counts.size(); ++c) {
    if (class_counts[c] < 0) throw std::invalid_argument("sort_and_group: negative count");
    if (class_counts[c] > 0) a.sorted_classes.push_back(static_cast<int>(c));
  }
  if (a.sorted_classes.empty()) {
    throw std::invalid_argument("sort_and_group: no present classes");
  }
  std::stable_sort(a.sorted_classes.begin(), a.sorted_classes.end(), [&](int lhs, int rhs) {
    if (class_counts[lhs] != class_counts[rhs]) return class_counts[lhs] > class_counts[rhs];
    return lhs < rhs;
  });

  const std::size_t present = a.sorted_classes.size();
  const std::size_t m = static_cast<std::size_t>(num_experts);
  const std::size_t base = present / m;
  const std::size_t rem = present % m;
  a.groups.resize(m);
  std::size_t at = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t take = base + (i < rem ? 1 : 0);
    for (std::size_t j = 0; j < take; ++j) {
      const int cls = a.sorted_classes[at++];
      a.groups[i].push_back(cls);
      a.owners[cls] = static_cast<int>(i);
    }
  }
  return a;
}

}  // namespace ecl::data
