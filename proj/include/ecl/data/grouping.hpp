#pragma once
// Splitting a client's present classes into per-expert groups.

#include <vector>

namespace ecl::data {

struct ExpertAssignment {
  // groups[m] holds the class ids owned by expert m; trailing groups may be
  // empty when there are more experts than present classes.
  std::vector<std::vector<int>> groups;
  // Present classes, most frequent first, ties broken by ascending class id.
  std::vector<int> sorted_classes;
  // owners[c] is the owning expert of class c, or -1 when c is absent.
  std::vector<int> owners;

  int owner_of(int cls) const { return owners.at(cls); }
  bool has_empty_groups() const;
};

// Sorts the present classes by (count desc, class id asc) and cuts the order
// into `num_experts` contiguous groups whose sizes differ by at most one,
// larger groups first.
ExpertAssignment sort_and_group(const std::vector<long>& class_counts, int num_experts);

}  // namespace ecl::data
