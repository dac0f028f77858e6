#pragma once
// Labeled sample tables and the per-client view used throughout the
// simulator.

#include <filesystem>
#include <vector>

#include "ecl/nn/tensor.hpp"

namespace ecl::data {

struct LabeledDataset {
  nn::Mat xs;           // n x input_dim
  std::vector<int> ys;  // n, each in [0, num_classes)
  int num_classes = 0;

  std::size_t size() const { return xs.rows; }
  std::size_t input_dim() const { return xs.cols; }
  bool empty() const { return size() == 0; }

  void validate() const;
  std::vector<long> class_counts() const;

  void append_row(const double* x, std::size_t dim, int y);
  LabeledDataset subset(const std::vector<std::size_t>& indices) const;
  // Indices of samples with the given label, ascending.
  std::vector<std::size_t> indices_of_class(int cls) const;
};

struct ClientDataset {
  int client_id = -1;
  LabeledDataset data;
  std::vector<long> counts;  // cached per-class counts

  static ClientDataset make(int id, LabeledDataset d);
  bool empty() const { return data.empty(); }
};

// CSV rows are `label,f1,...,fd` with a constant d; an optional header row is
// detected by a non-numeric first field. Parse failures report the 1-based
// row number.
LabeledDataset load_csv(const std::filesystem::path& path);
void save_csv(const LabeledDataset& ds, const std::filesystem::path& path);

}  // namespace ecl::data
