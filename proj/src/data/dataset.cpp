#include "ecl/data/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace ecl::data {

void LabeledDataset::validate() const {
  if (num_classes <= 0) throw std::invalid_argument("LabeledDataset: num_classes must be >= 1");
  if (ys.size() != xs.rows) throw std::invalid_argument("LabeledDataset: label/sample count mismatch");
  for (int y : ys) {
    if (y < 0 || y >= num_classes) throw std::invalid_argument("LabeledDataset: label out of range");
  }
}

std::vector<long> LabeledDataset::class_counts() const {
  std::vector<long> counts(num_classes, 0);
  for (int y : ys) counts.at(y)++;
  return counts;
}

void LabeledDataset::append_row(const double* x, std::size_t dim, int y) {
  if (xs.rows == 0 && xs.cols == 0) xs.cols = dim;
  if (dim != xs.cols) throw std::invalid_argument("append_row: feature width mismatch");
  xs.a.insert(xs.a.end(), x, x + dim);
  xs.rows++;
  ys.push_back(y);
}

LabeledDataset LabeledDataset::subset(const std::vector<std::size_t>& indices) const {
  LabeledDataset out;
  out.num_classes = num_classes;
  out.xs = nn::Mat(indices.size(), xs.cols);
  out.ys.resize(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const std::size_t src = indices[i];
    if (src >= size()) throw std::invalid_argument("subset: index out of range");
    const double* row = xs.row(src);
    double* dst = out.xs.row(i);
    for (std::size_t j = 0; j < xs.cols; ++j) dst[j] = row[j];
    out.ys[i] = ys[src];
  }
  return out;
}

std::vector<std::size_t> LabeledDataset::indices_of_class(int cls) const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    if (ys[i] == cls) idx.push_back(i);
  }
  return idx;
}

ClientDataset ClientDataset::make(int id, LabeledDataset d) {
  ClientDataset c;
  c.client_id = id;
  c.counts = d.class_counts();
  c.data = std::move(d);
  return c;
}

namespace {

bool parse_double(const std::string& tok, double& out) {
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, ',')) fields.push_back(cur);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

LabeledDataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path.string());

  LabeledDataset ds;
  std::string line;
  std::size_t row = 0;
  std::size_t width = 0;
  int max_label = -1;
  std::vector<double> feats;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_commas(line);
    double label_val = 0.0;
    if (!parse_double(fields[0], label_val)) {
      if (row == 1) continue;  // header row
      throw std::runtime_error(path.string() + ": row " + std::to_string(row) +
                               ": non-numeric label '" + fields[0] + "'");
    }
    if (fields.size() < 2) {
      throw std::runtime_error(path.string() + ": row " + std::to_string(row) + ": no feature fields");
    }
    if (width == 0) width = fields.size() - 1;
    if (fields.size() - 1 != width) {
      throw std::runtime_error(path.string() + ": row " + std::to_string(row) + ": expected " +
                               std::to_string(width) + " features, got " +
                               std::to_string(fields.size() - 1));
    }
    const long label = std::lround(label_val);
    if (static_cast<double>(label) != label_val || label < 0) {
      throw std::runtime_error(path.string() + ": row " + std::to_string(row) +
                               ": label out of range '" + fields[0] + "'");
    }
    feats.resize(width);
    for (std::size_t j = 0; j < width; ++j) {
      if (!parse_double(fields[j + 1], feats[j])) {
        throw std::runtime_error(path.string() + ": row " + std::to_string(row) +
                                 ": non-numeric field '" + fields[j + 1] + "'");
      }
    }
    ds.append_row(feats.data(), width, static_cast<int>(label));
    max_label = std::max(max_label, static_cast<int>(label));
  }
  if (ds.empty()) throw std::runtime_error(path.string() + ": no data rows");
  ds.num_classes = max_label + 1;
  return ds;
}

void save_csv(const LabeledDataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  char buf[64];
  for (std::size_t i = 0; i < ds.size(); ++i) {
    out << ds.ys[i];
    const double* row = ds.xs.row(i);
    for (std::size_t j = 0; j < ds.input_dim(); ++j) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, row[j]);
      out << ',' << std::string_view(buf, static_cast<std::size_t>(ptr - buf));
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace ecl::data
