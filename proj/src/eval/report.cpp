#include "ecl/eval/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace ecl::eval {

namespace {

std::string num_str(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, static_cast<std::size_t>(ptr - buf));
}

double parse_num(const std::string& tok, const std::string& context) {
  double v = 0.0;
  const char* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), last, v);
  if (ec != std::errc() || ptr != last) {
    throw std::runtime_error("metrics csv: bad number '" + tok + "' in " + context);
  }
  return v;
}

std::vector<MetricsRecord> sorted_records(std::vector<MetricsRecord> records) {
  std::stable_sort(records.begin(), records.end(),
                   [](const MetricsRecord& a, const MetricsRecord& b) {
                     if (a.method != b.method) return a.method < b.method;
                     if (a.seed != b.seed) return a.seed < b.seed;
                     // mean rows (-1) after the client rows
                     const long ca = a.client < 0 ? std::numeric_limits<long>::max() : a.client;
                     const long cb = b.client < 0 ? std::numeric_limits<long>::max() : b.client;
                     return ca < cb;
                   });
  return records;
}

}  // namespace

void write_metrics_csv(const std::vector<MetricsRecord>& records, int num_classes,
                       const std::filesystem::path& path) {
  for (const MetricsRecord& r : records) {
    if (r.per_class.size() != static_cast<std::size_t>(num_classes)) {
      throw std::invalid_argument("write_metrics_csv: per-class width mismatch");
    }
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << "method,seed,client,overall,head,mid,tail";
  for (int c = 0; c < num_classes; ++c) out << ",acc_class_" << c;
  out << '\n';
  for (const MetricsRecord& r : sorted_records(records)) {
    out << r.method << ',' << r.seed << ',';
    if (r.client < 0) {
      out << "mean";
    } else {
      out << r.client;
    }
    out << ',' << num_str(r.overall) << ',' << num_str(r.head) << ',' << num_str(r.mid) << ','
        << num_str(r.tail);
    for (double v : r.per_class) out << ',' << num_str(v);
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<MetricsRecord> read_metrics_csv(const std::filesystem::path& path, int* num_classes) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": missing header");

  std::vector<std::string> header;
  {
    std::istringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) header.push_back(tok);
  }
  constexpr int kFixed = 7;
  if (header.size() < kFixed || header[0] != "method") {
    throw std::runtime_error(path.string() + ": unexpected header");
  }
  const int classes = static_cast<int>(header.size()) - kFixed;
  if (num_classes) *num_classes = classes;

  std::vector<MetricsRecord> records;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::istringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) fields.push_back(tok);
    if (fields.size() != header.size()) {
      throw std::runtime_error(path.string() + ": row " + std::to_string(row) + ": field count");
    }
    const std::string ctx = "row " + std::to_string(row);
    MetricsRecord r;
    r.method = fields[0];
    r.seed = static_cast<std::uint64_t>(std::stoull(fields[1]));
    r.client = fields[2] == "mean" ? -1 : std::stoi(fields[2]);
    r.overall = parse_num(fields[3], ctx);
    r.head = parse_num(fields[4], ctx);
    r.mid = parse_num(fields[5], ctx);
    r.tail = parse_num(fields[6], ctx);
    for (int c = 0; c < classes; ++c) r.per_class.push_back(parse_num(fields[kFixed + c], ctx));
    records.push_back(std::move(r));
  }
  return records;
}

void write_summary_json(const std::vector<MetricsRecord>& records, int num_classes,
                        const std::filesystem::path& path) {
  struct SeedStats {
    std::vector<double> overall, head, mid, tail;
  };
  std::map<std::string, std::map<std::uint64_t, SeedStats>> by_method;
  for (const MetricsRecord& r : records) {
    if (r.client < 0) continue;  // summaries recompute macro means from client rows
    SeedStats& s = by_method[r.method][r.seed];
    s.overall.push_back(r.overall);
    s.head.push_back(r.head);
    s.mid.push_back(r.mid);
    s.tail.push_back(r.tail);
  }

  const auto nan_mean = [](const std::vector<double>& v) {
    double sum = 0.0;
    std::size_t n = 0;
    for (double x : v) {
      if (!std::isnan(x)) {
        sum += x;
        ++n;
      }
    }
    return n == 0 ? std::numeric_limits<double>::quiet_NaN() : sum / static_cast<double>(n);
  };
  const auto sample_std = [](const std::vector<double>& v, double mean) {
    if (v.size() < 2 || std::isnan(mean)) return 0.0;
    double acc = 0.0;
    for (double x : v) acc += (x - mean) * (x - mean);
    return std::sqrt(acc / static_cast<double>(v.size() - 1));
  };
  const auto plain_mean = [&](const std::vector<double>& v) { return nan_mean(v); };

  nlohmann::json root;
  root["num_classes"] = num_classes;
  root["methods"] = nlohmann::json::object();
  for (const auto& [method, seeds] : by_method) {
    nlohmann::json entry;
    std::vector<std::uint64_t> seed_list;
    std::vector<double> overall, head, mid, tail;
    for (const auto& [seed, stats] : seeds) {
      seed_list.push_back(seed);
      overall.push_back(nan_mean(stats.overall));
      head.push_back(nan_mean(stats.head));
      mid.push_back(nan_mean(stats.mid));
      tail.push_back(nan_mean(stats.tail));
    }
    entry["seeds"] = seed_list;
    const auto pack = [&](const std::vector<double>& per_seed) {
      nlohmann::json j;
      j["per_seed"] = per_seed;
      const double m = plain_mean(per_seed);
      j["mean"] = m;
      j["std"] = sample_std(per_seed, m);
      return j;
    };
    entry["macro_overall"] = pack(overall);
    entry["macro_head"] = pack(head);
    entry["macro_mid"] = pack(mid);
    entry["macro_tail"] = pack(tail);
    root["methods"][method] = std::move(entry);
  }

  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << root.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void emit_report(const std::vector<MetricsRecord>& records, int num_classes,
                 const std::filesystem::path& csv_path, const std::filesystem::path& json_path) {
  write_metrics_csv(records, num_classes, csv_path);
  write_summary_json(records, num_classes, json_path);
}

}  // namespace ecl::eval
