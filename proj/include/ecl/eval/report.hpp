#pragma once
// Metrics report emission: a flat CSV of records plus a JSON summary with
// per-method seed means. Both outputs are byte-stable functions of the
// records.

#include <filesystem>

#include "ecl/eval/metrics.hpp"

namespace ecl::eval {

// CSV columns: method,seed,client,overall,head,mid,tail,acc_class_0..C-1.
// client is an id or "mean"; missing per-class accuracies render as "nan".
void write_metrics_csv(const std::vector<MetricsRecord>& records, int num_classes,
                       const std::filesystem::path& path);

std::vector<MetricsRecord> read_metrics_csv(const std::filesystem::path& path,
                                            int* num_classes = nullptr);

// Summary schema: {"num_classes": C, "methods": {name: {"seeds": [...],
// "macro_overall"/"macro_head"/"macro_mid"/"macro_tail":
// {"per_seed": [...], "mean": x, "std": s}}}}. Stats are client-macro
// averages recomputed from the client rows; std is the sample standard
// deviation across seeds.
void write_summary_json(const std::vector<MetricsRecord>& records, int num_classes,
                        const std::filesystem::path& path);

void emit_report(const std::vector<MetricsRecord>& records, int num_classes,
                 const std::filesystem::path& csv_path, const std::filesystem::path& json_path);

}  // namespace ecl::eval
