#include "ecl/expert/inference.hpp"

#include <stdexcept>

namespace ecl::expert {

std::vector<double> classifier_row_sq_norms(const nn::ModelParams& model) {
  const nn::Mat& w = model.classifier.w;
  std::vector<double> norms(w.rows, 0.0);
  for (std::size_t c = 0; c < w.rows; ++c) {
    const double* row = w.row(c);
    for (std::size_t j = 0; j < w.cols; ++j) norms[c] += row[j] * row[j];
  }
  return norms;
}

double classifier_matrix_sq_norm(const nn::ModelParams& model) {
  double sq = 0.0;
  for (double v : model.classifier.w.a) sq += v * v;
  return sq;
}

double scale_logit(double z, double expert_sq_norm, double global_sq_norm) {
  if (!(global_sq_norm > 0.0)) {
    throw std::domain_error("scale_logit: global classifier row has zero norm");
  }
  return expert_sq_norm / global_sq_norm * z;
}

AggregatedLogits aggregate_logits(const std::vector<double>& zbar, const std::vector<double>& z0,
                                  double lambda, const data::ExpertAssignment& assignment) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw std::invalid_argument("aggregate_logits: lambda must be in [0, 1]");
  }
  if (zbar.size() != z0.size() || assignment.owners.size() != z0.size()) {
    throw std::invalid_argument("aggregate_logits: per-class size mismatch");
  }
  AggregatedLogits out;
  out.logits.resize(z0.size());
  out.provenance.resize(z0.size());
  for (std::size_t c = 0; c < z0.size(); ++c) {
    const int owner = assignment.owners[c];
    out.provenance[c] = owner;
    out.logits[c] = owner >= 0 ? lambda * zbar[c] + (1.0 - lambda) * z0[c] : z0[c];
  }
  return out;
}

int argmax_class(const std::vector<double>& logits) {
  if (logits.empty()) throw std::invalid_argument("argmax_class: empty logits");
  std::size_t best = 0;
  for (std::size_t c = 1; c < logits.size(); ++c) {
    if (logits[c] > logits[best]) best = c;
  }
  return static_cast<int>(best);
}

}  // namespace ecl::expert
