#pragma once
// Inference-time logit scaling and expert/global combination.

#include <vector>

#include "ecl/data/grouping.hpp"
#include "ecl/nn/model.hpp"

namespace ecl::expert {

enum class ScalingScheme { ecl_scaling, no_scaling };

// How the classifier-weight norms entering the scale factor are taken:
// per-class rows (default) or the whole classifier matrix.
enum class NormMode { per_class_row, whole_matrix };

struct AggregatedLogits {
  std::vector<double> logits;   // one per class
  std::vector<int> provenance;  // owning expert index, or -1 for global-only
};

// Squared L2 norms of the classifier weight rows (bias excluded).
std::vector<double> classifier_row_sq_norms(const nn::ModelParams& model);
double classifier_matrix_sq_norm(const nn::ModelParams& model);

// z_bar = (||u||^2 / ||u0||^2) * z. The global norm must be positive.
double scale_logit(double z, double expert_sq_norm, double global_sq_norm);

// Per class: lambda * z_bar + (1 - lambda) * z0 where an expert owns the
// class, plain z0 otherwise. zbar entries of unowned classes are ignored.
AggregatedLogits aggregate_logits(const std::vector<double>& zbar, const std::vector<double>& z0,
                                  double lambda, const data::ExpertAssignment& assignment);

// Lowest index wins ties.
int argmax_class(const std::vector<double>& logits);

}  // namespace ecl::expert
