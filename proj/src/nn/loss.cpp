#include "ecl/nn/loss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ecl::nn {

namespace {

void check_batch(const Mat& logits, const std::vector<int>& labels) {
  if (logits.rows == 0) throw std::invalid_argument("loss: empty batch");
  if (labels.size() != logits.rows) throw std::invalid_argument("loss: labels/batch size mismatch");
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= logits.cols) {
      throw std::invalid_argument("loss: label out of range");
    }
  }
  for (double v : logits.a) {
    if (!std::isfinite(v)) throw std::domain_error("loss: non-finite logit");
  }
}

}  // namespace

Mat softmax_rows(const Mat& logits) {
  Mat p(logits.rows, logits.cols);
  for (std::size_t i = 0; i < logits.rows; ++i) {
    const double* zi = logits.row(i);
    double* pi = p.row(i);
    const double m = *std::max_element(zi, zi + logits.cols);
    double sum = 0.0;
    for (std::size_t j = 0; j < logits.cols; ++j) {
      pi[j] = std::exp(zi[j] - m);
      sum += pi[j];
    }
    for (std::size_t j = 0; j < logits.cols; ++j) pi[j] /= sum;
  }
  return p;
}

LossResult ce_loss(const Mat& logits, const std::vector<int>& labels) {
  check_batch(logits, labels);
  const double inv_b = 1.0 / static_cast<double>(logits.rows);
  LossResult r;
  r.dlogits = Mat(logits.rows, logits.cols);
  for (std::size_t i = 0; i < logits.rows; ++i) {
    const double* zi = logits.row(i);
    double* di = r.dlogits.row(i);
    const double m = *std::max_element(zi, zi + logits.cols);
    double sum = 0.0;
    for (std::size_t j = 0; j < logits.cols; ++j) sum += std::exp(zi[j] - m);
    const double lse = m + std::log(sum);
    r.loss += (lse - zi[labels[i]]) * inv_b;
    for (std::size_t j = 0; j < logits.cols; ++j) {
      di[j] = std::exp(zi[j] - lse) * inv_b;
    }
    di[labels[i]] -= inv_b;
  }
  return r;
}

LossResult bsce_loss(const Mat& logits, const std::vector<int>& labels,
                     const std::vector<long>& class_counts) {
  check_batch(logits, labels);
  if (class_counts.size() != logits.cols) {
    throw std::invalid_argument("bsce_loss: class_counts size mismatch");
  }
  for (long n : class_counts) {
    if (n < 0) throw std::invalid_argument("bsce_loss: negative class count");
  }
  for (int y : labels) {
    if (class_counts[y] <= 0) throw std::domain_error("bsce_loss: zero count for a present label");
  }
  std::vector<double> log_n(class_counts.size(), 0.0);
  for (std::size_t j = 0; j < class_counts.size(); ++j) {
    if (class_counts[j] > 0) log_n[j] = std::log(static_cast<double>(class_counts[j]));
  }

  const double inv_b = 1.0 / static_cast<double>(logits.rows);
  LossResult r;
  r.dlogits = Mat(logits.rows, logits.cols);
  for (std::size_t i = 0; i < logits.rows; ++i) {
    const double* zi = logits.row(i);
    double* di = r.dlogits.row(i);
    // Work on shifted scores z_j + log n_j over present classes only.
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < logits.cols; ++j) {
      if (class_counts[j] > 0) m = std::max(m, zi[j] + log_n[j]);
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < logits.cols; ++j) {
      if (class_counts[j] > 0) sum += std::exp(zi[j] + log_n[j] - m);
    }
    const double lse = m + std::log(sum);
    r.loss += (lse - (zi[labels[i]] + log_n[labels[i]])) * inv_b;
    for (std::size_t j = 0; j < logits.cols; ++j) {
      di[j] = class_counts[j] > 0 ? std::exp(zi[j] + log_n[j] - lse) * inv_b : 0.0;
    }
    di[labels[i]] -= inv_b;
  }
  return r;
}

}  // namespace ecl::nn
