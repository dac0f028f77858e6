#pragma once
// Row-major dense matrix over double, plus the three product shapes the
// feed-forward engine needs.

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace ecl::nn {

struct Mat {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), a(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

  double* row(std::size_t i) { return a.data() + i * cols; }
  const double* row(std::size_t i) const { return a.data() + i * cols; }

  std::size_t size() const { return a.size(); }
  bool operator==(const Mat&) const = default;
};

// out = x * w^T + b, with x: B x in, w: out_dim x in, b: out_dim.
inline void affine_forward(const Mat& x, const Mat& w, const std::vector<double>& b, Mat& out) {
  if (x.cols != w.cols) throw std::invalid_argument("affine_forward: inner dimension mismatch");
  if (b.size() != w.rows) throw std::invalid_argument("affine_forward: bias size mismatch");
  out = Mat(x.rows, w.rows);
  for (std::size_t i = 0; i < x.rows; ++i) {
    const double* xi = x.row(i);
    double* oi = out.row(i);
    for (std::size_t o = 0; o < w.rows; ++o) {
      const double* wo = w.row(o);
      double acc = b[o];
      for (std::size_t k = 0; k < x.cols; ++k) acc += xi[k] * wo[k];
      oi[o] = acc;
    }
  }
}

// dw = dz^T * x, with dz: B x out, x: B x in -> dw: out x in.
inline void matmul_at_b(const Mat& dz, const Mat& x, Mat& dw) {
  if (dz.rows != x.rows) throw std::invalid_argument("matmul_at_b: batch mismatch");
  dw = Mat(dz.cols, x.cols);
  for (std::size_t i = 0; i < dz.rows; ++i) {
    const double* dzi = dz.row(i);
    const double* xi = x.row(i);
    for (std::size_t o = 0; o < dz.cols; ++o) {
      const double d = dzi[o];
      if (d == 0.0) continue;
      double* dwo = dw.row(o);
      for (std::size_t k = 0; k < x.cols; ++k) dwo[k] += d * xi[k];
    }
  }
}

// dh = dz * w, with dz: B x out, w: out x in -> dh: B x in.
inline void matmul_a_b(const Mat& dz, const Mat& w, Mat& dh) {
  if (dz.cols != w.rows) throw std::invalid_argument("matmul_a_b: inner dimension mismatch");
  dh = Mat(dz.rows, w.cols);
  for (std::size_t i = 0; i < dz.rows; ++i) {
    const double* dzi = dz.row(i);
    double* dhi = dh.row(i);
    for (std::size_t o = 0; o < w.rows; ++o) {
      const double d = dzi[o];
      if (d == 0.0) continue;
      const double* wo = w.row(o);
      for (std::size_t k = 0; k < w.cols; ++k) dhi[k] += d * wo[k];
    }
  }
}

inline std::vector<double> column_sums(const Mat& m) {
  std::vector<double> s(m.cols, 0.0);
  for (std::size_t i = 0; i < m.rows; ++i) {
    const double* mi = m.row(i);
    for (std::size_t j = 0; j < m.cols; ++j) s[j] += mi[j];
  }
  return s;
}

}  // namespace ecl::nn
