#include "ecl/nn/train.hpp"

#include <limits>
#include <stdexcept>

#include "ecl/rng.hpp"

namespace ecl::nn {

double train_epochs(ModelParams& model, const Mat& xs, const std::vector<int>& ys,
                    const std::vector<long>& class_counts, int epochs, LossKind kind,
                    std::size_t batch_size, OptState& opt, std::uint64_t shuffle_seed) {
  const std::size_t n = xs.rows;
  if (n == 0) throw std::invalid_argument("train_epochs: empty dataset");
  if (ys.size() != n) throw std::invalid_argument("train_epochs: labels size mismatch");
  if (batch_size == 0) throw std::invalid_argument("train_epochs: batch_size must be >= 1");
  if (epochs < 0) throw std::invalid_argument("train_epochs: negative epoch count");

  double epoch_loss = std::numeric_limits<double>::quiet_NaN();
  for (int e = 0; e < epochs; ++e) {
    rng::Rng g(rng::derive_seed(shuffle_seed, "epoch", static_cast<std::uint64_t>(e)));
    const std::vector<std::size_t> order = rng::shuffled_indices(n, g);

    double loss_sum = 0.0;
    for (std::size_t start = 0; start < n; start += batch_size) {
      const std::size_t b = std::min(batch_size, n - start);
      Mat bx(b, xs.cols);
      std::vector<int> by(b);
      for (std::size_t i = 0; i < b; ++i) {
        const std::size_t src = order[start + i];
        const double* row = xs.row(src);
        for (std::size_t j = 0; j < xs.cols; ++j) bx(i, j) = row[j];
        by[i] = ys[src];
      }
      ForwardCache cache;
      const Mat logits = forward(model, bx, &cache);
      const LossResult lr = kind == LossKind::cross_entropy
                                ? ce_loss(logits, by)
                                : bsce_loss(logits, by, class_counts);
      const Gradients grads = backward(model, cache, lr.dlogits);
      sgd_step(model, grads, opt);
      loss_sum += lr.loss * static_cast<double>(b);
    }
    epoch_loss = loss_sum / static_cast<double>(n);
  }
  return epoch_loss;
}

}  // namespace ecl::nn
