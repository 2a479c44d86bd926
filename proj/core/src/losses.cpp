#include "condiv/losses.hpp"

#include <cmath>
#include <numeric>

namespace condiv {
namespace losses {

Tensor cosine_sim_matrix(const Tensor& z) {
  if (z.ndim() != 2) throw_shape_error("cosine_sim_matrix", "input not 2-D");
  const std::size_t n = z.rows(), d = z.cols();
  for (std::size_t i = 0; i < n; ++i) {
    double sq = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double v = z.data()[i * d + j];
      sq += v * v;
    }
    if (!(std::sqrt(sq) > 1e-12)) {
      throw Error(ErrorKind::Value,
                  "cosine_sim_matrix: row " + std::to_string(i) +
                      " has (near-)zero norm");
    }
  }
  Tensor normalized = div(z, norm_rows(z));
  return matmul(normalized, transpose(normalized));
}

namespace {

// Row-wise -log softmax(target | logits) with a max shift for stability.
// `exclude_self` removes the diagonal term from each denominator.
Tensor softmax_nll_rows(const Tensor& logits,
                        const std::vector<std::size_t>& targets,
                        bool exclude_self) {
  const std::size_t n = logits.rows();
  MaxResult shift = max_axis(logits, 1);
  Tensor shifted = sub(logits, reshape(shift.values, {n, 1}));
  Tensor expd = exp(shifted);
  Tensor denom = sum_axis(expd, 1);
  if (exclude_self) {
    std::vector<std::size_t> diag(n);
    std::iota(diag.begin(), diag.end(), std::size_t{0});
    denom = sub(denom, take_per_row(expd, diag));
  }
  Tensor pos = take_per_row(logits, targets);
  return add(log(denom), sub(shift.values, pos));
}

}  // namespace

Tensor nt_xent(const Tensor& z1, const Tensor& z2, double tau) {
  if (!(tau > 0.0)) {
    throw Error(ErrorKind::Value, "nt_xent: tau must be > 0");
  }
  if (z1.ndim() != 2 || z2.ndim() != 2 || z1.shape() != z2.shape()) {
    throw_shape_error("nt_xent", z1.shape(), z2.shape());
  }
  const std::size_t n = z1.rows();
  if (n == 0) throw Error(ErrorKind::Value, "nt_xent: empty batch");
  if (n == 1) {
    // A single pair has no negatives: the denominator equals the positive
    // term, so the loss and its gradient are identically zero.
    return Tensor::scalar(0.0);
  }

  Tensor sims = cosine_sim_matrix(concat({z1, z2}, 0));
  Tensor logits = sims * (1.0 / tau);

  std::vector<std::size_t> positives(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    positives[i] = i + n;
    positives[i + n] = i;
  }
  return mean_all(softmax_nll_rows(logits, positives, /*exclude_self=*/true));
}

Tensor divergence_loss(const Tensor& psi, std::optional<double> temperature) {
  if (psi.ndim() != 2 || psi.rows() != psi.cols()) {
    throw_shape_error("divergence_loss", "expected a square matrix, got " +
                                             shape_to_string(psi.shape()));
  }
  const std::size_t n = psi.rows();
  if (n == 0) throw Error(ErrorKind::Value, "divergence_loss: empty batch");
  if (temperature && !(*temperature > 0.0)) {
    throw Error(ErrorKind::Value, "divergence_loss: temperature must be > 0");
  }
  if (n == 1) {
    // The denominator is exactly the positive term.
    return Tensor::scalar(0.0);
  }

  Tensor logits = temperature ? psi * (1.0 / *temperature) : psi;
  std::vector<std::size_t> diagonal(n);
  std::iota(diagonal.begin(), diagonal.end(), std::size_t{0});
  return mean_all(
      softmax_nll_rows(logits, diagonal, /*exclude_self=*/false));
}

LossBreakdown total_loss(double contrastive, double divergence) {
  if (!std::isfinite(contrastive) || !std::isfinite(divergence)) {
    throw Error(ErrorKind::Value, "total_loss: non-finite addend");
  }
  return {contrastive, divergence, contrastive + divergence};
}

}  // namespace losses
}  // namespace condiv
