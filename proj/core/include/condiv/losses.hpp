#pragma once

#include <optional>

#include "condiv/kernels.hpp"
#include "condiv/ops.hpp"

namespace condiv {
namespace losses {

// Cosine similarity matrix of the 2n stacked embeddings. Symmetric, unit
// diagonal up to rounding; rows with norm <= 1e-12 are rejected.
Tensor cosine_sim_matrix(const Tensor& z);

// Normalized-temperature cross-entropy over the concatenated batch
// [z1; z2]: positives are the pairs (i, i+n) and (i+n, i), each per-pair
// denominator runs over the other 2n-1 rows, and the result averages the 2n
// ordered-pair losses. n == 1 has no negatives and the loss is identically
// zero (returned as an exact constant).
Tensor nt_xent(const Tensor& z1, const Tensor& z2, double tau);

// Softmax cross-entropy over a similarity matrix whose diagonal holds the
// positive pairs. Row i contributes -log(exp(psi_ii) / sum_m exp(psi_im));
// the denominator includes the positive term. No temperature is applied
// unless one is passed. n == 1 is identically zero.
Tensor divergence_loss(const Tensor& psi,
                       std::optional<double> temperature = std::nullopt);

struct LossBreakdown {
  double contrastive = 0.0;
  double divergence = 0.0;
  double total = 0.0;
};

// total = contrastive + divergence, unit weights.
LossBreakdown total_loss(double contrastive, double divergence);

}  // namespace losses
}  // namespace condiv
