#pragma once

#include <optional>
#include <string>
#include <vector>

#include "condiv/layers.hpp"

namespace condiv {
namespace bregman {

// kappa independent affine stacks, each mapping an embedding to one scalar.
// There is deliberately no activation between the layers: with batch norm
// off each subnetwork collapses to a single affine map per sample, so the
// row-wise max of the outputs is a convex (max-affine) generating function.
// The factored parameterization is kept because it changes optimization
// dynamics even though it is affinely equivalent.
//
// An optional batch-norm flag inserts batch norm between the affine layers;
// train-mode batch statistics couple the samples and break per-sample
// convexity, so it stays off by default.
class DeepDivergenceNet {
 public:
  DeepDivergenceNet(std::size_t embed_dim, std::size_t kappa,
                    std::vector<std::size_t> hidden_widths,
                    bool use_batch_norm, const std::string& name,
                    ParamGraph& params, Rng& rng);

  // Batch of embeddings (n, embed_dim) -> subnetwork outputs (n, kappa).
  Tensor forward(const Tensor& z, bool training = false,
                 bool update_stats = false);

  std::size_t kappa() const { return kappa_; }
  std::size_t embed_dim() const { return embed_dim_; }
  bool uses_batch_norm() const { return use_batch_norm_; }

 private:
  std::size_t embed_dim_, kappa_;
  bool use_batch_norm_;
  std::vector<std::vector<Linear>> subnet_layers_;     // [kappa][depth]
  std::vector<std::vector<BatchNorm1d>> subnet_norms_; // [kappa][depth-1]
};

struct PhiHatResult {
  Tensor values;                     // (n) generating-function values
  std::vector<std::size_t> indices;  // per-row argmax, ties to lowest index
};

// Generating function phi_hat(z) = max_d subnet_d(z), the sup-of-linear
// functional evaluated on an empirical point mass at each row.
PhiHatResult phi_hat(DeepDivergenceNet& net, const Tensor& z);

// Pairwise divergence matrix from precomputed subnetwork outputs:
// entry (i,j) = o1[i][p*_i] - o1[i][q*_j] with p*_i the argmax of row o1[i]
// and q*_j the argmax of row o2[j]. Non-negative by construction, exactly
// zero where the argmax indices agree, and asymmetric in general. Gradient
// flows only through the gathered entries of o1; the argmax indices are
// piecewise constant.
Tensor deep_divergence(const Tensor& o1, const Tensor& o2);

struct ConvexityReport {
  std::size_t trials = 0;
  std::size_t violations = 0;
  double max_violation = 0.0;  // largest positive gap above the tolerance

  bool passed() const { return violations == 0; }
};

// Midpoint test of phi_hat's convexity on random embedding pairs with
// lambda ~ U(0,1): a violation is
// phi_hat(lerp) > lambda*phi_hat(a) + (1-lambda)*phi_hat(b) + 1e-10.
// Requires batch norm off (otherwise phi_hat is not a per-sample function).
ConvexityReport convexity_check(DeepDivergenceNet& net, std::size_t trials,
                                Rng& rng, double point_scale = 2.0);

}  // namespace bregman
}  // namespace condiv
