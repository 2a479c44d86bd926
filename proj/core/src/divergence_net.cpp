#include "condiv/divergence_net.hpp"

namespace condiv {
namespace bregman {

DeepDivergenceNet::DeepDivergenceNet(std::size_t embed_dim, std::size_t kappa,
                                     std::vector<std::size_t> hidden_widths,
                                     bool use_batch_norm,
                                     const std::string& name,
                                     ParamGraph& params, Rng& rng)
    : embed_dim_(embed_dim), kappa_(kappa), use_batch_norm_(use_batch_norm) {
  if (kappa == 0) {
    throw Error(ErrorKind::Value, "DeepDivergenceNet: kappa must be >= 1");
  }
  std::vector<std::size_t> widths = std::move(hidden_widths);
  widths.push_back(1);  // scalar head

  subnet_layers_.resize(kappa);
  subnet_norms_.resize(kappa);
  for (std::size_t d = 0; d < kappa; ++d) {
    std::size_t in = embed_dim;
    for (std::size_t l = 0; l < widths.size(); ++l) {
      const std::string layer_name =
          name + "/" + std::to_string(d) + "/l" + std::to_string(l);
      subnet_layers_[d].emplace_back(in, widths[l], layer_name, params, rng);
      if (use_batch_norm_ && l + 1 < widths.size()) {
        subnet_norms_[d].emplace_back(widths[l], layer_name + "/bn", params);
      }
      in = widths[l];
    }
  }
}

Tensor DeepDivergenceNet::forward(const Tensor& z, bool training,
                                  bool update_stats) {
  if (z.ndim() != 2 || z.cols() != embed_dim_) {
    throw_shape_error("divergence_net", z.shape(), {0, embed_dim_});
  }
  std::vector<Tensor> columns;
  columns.reserve(kappa_);
  for (std::size_t d = 0; d < kappa_; ++d) {
    Tensor h = z;
    for (std::size_t l = 0; l < subnet_layers_[d].size(); ++l) {
      h = subnet_layers_[d][l].forward(h);
      if (use_batch_norm_ && l < subnet_norms_[d].size()) {
        h = subnet_norms_[d][l].forward(h, training, update_stats);
      }
    }
    columns.push_back(h);  // (n,1)
  }
  return concat(columns, 1);
}

PhiHatResult phi_hat(DeepDivergenceNet& net, const Tensor& z) {
  Tensor outputs = net.forward(z);
  MaxResult max = max_axis(outputs, 1);
  return {max.values, std::move(max.indices)};
}

Tensor deep_divergence(const Tensor& o1, const Tensor& o2) {
  if (o1.ndim() != 2 || o2.ndim() != 2 || o1.cols() != o2.cols()) {
    throw_shape_error("deep_divergence", o1.shape(), o2.shape());
  }
  if (o1.rows() != o2.rows()) {
    throw_shape_error("deep_divergence", o1.shape(), o2.shape());
  }

  MaxResult p_star = max_axis(o1, 1);
  MaxResult q_star = max_axis(o2, 1);

  // Row maxima of o1, broadcast across columns, minus o1 gathered at the
  // other view's argmax columns. Using the max_axis values (rather than a
  // second gather) keeps the subgradient routing in one place.
  const std::size_t n = o1.rows();
  Tensor own = reshape(p_star.values, {n, 1});
  Tensor cross = gather_cols(o1, q_star.indices);
  return sub(own, cross);
}

ConvexityReport convexity_check(DeepDivergenceNet& net, std::size_t trials,
                                Rng& rng, double point_scale) {
  if (net.uses_batch_norm()) {
    throw Error(ErrorKind::State,
                "convexity_check requires batch norm off; with batch norm the "
                "generating function is not a per-sample map");
  }
  constexpr double kTol = 1e-10;
  const std::size_t d = net.embed_dim();

  ConvexityReport report;
  report.trials = trials;
  for (std::size_t t = 0; t < trials; ++t) {
    std::vector<double> rows(3 * d);
    for (std::size_t j = 0; j < d; ++j) rows[j] = rng.normal() * point_scale;
    for (std::size_t j = 0; j < d; ++j)
      rows[d + j] = rng.normal() * point_scale;
    const double lambda = rng.uniform();
    for (std::size_t j = 0; j < d; ++j)
      rows[2 * d + j] = lambda * rows[j] + (1.0 - lambda) * rows[d + j];

    PhiHatResult r = phi_hat(net, Tensor::from_data({3, d}, std::move(rows)));
    const double phi_a = r.values.data()[0];
    const double phi_b = r.values.data()[1];
    const double phi_mid = r.values.data()[2];
    const double gap = phi_mid - (lambda * phi_a + (1.0 - lambda) * phi_b);
    if (gap > kTol) {
      ++report.violations;
      if (gap > report.max_violation) report.max_violation = gap;
    }
  }
  return report;
}

}  // namespace bregman
}  // namespace condiv
