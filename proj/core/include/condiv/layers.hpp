#pragma once

#include <cmath>
#include <string>

#include "condiv/ops.hpp"
#include "condiv/param_graph.hpp"
#include "condiv/rng.hpp"

namespace condiv {

// Weights and biases initialized uniformly in +-1/sqrt(fan_in).
inline Tensor init_uniform(Shape shape, std::size_t fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::vector<double> data(shape_numel(shape));
  for (double& v : data) v = rng.uniform(-bound, bound);
  return Tensor::from_data(std::move(shape), std::move(data));
}

// y = x.W + b with W (in,out), b (out).
class Linear {
 public:
  Linear(std::size_t in_dim, std::size_t out_dim, const std::string& name,
         ParamGraph& params, Rng& rng)
      : in_dim_(in_dim), out_dim_(out_dim) {
    weight_ = params.add(name + "/w",
                         init_uniform({in_dim, out_dim}, in_dim, rng));
    bias_ = params.add(name + "/b", init_uniform({out_dim}, in_dim, rng));
  }

  Tensor forward(const Tensor& x) const { return add(matmul(x, weight_), bias_); }

  std::size_t in_dim() const { return in_dim_; }
  std::size_t out_dim() const { return out_dim_; }
  const Tensor& weight() const { return weight_; }
  const Tensor& bias() const { return bias_; }

 private:
  std::size_t in_dim_, out_dim_;
  Tensor weight_, bias_;
};

// 1-D batch norm over the batch axis. Training mode normalizes with batch
// statistics (kept on the tape, so gradients through the statistics are
// exact); inference mode uses the running estimates as constants. The
// running estimates are non-trainable registry entries updated in place
// with momentum 0.1, using the unbiased variance as is conventional.
class BatchNorm1d {
 public:
  BatchNorm1d(std::size_t dim, const std::string& name, ParamGraph& params,
              double momentum = 0.1, double eps = 1e-5)
      : dim_(dim), momentum_(momentum), eps_(eps) {
    gamma_ = params.add(name + "/gamma", Tensor::full({dim}, 1.0));
    beta_ = params.add(name + "/beta", Tensor::zeros({dim}));
    running_mean_ =
        params.add(name + "/running_mean", Tensor::zeros({dim}), false);
    running_var_ =
        params.add(name + "/running_var", Tensor::full({dim}, 1.0), false);
  }

  Tensor forward(const Tensor& x, bool training, bool update_stats) {
    if (x.ndim() != 2 || x.cols() != dim_) {
      throw_shape_error("batch_norm", x.shape(), {0, dim_});
    }
    if (!training) {
      std::vector<double> inv_std(dim_);
      for (std::size_t j = 0; j < dim_; ++j)
        inv_std[j] = 1.0 / std::sqrt(running_var_.data()[j] + eps_);
      Tensor centered = sub(x, Tensor::from_data({dim_}, running_mean_.data()));
      Tensor x_hat = mul(centered, Tensor::from_data({dim_}, inv_std));
      return add(mul(x_hat, gamma_), beta_);
    }

    const std::size_t n = x.rows();
    Tensor mu = mean_axis(x, 0);
    Tensor centered = sub(x, mu);
    Tensor var = mean_axis(mul(centered, centered), 0);
    Tensor x_hat = div(centered, sqrt(add(var, Tensor::scalar(eps_))));
    Tensor out = add(mul(x_hat, gamma_), beta_);

    if (update_stats) {
      auto& rm = running_mean_.mutable_data();
      auto& rv = running_var_.mutable_data();
      const double unbias =
          n > 1 ? static_cast<double>(n) / static_cast<double>(n - 1) : 1.0;
      for (std::size_t j = 0; j < dim_; ++j) {
        rm[j] = (1.0 - momentum_) * rm[j] + momentum_ * mu.data()[j];
        rv[j] = (1.0 - momentum_) * rv[j] + momentum_ * var.data()[j] * unbias;
      }
    }
    return out;
  }

  std::size_t dim() const { return dim_; }

 private:
  std::size_t dim_;
  double momentum_, eps_;
  Tensor gamma_, beta_, running_mean_, running_var_;
};

}  // namespace condiv
