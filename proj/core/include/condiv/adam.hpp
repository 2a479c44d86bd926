#pragma once

#include <cstdint>
#include <vector>

#include "condiv/param_graph.hpp"

namespace condiv {

struct AdamConfig {
  double lr = 0.005;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double weight_decay = 0.0001;
  double eps = 1e-8;
};

// Adam with L2 weight decay folded into the gradient (grad += wd * param)
// before the moment updates. Grads are zeroed after each step.
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  const AdamConfig& config() const { return config_; }
  void set_config(const AdamConfig& config) { config_ = config; }
  double learning_rate() const { return config_.lr; }
  void set_learning_rate(double lr) { config_.lr = lr; }

  std::int64_t step_count() const { return step_; }

  void step(ParamGraph& params);

  // Moment access for checkpointing; rows align with trainable entries in
  // registry order.
  std::vector<std::vector<double>>& first_moments() { return m_; }
  std::vector<std::vector<double>>& second_moments() { return v_; }
  void restore(std::int64_t step, std::vector<std::vector<double>> m,
               std::vector<std::vector<double>> v) {
    step_ = step;
    m_ = std::move(m);
    v_ = std::move(v);
  }

 private:
  AdamConfig config_;
  std::int64_t step_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

}  // namespace condiv
