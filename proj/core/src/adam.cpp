#include "condiv/adam.hpp"

#include <cmath>

namespace condiv {

void Adam::step(ParamGraph& params) {
  std::vector<ParamGraph::Entry*> trainables;
  for (auto& e : params.entries())
    if (e.trainable) trainables.push_back(&e);

  if (m_.empty()) {
    m_.resize(trainables.size());
    v_.resize(trainables.size());
    for (std::size_t i = 0; i < trainables.size(); ++i) {
      m_[i].assign(trainables[i]->tensor.numel(), 0.0);
      v_[i].assign(trainables[i]->tensor.numel(), 0.0);
    }
  } else if (m_.size() != trainables.size()) {
    throw Error(ErrorKind::State, "optimizer state does not match parameters");
  }

  for (auto* e : trainables) {
    if (!e->tensor.has_grad()) {
      throw Error(ErrorKind::State,
                  "adam_step: missing gradient for parameter " + e->name);
    }
  }

  ++step_;
  const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_));

  for (std::size_t i = 0; i < trainables.size(); ++i) {
    auto& tensor = trainables[i]->tensor;
    auto& value = tensor.mutable_data();
    auto& grad = tensor.node()->grad;
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t j = 0; j < value.size(); ++j) {
      const double g = grad[j] + config_.weight_decay * value[j];
      m[j] = config_.beta1 * m[j] + (1.0 - config_.beta1) * g;
      v[j] = config_.beta2 * v[j] + (1.0 - config_.beta2) * g * g;
      const double m_hat = m[j] / bc1;
      const double v_hat = v[j] / bc2;
      value[j] -= config_.lr * m_hat / (std::sqrt(v_hat) + config_.eps);
    }
    check_finite("adam_step", value);
    tensor.zero_grad();
  }
}

}  // namespace condiv
