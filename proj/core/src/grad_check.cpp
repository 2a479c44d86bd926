#include "condiv/grad_check.hpp"

#include <algorithm>
#include <cmath>

namespace condiv {

GradCheckReport grad_check(const std::function<Tensor()>& f,
                           ParamGraph& params, double step, double tol) {
  if (!(step > 0.0) || step > 1e-3) {
    throw Error(ErrorKind::Value, "grad_check: step must be in (0, 1e-3]");
  }

  params.zero_grads();
  Tensor loss = f();
  backward(loss, params);

  // Snapshot analytic grads before the numeric pass perturbs anything.
  std::vector<std::vector<double>> analytic;
  std::vector<ParamGraph::Entry*> trainables;
  for (auto& e : params.entries()) {
    if (!e.trainable) continue;
    trainables.push_back(&e);
    analytic.push_back(e.tensor.grad());
  }

  GradCheckReport report;
  for (std::size_t t = 0; t < trainables.size(); ++t) {
    auto& value = trainables[t]->tensor.mutable_data();
    for (std::size_t j = 0; j < value.size(); ++j) {
      const double original = value[j];
      value[j] = original + step;
      const double f_plus = f().value();
      value[j] = original - step;
      const double f_minus = f().value();
      value[j] = original;

      const double numeric = (f_plus - f_minus) / (2.0 * step);
      const double a = analytic[t][j];
      const double denom = std::max({std::fabs(a), std::fabs(numeric), 1e-8});
      const double rel = std::fabs(a - numeric) / denom;
      report.max_rel_error = std::max(report.max_rel_error, rel);
      ++report.checked;
      if (rel >= tol) {
        report.failures.push_back({trainables[t]->name, j, a, numeric, rel});
      }
    }
  }

  params.zero_grads();
  return report;
}

}  // namespace condiv
