#pragma once

#include <functional>
#include <string>
#include <vector>

#include "condiv/param_graph.hpp"

namespace condiv {

struct GradCheckFailure {
  std::string param;
  std::size_t index;
  double analytic;
  double numeric;
  double rel_error;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::vector<GradCheckFailure> failures;

  bool passed() const { return failures.empty(); }
};

// Central-difference check of reverse-mode gradients. `f` must be a
// deterministic scalar function of the registered parameters; it is invoked
// once for the analytic pass and twice per trainable scalar for the numeric
// pass. Relative error uses max(|analytic|, |numeric|, 1e-8) in the
// denominator. A failing entry lands in the report; nothing throws.
GradCheckReport grad_check(const std::function<Tensor()>& f,
                           ParamGraph& params, double step = 1e-5,
                           double tol = 1e-4);

}  // namespace condiv
