#include "condiv/kernels.hpp"

#include <cmath>

namespace condiv {
namespace losses {

void SimilarityKernel::validate() const {
  if (kind == KernelKind::Gaussian && !(sigma > 0.0)) {
    throw Error(ErrorKind::Value, "gaussian kernel requires sigma > 0");
  }
  if (kind == KernelKind::Arccot && !(alpha > 0.0)) {
    throw Error(ErrorKind::Value, "arccot kernel requires alpha > 0");
  }
}

KernelKind parse_kernel_kind(const std::string& name) {
  if (name == "gaussian") return KernelKind::Gaussian;
  if (name == "inverse") return KernelKind::Inverse;
  if (name == "sqrt-complement") return KernelKind::SqrtComplement;
  if (name == "max-normalized") return KernelKind::MaxNormalized;
  if (name == "arccot") return KernelKind::Arccot;
  throw Error(ErrorKind::Usage, "unknown kernel kind: " + name);
}

std::string kernel_kind_name(KernelKind kind) {
  switch (kind) {
    case KernelKind::Gaussian: return "gaussian";
    case KernelKind::Inverse: return "inverse";
    case KernelKind::SqrtComplement: return "sqrt-complement";
    case KernelKind::MaxNormalized: return "max-normalized";
    case KernelKind::Arccot: return "arccot";
  }
  return "?";
}

Tensor apply_kernel(const SimilarityKernel& kernel, const Tensor& divergences) {
  kernel.validate();
  const Tensor& d = divergences;
  switch (kernel.kind) {
    case KernelKind::Gaussian:
      return exp(d * (-1.0 / (2.0 * kernel.sigma * kernel.sigma)));
    case KernelKind::Inverse:
      return 1.0 / (d + 1.0);
    case KernelKind::SqrtComplement:
      for (double v : d.data()) {
        if (v > 1.0) {
          throw Error(ErrorKind::Domain,
                      "sqrt-complement kernel requires divergences <= 1");
        }
      }
      return sqrt(1.0 - d);
    case KernelKind::MaxNormalized: {
      double peak = 0.0;
      for (double v : d.data()) peak = std::max(peak, v);
      if (peak == 0.0) {
        // All-zero divergence matrix: define psi == 1 to avoid 0/0.
        return Tensor::full(d.shape(), 1.0);
      }
      return 1.0 - d / max_all(d);
    }
    case KernelKind::Arccot:
      // arccot(x) = pi/2 - atan(x) on x >= 0
      return 1.5707963267948966 - atan(d * kernel.alpha);
  }
  throw Error(ErrorKind::Value, "unreachable kernel kind");
}

double kernel_value(const SimilarityKernel& kernel, double divergence,
                    double matrix_max) {
  kernel.validate();
  switch (kernel.kind) {
    case KernelKind::Gaussian:
      return std::exp(-divergence / (2.0 * kernel.sigma * kernel.sigma));
    case KernelKind::Inverse:
      return 1.0 / (1.0 + divergence);
    case KernelKind::SqrtComplement:
      if (divergence > 1.0) {
        throw Error(ErrorKind::Domain,
                    "sqrt-complement kernel requires divergences <= 1");
      }
      return std::sqrt(1.0 - divergence);
    case KernelKind::MaxNormalized:
      return matrix_max == 0.0 ? 1.0 : 1.0 - divergence / matrix_max;
    case KernelKind::Arccot:
      return 1.5707963267948966 - std::atan(kernel.alpha * divergence);
  }
  throw Error(ErrorKind::Value, "unreachable kernel kind");
}

}  // namespace losses
}  // namespace condiv
