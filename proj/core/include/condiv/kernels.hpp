#pragma once

#include <string>

#include "condiv/ops.hpp"

namespace condiv {
namespace losses {

enum class KernelKind {
  Gaussian,       // psi(D) = exp(-D / (2 sigma^2))
  Inverse,        // psi(D) = 1 / (1 + D)
  SqrtComplement, // psi(D) = sqrt(1 - D), D in [0,1]
  MaxNormalized,  // psi(D) = 1 - D / max(D) over the given matrix
  Arccot,         // psi(D) = arccot(alpha D)
};

// A strictly monotone decreasing map from divergences to similarities. Every
// kind maps D = 0 to its largest value; the max-normalized kind degrades to
// the constant 1 when the whole matrix is zero.
struct SimilarityKernel {
  KernelKind kind = KernelKind::Gaussian;
  double sigma = 0.9;  // gaussian bandwidth
  double alpha = 1.0;  // arccot slope

  void validate() const;
};

KernelKind parse_kernel_kind(const std::string& name);
std::string kernel_kind_name(KernelKind kind);

// Elementwise psi over a matrix of non-negative divergences, on the tape.
// SqrtComplement rejects entries above 1.
Tensor apply_kernel(const SimilarityKernel& kernel, const Tensor& divergences);

// Scalar convenience for tables and tests. MaxNormalized is matrix-relative,
// so it is evaluated against an explicit maximum here.
double kernel_value(const SimilarityKernel& kernel, double divergence,
                    double matrix_max = 1.0);

}  // namespace losses
}  // namespace condiv
