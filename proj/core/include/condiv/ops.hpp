#pragma once

#include <vector>

#include "condiv/tensor.hpp"

namespace condiv {

// Elementwise binary ops broadcast in four layouts: identical shapes, a
// scalar against anything, a 1-D/(1,m) row against (n,m), and an (n,1)
// column against (n,m).
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);

Tensor neg(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);
Tensor sqrt(const Tensor& a);
Tensor atan(const Tensor& a);
Tensor relu(const Tensor& a);

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

Tensor sum_all(const Tensor& a);
Tensor mean_all(const Tensor& a);
// Axis reductions on 2-D tensors: axis 0 -> (cols), axis 1 -> (rows).
Tensor sum_axis(const Tensor& a, std::size_t axis);
Tensor mean_axis(const Tensor& a, std::size_t axis);

struct MaxResult {
  Tensor values;
  std::vector<std::size_t> indices;  // argmax, ties broken to lowest index
};

// Max along an axis (1-D with axis 0, or 2-D with axis 0/1). The gradient
// flows only through the selected elements, i.e. the subgradient of max.
MaxResult max_axis(const Tensor& a, std::size_t axis);
// Max over all elements; same subgradient rule on the flattened tensor.
Tensor max_all(const Tensor& a);

// L2 norm of each row of a 2-D tensor, returned as (n,1) so it broadcasts
// back over columns.
Tensor norm_rows(const Tensor& a);

Tensor concat(const std::vector<Tensor>& parts, std::size_t axis);

Tensor gather_rows(const Tensor& a, const std::vector<std::size_t>& rows);
// out[i] = a[i, cols[i]]
Tensor take_per_row(const Tensor& a, const std::vector<std::size_t>& cols);
// out[i,j] = a[i, cols[j]]; repeated columns accumulate gradient.
Tensor gather_cols(const Tensor& a, const std::vector<std::size_t>& cols);

Tensor reshape(const Tensor& a, Shape shape);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator/(const Tensor& a, const Tensor& b) { return div(a, b); }
inline Tensor operator-(const Tensor& a) { return neg(a); }

inline Tensor operator+(const Tensor& a, double s) {
  return add(a, Tensor::scalar(s));
}
inline Tensor operator+(double s, const Tensor& b) {
  return add(Tensor::scalar(s), b);
}
inline Tensor operator-(const Tensor& a, double s) {
  return sub(a, Tensor::scalar(s));
}
inline Tensor operator-(double s, const Tensor& b) {
  return sub(Tensor::scalar(s), b);
}
inline Tensor operator*(const Tensor& a, double s) {
  return mul(a, Tensor::scalar(s));
}
inline Tensor operator*(double s, const Tensor& b) {
  return mul(Tensor::scalar(s), b);
}
inline Tensor operator/(const Tensor& a, double s) {
  return div(a, Tensor::scalar(s));
}
inline Tensor operator/(double s, const Tensor& b) {
  return div(Tensor::scalar(s), b);
}

}  // namespace condiv
