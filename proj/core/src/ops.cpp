#include "condiv/ops.hpp"

#include <cmath>
#include <cstring>
#include <limits>

namespace condiv {

namespace {

enum class Broadcast {
  Same,
  ScalarLeft,
  ScalarRight,
  RowLeft,   // a is the (1,m)/(m) row, b is (n,m)
  RowRight,  // b is the row
  ColLeft,   // a is the (n,1) column, b is (n,m)
  ColRight,  // b is the column
};

bool is_row_of(const Shape& small, const Shape& big) {
  if (big.size() != 2) return false;
  if (small.size() == 1) return small[0] == big[1];
  return small.size() == 2 && small[0] == 1 && small[1] == big[1];
}

bool is_col_of(const Shape& small, const Shape& big) {
  return big.size() == 2 && small.size() == 2 && small[0] == big[0] &&
         small[1] == 1;
}

Broadcast classify(const char* op, const Shape& a, const Shape& b) {
  if (a == b) return Broadcast::Same;
  if (shape_numel(b) == 1) return Broadcast::ScalarRight;
  if (shape_numel(a) == 1) return Broadcast::ScalarLeft;
  if (is_row_of(b, a)) return Broadcast::RowRight;
  if (is_row_of(a, b)) return Broadcast::RowLeft;
  if (is_col_of(b, a)) return Broadcast::ColRight;
  if (is_col_of(a, b)) return Broadcast::ColLeft;
  throw_shape_error(op, a, b);
}

Tensor make_result(const char* op, Shape shape, std::vector<double> data,
                   std::vector<NodePtr> parents,
                   std::function<void(TensorNode&)> backward_fn) {
  check_finite(op, data);
  auto node = std::make_shared<TensorNode>();
  node->shape = std::move(shape);
  node->data = std::move(data);
  node->op = op;
  bool needs_grad = false;
  for (const auto& p : parents) needs_grad = needs_grad || p->requires_grad;
  if (needs_grad) {
    node->requires_grad = true;
    node->parents = std::move(parents);
    node->backward_fn = std::move(backward_fn);
  }
  return Tensor(std::move(node));
}

// FwdFn: double(double, double).
// DaFn/DbFn: grad contribution given (gout, aval, bval).
template <typename FwdFn, typename DaFn, typename DbFn>
Tensor binary_op(const char* op, const Tensor& a, const Tensor& b, FwdFn fwd,
                 DaFn dfda, DbFn dfdb) {
  const Broadcast mode = classify(op, a.shape(), b.shape());
  const auto& av = a.data();
  const auto& bv = b.data();

  Shape out_shape;
  switch (mode) {
    case Broadcast::Same:
    case Broadcast::ScalarRight:
    case Broadcast::RowRight:
    case Broadcast::ColRight:
      out_shape = a.shape();
      break;
    default:
      out_shape = b.shape();
      break;
  }
  const std::size_t n_out = shape_numel(out_shape);
  const std::size_t cols =
      out_shape.size() == 2 ? out_shape[1] : shape_numel(out_shape);

  auto a_index = [mode, cols](std::size_t i) -> std::size_t {
    switch (mode) {
      case Broadcast::ScalarLeft: return 0;
      case Broadcast::RowLeft: return i % cols;
      case Broadcast::ColLeft: return i / cols;
      default: return i;
    }
  };
  auto b_index = [mode, cols](std::size_t i) -> std::size_t {
    switch (mode) {
      case Broadcast::ScalarRight: return 0;
      case Broadcast::RowRight: return i % cols;
      case Broadcast::ColRight: return i / cols;
      default: return i;
    }
  };

  std::vector<double> out(n_out);
  for (std::size_t i = 0; i < n_out; ++i)
    out[i] = fwd(av[a_index(i)], bv[b_index(i)]);

  auto backward = [dfda, dfdb, a_index, b_index](TensorNode& node) {
    TensorNode& pa = *node.parents[0];
    TensorNode& pb = *node.parents[1];
    if (pa.requires_grad) pa.ensure_grad();
    if (pb.requires_grad) pb.ensure_grad();
    for (std::size_t i = 0; i < node.grad.size(); ++i) {
      const double g = node.grad[i];
      if (g == 0.0) continue;
      const std::size_t ia = a_index(i);
      const std::size_t ib = b_index(i);
      if (pa.requires_grad) pa.grad[ia] += dfda(g, pa.data[ia], pb.data[ib]);
      if (pb.requires_grad) pb.grad[ib] += dfdb(g, pa.data[ia], pb.data[ib]);
    }
  };

  return make_result(op, std::move(out_shape), std::move(out),
                     {a.node(), b.node()}, std::move(backward));
}

template <typename FwdFn, typename GradFn>
Tensor unary_op(const char* op, const Tensor& a, FwdFn fwd, GradFn dfda) {
  const auto& av = a.data();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = fwd(av[i]);

  auto backward = [dfda](TensorNode& node) {
    TensorNode& pa = *node.parents[0];
    pa.ensure_grad();
    for (std::size_t i = 0; i < node.grad.size(); ++i) {
      const double g = node.grad[i];
      if (g != 0.0) pa.grad[i] += dfda(g, pa.data[i], node.data[i]);
    }
  };

  return make_result(op, a.shape(), std::move(out), {a.node()},
                     std::move(backward));
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  return binary_op(
      "add", a, b, [](double x, double y) { return x + y; },
      [](double g, double, double) { return g; },
      [](double g, double, double) { return g; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary_op(
      "sub", a, b, [](double x, double y) { return x - y; },
      [](double g, double, double) { return g; },
      [](double g, double, double) { return -g; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary_op(
      "mul", a, b, [](double x, double y) { return x * y; },
      [](double g, double, double y) { return g * y; },
      [](double g, double x, double) { return g * x; });
}

Tensor div(const Tensor& a, const Tensor& b) {
  return binary_op(
      "div", a, b, [](double x, double y) { return x / y; },
      [](double g, double, double y) { return g / y; },
      [](double g, double x, double y) { return -g * x / (y * y); });
}

Tensor neg(const Tensor& a) {
  return unary_op(
      "neg", a, [](double x) { return -x; },
      [](double g, double, double) { return -g; });
}

Tensor exp(const Tensor& a) {
  return unary_op(
      "exp", a, [](double x) { return std::exp(x); },
      [](double g, double, double out) { return g * out; });
}

Tensor log(const Tensor& a) {
  return unary_op(
      "log", a, [](double x) { return std::log(x); },
      [](double g, double x, double) { return g / x; });
}

Tensor sqrt(const Tensor& a) {
  return unary_op(
      "sqrt", a, [](double x) { return std::sqrt(x); },
      [](double g, double, double out) { return g * 0.5 / out; });
}

Tensor atan(const Tensor& a) {
  return unary_op(
      "atan", a, [](double x) { return std::atan(x); },
      [](double g, double x, double) { return g / (1.0 + x * x); });
}

Tensor relu(const Tensor& a) {
  return unary_op(
      "relu", a, [](double x) { return x > 0.0 ? x : 0.0; },
      [](double g, double x, double) { return x > 0.0 ? g : 0.0; });
}

namespace {

// C (n,m) += A (n,k) . B (k,m)
void mm_nn(double* c, const double* a, const double* b, std::size_t n,
           std::size_t k, std::size_t m) {
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a[i * k + p];
      if (av == 0.0) continue;
      const double* brow = b + p * m;
      double* crow = c + i * m;
      for (std::size_t j = 0; j < m; ++j) crow[j] += av * brow[j];
    }
  }
}

// C (n,k) += G (n,m) . B^T, with B (k,m)
void mm_nt(double* c, const double* g, const double* b, std::size_t n,
           std::size_t k, std::size_t m) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* grow = g + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const double* brow = b + p * m;
      double acc = 0.0;
      for (std::size_t j = 0; j < m; ++j) acc += grow[j] * brow[j];
      c[i * k + p] += acc;
    }
  }
}

// C (k,m) += A^T . G, with A (n,k), G (n,m)
void mm_tn(double* c, const double* a, const double* g, std::size_t n,
           std::size_t k, std::size_t m) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* grow = g + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a[i * k + p];
      if (av == 0.0) continue;
      double* crow = c + p * m;
      for (std::size_t j = 0; j < m; ++j) crow[j] += av * grow[j];
    }
  }
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.ndim() != 2 || b.ndim() != 2 || a.cols() != b.rows()) {
    throw_shape_error("matmul", a.shape(), b.shape());
  }
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  std::vector<double> out(n * m, 0.0);
  mm_nn(out.data(), a.data().data(), b.data().data(), n, k, m);

  auto backward = [n, k, m](TensorNode& node) {
    TensorNode& pa = *node.parents[0];
    TensorNode& pb = *node.parents[1];
    if (pa.requires_grad) {
      pa.ensure_grad();
      mm_nt(pa.grad.data(), node.grad.data(), pb.data.data(), n, k, m);
    }
    if (pb.requires_grad) {
      pb.ensure_grad();
      mm_tn(pb.grad.data(), pa.data.data(), node.grad.data(), n, k, m);
    }
  };

  return make_result("matmul", {n, m}, std::move(out), {a.node(), b.node()},
                     std::move(backward));
}

Tensor transpose(const Tensor& a) {
  if (a.ndim() != 2) throw_shape_error("transpose", "tensor is not 2-D");
  const std::size_t n = a.rows(), m = a.cols();
  std::vector<double> out(n * m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) out[j * n + i] = a.data()[i * m + j];

  auto backward = [n, m](TensorNode& node) {
    TensorNode& pa = *node.parents[0];
    pa.ensure_grad();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j)
        pa.grad[i * m + j] += node.grad[j * n + i];
  };

  return make_result("transpose", {m, n}, std::move(out), {a.node()},
                     std::move(backward));
}

Tensor sum_all(const Tensor& a) {
  double total = 0.0;
  for (double v : a.data()) total += v;

  auto backward = [](TensorNode& node) {
    TensorNode& pa = *node.parents[0];
    pa.ensure_grad();
    const double g = node.grad[0];
    for (double& gv : pa.grad) gv += g;
  };

  return make_result("sum", {}, {total}, {a.node()}, std::move(backward));
}

Tensor mean_all(const Tensor& a) {
  if (a.numel() == 0) throw_shape_error("mean", "empty tensor");
  const double scale = 1.0 / static_cast<double>(a.numel());
  double total = 0.0;
  for (double v : a.data()) total += v;

  auto backward = [scale](TensorNode& node) {
    TensorNode& pa = *node.parents[0];
    pa.ensure_grad();
    const double g = node.grad[0] * scale;
    for (double& gv : pa.grad) gv += g;
  };

  return make_result("mean", {}, {total * scale}, {a.node()},
                     std::move(backward));
}

namespace {

Tensor axis_reduce(const char* op, const Tensor& a, std::size_t axis,
                   bool average) {
  if (a.ndim() != 2 || axis > 1) {
    throw_shape_error(op, "expected a 2-D tensor and axis 0 or 1, got " +
                              shape_to_string(a.shape()) + " axis " +
                              std::to_string(axis));
  }
  const std::size_t n = a.rows(), m = a.cols();
  const std::size_t out_len = axis == 0 ? m : n;
  const std::size_t count = axis == 0 ? n : m;
  const double scale = average ? 1.0 / static_cast<double>(count) : 1.0;

  std::vector<double> out(out_len, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j)
      out[axis == 0 ? j : i] += a.data()[i * m + j];
  for (double& v : out) v *= scale;

  auto backward = [n, m, axis, scale](TensorNode& node) {
    TensorNode& pa = *node.parents[0];
    pa.ensure_grad();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j)
        pa.grad[i * m + j] += node.grad[axis == 0 ? j : i] * scale;
  };

  return make_result(op, {out_len}, std::move(out), {a.node()},
                     std::move(backward));
}

}  // namespace

Tensor sum_axis(const Tensor& a, std::size_t axis) {
  return axis_reduce("sum_axis", a, axis, false);
}

Tensor mean_axis(const Tensor& a, std::size_t axis) {
  return axis_reduce("mean_axis", a, axis, true);
}

MaxResult max_axis(const Tensor& a, std::size_t axis) {
  std::size_t n, m;
  bool vector_input = a.ndim() == 1;
  if (vector_input) {
    if (axis != 0) throw_shape_error("max_axis", "1-D tensor requires axis 0");
    n = 1;
    m = a.numel();
    axis = 1;
  } else if (a.ndim() == 2 && axis <= 1) {
    n = a.rows();
    m = a.cols();
  } else {
    throw_shape_error("max_axis", "expected 1-D or 2-D tensor, got " +
                                      shape_to_string(a.shape()));
  }
  if (a.numel() == 0) throw_shape_error("max_axis", "empty tensor");

  const std::size_t out_len = axis == 0 ? m : n;
  const std::size_t extent = axis == 0 ? n : m;
  std::vector<double> values(out_len);
  std::vector<std::size_t> indices(out_len);
  for (std::size_t o = 0; o < out_len; ++o) {
    double best = -std::numeric_limits<double>::infinity();
    std::size_t best_idx = 0;
    for (std::size_t t = 0; t < extent; ++t) {
      const double v =
          axis == 0 ? a.data()[t * m + o] : a.data()[o * m + t];
      if (v > best) {  // strict: ties keep the lowest index
        best = v;
        best_idx = t;
      }
    }
    values[o] = best;
    indices[o] = best_idx;
  }

  auto backward = [indices, m, axis](TensorNode& node) {
    TensorNode& pa = *node.parents[0];
    pa.ensure_grad();
    for (std::size_t o = 0; o < node.grad.size(); ++o) {
      const std::size_t flat =
          axis == 0 ? indices[o] * m + o : o * m + indices[o];
      pa.grad[flat] += node.grad[o];
    }
  };

  Shape out_shape = vector_input ? Shape{} : Shape{out_len};
  Tensor values_t = make_result("max_axis", std::move(out_shape),
                                std::move(values), {a.node()}, backward);
  return {values_t, std::move(indices)};
}

Tensor max_all(const Tensor& a) {
  if (a.numel() == 0) throw_shape_error("max", "empty tensor");
  double best = -std::numeric_limits<double>::infinity();
  std::size_t best_idx = 0;
  for (std::size_t i = 0; i < a.numel(); ++i) {
    if (a.data()[i] > best) {
      best = a.data()[i];
      best_idx = i;
    }
  }

  auto backward = [best_idx](TensorNode& node) {
    TensorNode& pa = *node.parents[0];
    pa.ensure_grad();
    pa.grad[best_idx] += node.grad[0];
  };

  return make_result("max", {}, {best}, {a.node()}, std::move(backward));
}

Tensor norm_rows(const Tensor& a) {
  if (a.ndim() != 2) throw_shape_error("norm_rows", "tensor is not 2-D");
  return reshape(sqrt(sum_axis(mul(a, a), 1)), {a.rows(), 1});
}

Tensor concat(const std::vector<Tensor>& parts, std::size_t axis) {
  if (parts.empty()) throw_shape_error("concat", "no tensors given");
  const std::size_t ndim = parts[0].ndim();
  if (ndim == 0 || ndim > 2 || axis >= ndim) {
    throw_shape_error("concat", "expected 1-D/2-D inputs with a valid axis");
  }
  for (const Tensor& p : parts) {
    if (p.ndim() != ndim) throw_shape_error("concat", "mixed ranks");
    for (std::size_t d = 0; d < ndim; ++d) {
      if (d != axis && p.shape()[d] != parts[0].shape()[d])
        throw_shape_error("concat", parts[0].shape(), p.shape());
    }
  }

  Shape out_shape = parts[0].shape();
  out_shape[axis] = 0;
  for (const Tensor& p : parts) out_shape[axis] += p.shape()[axis];

  std::vector<double> out(shape_numel(out_shape));
  std::vector<NodePtr> parents;
  parents.reserve(parts.size());
  for (const Tensor& p : parts) parents.push_back(p.node());

  if (ndim == 1 || axis == 0) {
    std::size_t offset = 0;
    for (const Tensor& p : parts) {
      std::memcpy(out.data() + offset, p.data().data(),
                  p.numel() * sizeof(double));
      offset += p.numel();
    }
    auto backward = [](TensorNode& node) {
      std::size_t offset = 0;
      for (auto& parent : node.parents) {
        if (parent->requires_grad) {
          parent->ensure_grad();
          for (std::size_t i = 0; i < parent->data.size(); ++i)
            parent->grad[i] += node.grad[offset + i];
        }
        offset += parent->data.size();
      }
    };
    return make_result("concat", std::move(out_shape), std::move(out),
                       std::move(parents), std::move(backward));
  }

  // 2-D, axis 1: interleave rows
  const std::size_t n = out_shape[0], m = out_shape[1];
  std::size_t col_offset = 0;
  for (const Tensor& p : parts) {
    const std::size_t pc = p.cols();
    for (std::size_t i = 0; i < n; ++i)
      std::memcpy(out.data() + i * m + col_offset, p.data().data() + i * pc,
                  pc * sizeof(double));
    col_offset += pc;
  }
  auto backward = [n, m](TensorNode& node) {
    std::size_t col_offset = 0;
    for (auto& parent : node.parents) {
      const std::size_t pc = parent->shape[1];
      if (parent->requires_grad) {
        parent->ensure_grad();
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < pc; ++j)
            parent->grad[i * pc + j] += node.grad[i * m + col_offset + j];
      }
      col_offset += pc;
    }
  };
  return make_result("concat", std::move(out_shape), std::move(out),
                     std::move(parents), std::move(backward));
}

Tensor gather_rows(const Tensor& a, const std::vector<std::size_t>& rows) {
  if (a.ndim() != 2) throw_shape_error("gather_rows", "tensor is not 2-D");
  const std::size_t n = a.rows(), m = a.cols();
  for (std::size_t r : rows) {
    if (r >= n)
      throw_shape_error("gather_rows", "row index " + std::to_string(r) +
                                           " out of range for " +
                                           shape_to_string(a.shape()));
  }
  std::vector<double> out(rows.size() * m);
  for (std::size_t i = 0; i < rows.size(); ++i)
    std::memcpy(out.data() + i * m, a.data().data() + rows[i] * m,
                m * sizeof(double));

  auto backward = [rows, m](TensorNode& node) {
    TensorNode& pa = *node.parents[0];
    pa.ensure_grad();
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t j = 0; j < m; ++j)
        pa.grad[rows[i] * m + j] += node.grad[i * m + j];
  };

  return make_result("gather_rows", {rows.size(), m}, std::move(out),
                     {a.node()}, std::move(backward));
}

Tensor take_per_row(const Tensor& a, const std::vector<std::size_t>& cols) {
  if (a.ndim() != 2) throw_shape_error("take_per_row", "tensor is not 2-D");
  const std::size_t n = a.rows(), m = a.cols();
  if (cols.size() != n) {
    throw_shape_error("take_per_row", "need one column index per row, got " +
                                          std::to_string(cols.size()) +
                                          " for " + std::to_string(n));
  }
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (cols[i] >= m)
      throw_shape_error("take_per_row", "column index out of range");
    out[i] = a.data()[i * m + cols[i]];
  }

  auto backward = [cols, m](TensorNode& node) {
    TensorNode& pa = *node.parents[0];
    pa.ensure_grad();
    for (std::size_t i = 0; i < node.grad.size(); ++i)
      pa.grad[i * m + cols[i]] += node.grad[i];
  };

  return make_result("take_per_row", {n}, std::move(out), {a.node()},
                     std::move(backward));
}

Tensor gather_cols(const Tensor& a, const std::vector<std::size_t>& cols) {
  if (a.ndim() != 2) throw_shape_error("gather_cols", "tensor is not 2-D");
  const std::size_t n = a.rows(), m = a.cols(), p = cols.size();
  for (std::size_t c : cols) {
    if (c >= m) throw_shape_error("gather_cols", "column index out of range");
  }
  std::vector<double> out(n * p);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < p; ++j) out[i * p + j] = a.data()[i * m + cols[j]];

  auto backward = [cols, m, p](TensorNode& node) {
    TensorNode& pa = *node.parents[0];
    pa.ensure_grad();
    const std::size_t n = node.shape[0];
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < p; ++j)
        pa.grad[i * m + cols[j]] += node.grad[i * p + j];
  };

  return make_result("gather_cols", {n, p}, std::move(out), {a.node()},
                     std::move(backward));
}

Tensor reshape(const Tensor& a, Shape shape) {
  if (shape_numel(shape) != a.numel()) {
    throw_shape_error("reshape", a.shape(), shape);
  }
  auto backward = [](TensorNode& node) {
    TensorNode& pa = *node.parents[0];
    pa.ensure_grad();
    for (std::size_t i = 0; i < node.grad.size(); ++i)
      pa.grad[i] += node.grad[i];
  };
  std::vector<double> out = a.data();
  return make_result("reshape", std::move(shape), std::move(out), {a.node()},
                     std::move(backward));
}

}  // namespace condiv
