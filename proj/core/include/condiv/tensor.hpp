#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "condiv/error.hpp"

namespace condiv {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);

struct TensorNode;
using NodePtr = std::shared_ptr<TensorNode>;

// One node of the reverse-mode tape. Values are written once at construction;
// only the grad accumulator mutates afterwards (leaf data may additionally be
// rewritten in place by the optimizer between graph constructions).
struct TensorNode {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty until first accumulation
  bool requires_grad = false;
  const char* op = "leaf";
  std::vector<NodePtr> parents;
  // Reads this node's grad and accumulates into the parents' grads.
  std::function<void(TensorNode&)> backward_fn;

  std::size_t numel() const { return data.size(); }

  void ensure_grad() {
    if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
  }
};

// Value-semantic handle onto a tape node. Copies alias the same node, which is
// what makes gradient accumulation across an expression graph work.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(NodePtr node) : node_(std::move(node)) {}

  // Constant (non-differentiable) tensors.
  static Tensor zeros(Shape shape);
  static Tensor full(Shape shape, double value);
  static Tensor scalar(double value);
  static Tensor from_data(Shape shape, std::vector<double> data);

  // Trainable leaf: participates in backward().
  static Tensor leaf(Shape shape, std::vector<double> data);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t numel() const { return node_->data.size(); }
  std::size_t ndim() const { return node_->shape.size(); }

  // 2-D accessors; throw on rank mismatch.
  std::size_t rows() const;
  std::size_t cols() const;
  double at(std::size_t r, std::size_t c) const;

  const std::vector<double>& data() const { return node_->data; }
  // In-place data access, reserved for leaves/buffers updated between steps.
  std::vector<double>& mutable_data() { return node_->data; }

  double value() const;  // scalar tensors only

  bool requires_grad() const { return node_->requires_grad; }
  bool has_grad() const { return !node_->grad.empty(); }
  const std::vector<double>& grad() const;
  void zero_grad() {
    if (node_) node_->grad.assign(node_->data.size(), 0.0);
  }

  // Reverse-mode sweep from a scalar; grads accumulate until zeroed.
  void backward() const;

  NodePtr node() const { return node_; }

 private:
  NodePtr node_;
};

// Throws ErrorKind::Value naming `op` if any element is NaN/Inf.
void check_finite(const char* op, const std::vector<double>& values);

}  // namespace condiv
