#include "condiv/tensor.hpp"

#include <cmath>
#include <unordered_set>

namespace condiv {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

void check_finite(const char* op, const std::vector<double>& values) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::Value,
                  std::string(op) + ": produced a non-finite value");
    }
  }
}

Tensor Tensor::zeros(Shape shape) {
  auto node = std::make_shared<TensorNode>();
  node->data.assign(shape_numel(shape), 0.0);
  node->shape = std::move(shape);
  return Tensor(std::move(node));
}

Tensor Tensor::full(Shape shape, double value) {
  auto node = std::make_shared<TensorNode>();
  node->data.assign(shape_numel(shape), value);
  node->shape = std::move(shape);
  check_finite("full", node->data);
  return Tensor(std::move(node));
}

Tensor Tensor::scalar(double value) { return full({}, value); }

Tensor Tensor::from_data(Shape shape, std::vector<double> data) {
  if (shape_numel(shape) != data.size()) {
    throw_shape_error("from_data", "shape " + shape_to_string(shape) +
                                       " does not match " +
                                       std::to_string(data.size()) + " values");
  }
  check_finite("from_data", data);
  auto node = std::make_shared<TensorNode>();
  node->shape = std::move(shape);
  node->data = std::move(data);
  return Tensor(std::move(node));
}

Tensor Tensor::leaf(Shape shape, std::vector<double> data) {
  Tensor t = from_data(std::move(shape), std::move(data));
  t.node()->requires_grad = true;
  return t;
}

std::size_t Tensor::rows() const {
  if (ndim() != 2) throw_shape_error("rows", "tensor is not 2-D");
  return node_->shape[0];
}

std::size_t Tensor::cols() const {
  if (ndim() != 2) throw_shape_error("cols", "tensor is not 2-D");
  return node_->shape[1];
}

double Tensor::at(std::size_t r, std::size_t c) const {
  return node_->data[r * cols() + c];
}

double Tensor::value() const {
  if (numel() != 1) {
    throw_shape_error("value", "expected a scalar, got " +
                                   shape_to_string(node_->shape));
  }
  return node_->data[0];
}

const std::vector<double>& Tensor::grad() const {
  if (node_->grad.empty()) {
    throw Error(ErrorKind::State, "grad requested before backward()");
  }
  return node_->grad;
}

namespace {

// Iterative post-order DFS over parents; returns nodes so that every node
// appears after all of its consumers when walked back-to-front.
std::vector<TensorNode*> topo_order(TensorNode* root) {
  std::vector<TensorNode*> order;
  std::unordered_set<TensorNode*> visited;
  struct Frame {
    TensorNode* node;
    std::size_t next_parent;
  };
  std::vector<Frame> stack;
  stack.push_back({root, 0});
  visited.insert(root);
  while (!stack.empty()) {
    Frame& top = stack.back();
    if (top.next_parent < top.node->parents.size()) {
      TensorNode* parent = top.node->parents[top.next_parent++].get();
      if (visited.insert(parent).second) stack.push_back({parent, 0});
    } else {
      order.push_back(top.node);
      stack.pop_back();
    }
  }
  return order;  // post-order: parents before children
}

}  // namespace

void Tensor::backward() const {
  if (!node_) throw Error(ErrorKind::State, "backward on empty tensor");
  if (numel() != 1) {
    throw_shape_error("backward", "loss must be a scalar, got " +
                                      shape_to_string(node_->shape));
  }
  node_->ensure_grad();
  node_->grad[0] += 1.0;
  std::vector<TensorNode*> order = topo_order(node_.get());
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    TensorNode* node = *it;
    if (node->backward_fn && !node->grad.empty()) node->backward_fn(*node);
  }
}

}  // namespace condiv
