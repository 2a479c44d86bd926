#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "condiv/tensor.hpp"

namespace condiv {

// Named, insertion-ordered registry of the model's tensors. Trainable entries
// receive gradients and optimizer updates; non-trainable entries are
// persistent buffers (batch-norm running statistics) that ride along in
// checkpoints.
class ParamGraph {
 public:
  struct Entry {
    std::string name;
    Tensor tensor;
    bool trainable;
  };

  Tensor add(const std::string& name, Tensor tensor, bool trainable = true) {
    if (index_.count(name)) {
      throw Error(ErrorKind::State, "duplicate parameter name: " + name);
    }
    if (trainable) tensor.node()->requires_grad = true;
    index_[name] = entries_.size();
    entries_.push_back({name, tensor, trainable});
    return entries_.back().tensor;
  }

  bool contains(const std::string& name) const { return index_.count(name); }

  Entry& at(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) {
      throw Error(ErrorKind::State, "unknown parameter: " + name);
    }
    return entries_[it->second];
  }

  const Entry& at(const std::string& name) const {
    return const_cast<ParamGraph*>(this)->at(name);
  }

  std::vector<Entry>& entries() { return entries_; }
  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  std::size_t trainable_scalar_count() const {
    std::size_t n = 0;
    for (const auto& e : entries_)
      if (e.trainable) n += e.tensor.numel();
    return n;
  }

  void zero_grads() {
    for (auto& e : entries_)
      if (e.trainable) e.tensor.zero_grad();
  }

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Reverse-mode sweep plus the ParamGraph contract: after this call every
// trainable entry has a grad, with zeros for parameters the loss does not
// reach.
inline void backward(const Tensor& loss, ParamGraph& params) {
  loss.backward();
  for (auto& e : params.entries()) {
    if (e.trainable && !e.tensor.has_grad()) e.tensor.zero_grad();
  }
}

}  // namespace condiv
