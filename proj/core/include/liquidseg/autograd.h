/* Copyright 2026 The liquidseg Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef LIQUIDSEG_AUTOGRAD_H_
#define LIQUIDSEG_AUTOGRAD_H_

#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <unordered_set>
#include <utility>
#include <vector>

#include "liquidseg/tensor.h"

namespace liquidseg {

// One value in the computation graph. A node that requires a gradient keeps
// its inputs alive and knows how to push its own gradient back into them.
template <typename T>
struct Node {
  Tensor<T> value;
  std::vector<T> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> inputs;
  std::function<void(Node&)> backward_fn;

  std::vector<T>& ensure_grad() {
    if (grad.size() != value.size()) grad.assign(value.size(), T{0});
    return grad;
  }
};

// Handle to a graph node. Copies share the node.
template <typename T>
class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<Node<T>> node) : node_(std::move(node)) {}

  static Var constant(Tensor<T> value) {
    auto n = std::make_shared<Node<T>>();
    n->value = std::move(value);
    return Var(std::move(n));
  }

  static Var parameter(Tensor<T> value) {
    Var v = constant(std::move(value));
    v.node_->requires_grad = true;
    return v;
  }

  bool defined() const { return node_ != nullptr; }
  bool requires_grad() const { return node_->requires_grad; }

  const Shape& shape() const { return node_->value.shape; }
  std::size_t size() const { return node_->value.size(); }
  std::size_t rows() const { return node_->value.rows(); }
  std::size_t cols() const { return node_->value.cols(); }

  const Tensor<T>& value() const { return node_->value; }
  Tensor<T>& mutable_value() { return node_->value; }
  std::span<const T> data() const { return node_->value.data; }
  std::span<T> mutable_data() { return node_->value.data; }

  T item() const {
    if (size() != 1) {
      throw ShapeError("item() on tensor of shape " + shape_string(shape()));
    }
    return node_->value.data[0];
  }

  // Empty until a backward pass reaches this node.
  std::span<const T> grad() const { return node_->grad; }
  std::vector<T>& mutable_grad() { return node_->ensure_grad(); }
  void zero_grad() { node_->grad.clear(); }

  Node<T>* node() const { return node_.get(); }
  const std::shared_ptr<Node<T>>& ptr() const { return node_; }

 private:
  std::shared_ptr<Node<T>> node_;
};

// Builds the output node of an op. The backward function is only attached
// when one of the inputs needs a gradient.
template <typename T>
Var<T> make_result(Tensor<T> value, std::initializer_list<Var<T>> inputs,
                   std::function<void(Node<T>&)> backward_fn) {
  auto out = std::make_shared<Node<T>>();
  out->value = std::move(value);
  for (const auto& in : inputs) {
    if (in.defined() && in.requires_grad()) out->requires_grad = true;
  }
  if (out->requires_grad) {
    for (const auto& in : inputs) out->inputs.push_back(in.ptr());
    out->backward_fn = std::move(backward_fn);
  }
  return Var<T>(std::move(out));
}

// Reverse-mode sweep from a scalar root. Gradients accumulate into every
// reachable node that requires one, including parameters.
template <typename T>
void backward(const Var<T>& root) {
  if (root.size() != 1) {
    throw ShapeError("backward() needs a scalar root, got " +
                     shape_string(root.shape()));
  }
  if (!root.requires_grad()) return;

  std::vector<Node<T>*> order;
  std::unordered_set<Node<T>*> seen;
  std::vector<std::pair<Node<T>*, std::size_t>> stack;
  stack.emplace_back(root.node(), 0);
  seen.insert(root.node());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      Node<T>* child = node->inputs[next++].get();
      if (child->requires_grad && seen.insert(child).second) {
        stack.emplace_back(child, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  root.node()->ensure_grad()[0] += T{1};
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node<T>* node = *it;
    if (node->backward_fn && !node->grad.empty()) node->backward_fn(*node);
  }
}

}  // namespace liquidseg

#endif  // LIQUIDSEG_AUTOGRAD_H_
