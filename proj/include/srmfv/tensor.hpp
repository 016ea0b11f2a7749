#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <string>
#include <unordered_set>
#include <vector>

#include "srmfv/error.hpp"

namespace srmfv {

template <typename S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using BoolMat =
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

namespace detail {
// Differentiation can be switched off per thread for inference paths;
// ops then evaluate eagerly without recording parents.
inline thread_local bool grad_enabled = true;
}  // namespace detail

/// RAII guard disabling gradient recording on the current thread.
class NoGradGuard {
 public:
  NoGradGuard() : prev_(detail::grad_enabled) { detail::grad_enabled = false; }
  ~NoGradGuard() { detail::grad_enabled = prev_; }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool prev_;
};

inline bool grad_enabled() { return detail::grad_enabled; }

template <typename S>
struct Node {
  Mat<S> value;
  Mat<S> grad;  // allocated lazily; same shape as value once touched
  bool requires_grad = false;
  bool backward_done = false;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node>> parents;
  // Pulls this node's grad into its parents' grads.
  std::function<void(Node&)> backprop;

  void ensure_grad() {
    if (grad.size() == 0) grad = Mat<S>::Zero(value.rows(), value.cols());
  }
};

/// Shared handle to a node of the computation graph. Copies alias.
template <typename S>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<Node<S>> n) : n_(std::move(n)) {}

  static Tensor leaf(Mat<S> v, bool requires_grad = false) {
    auto n = std::make_shared<Node<S>>();
    n->value = std::move(v);
    n->requires_grad = requires_grad;
    return Tensor(std::move(n));
  }

  static Tensor scalar(S v, bool requires_grad = false) {
    Mat<S> m(1, 1);
    m(0, 0) = v;
    return leaf(std::move(m), requires_grad);
  }

  bool valid() const { return static_cast<bool>(n_); }
  const Mat<S>& value() const { return n_->value; }
  Mat<S>& value() { return n_->value; }
  const Mat<S>& grad() const { return n_->grad; }
  bool requires_grad() const { return n_->requires_grad; }
  Eigen::Index rows() const { return n_->value.rows(); }
  Eigen::Index cols() const { return n_->value.cols(); }
  Eigen::Index size() const { return n_->value.size(); }
  S item() const {
    if (size() != 1) throw ShapeError("item() on non-scalar tensor");
    return n_->value(0, 0);
  }

  void zero_grad() {
    if (n_->grad.size() != 0) n_->grad.setZero();
    n_->backward_done = false;
  }

  std::shared_ptr<Node<S>> node() const { return n_; }

 private:
  std::shared_ptr<Node<S>> n_;
};

/// Ordered record of the operations reachable from a root, in a
/// deterministic topological order. Reverse replay accumulates gradients
/// into every requires_grad leaf.
template <typename S>
class ComputeTape {
 public:
  static ComputeTape record(const Tensor<S>& root) {
    ComputeTape tape;
    std::unordered_set<const Node<S>*> seen;
    // iterative post-order DFS
    std::vector<std::pair<std::shared_ptr<Node<S>>, std::size_t>> stack;
    if (root.node()->requires_grad) stack.emplace_back(root.node(), 0);
    while (!stack.empty()) {
      auto& [node, next_child] = stack.back();
      if (next_child == 0 && seen.count(node.get())) {
        stack.pop_back();
        continue;
      }
      if (next_child < node->parents.size()) {
        auto child = node->parents[next_child++];
        if (child->requires_grad && !seen.count(child.get())) {
          stack.emplace_back(std::move(child), 0);
        }
      } else {
        seen.insert(node.get());
        tape.order_.push_back(node);
        stack.pop_back();
      }
    }
    return tape;
  }

  /// Reverse replay. Gradients accumulate; leaves keep theirs.
  void backward() {
    for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
      Node<S>& n = **it;
      if (n.backprop) {
        n.ensure_grad();
        n.backprop(n);
      }
    }
  }

  std::size_t size() const { return order_.size(); }

 private:
  std::vector<std::shared_ptr<Node<S>>> order_;
};

/// Reverse-mode differentiation from a scalar root. Repeated calls on the
/// same root without zero_grad are an error.
template <typename S>
void backward(const Tensor<S>& root) {
  if (root.size() != 1)
    throw NumericError("backward: root must be a scalar, got " +
                       std::to_string(root.rows()) + "x" +
                       std::to_string(root.cols()));
  if (!root.node()->requires_grad)
    throw NumericError(
        "backward: root does not require gradients (built under NoGradGuard "
        "or from constant leaves)");
  if (root.node()->backward_done)
    throw NumericError("backward: called twice on the same root without reset");
  root.node()->backward_done = true;
  root.node()->ensure_grad();
  root.node()->grad(0, 0) += S(1);
  auto tape = ComputeTape<S>::record(root);
  tape.backward();
}

namespace detail {
template <typename S>
Tensor<S> make_op(Mat<S> value, const char* op,
                  std::vector<std::shared_ptr<Node<S>>> parents,
                  std::function<void(Node<S>&)> backprop) {
  auto n = std::make_shared<Node<S>>();
  n->value = std::move(value);
  n->op = op;
  if (grad_enabled) {
    bool req = false;
    for (const auto& p : parents) req = req || p->requires_grad;
    if (req) {
      n->requires_grad = true;
      n->parents = std::move(parents);
      n->backprop = std::move(backprop);
    }
  }
  return Tensor<S>(std::move(n));
}
}  // namespace detail

}  // namespace srmfv
