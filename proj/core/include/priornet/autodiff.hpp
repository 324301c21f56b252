#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "priornet/tensor.hpp"

namespace priornet {

template <typename T>
class Tape;

// Handle to a node recorded on a Tape. Cheap to copy; valid while the tape lives.
template <typename T>
class Var {
 public:
  Var() = default;
  Var(Tape<T>* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape<T>& tape() const { return *tape_; }
  std::size_t id() const { return id_; }
  const BasicTensor<T>& value() const { return tape_->value(id_); }
  const Shape& shape() const { return value().shape(); }
  bool requires_grad() const { return tape_->requires_grad(id_); }

 private:
  Tape<T>* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Operation tape for reverse-mode differentiation. Every op appends a node
// holding its forward value and a closure that scatters the node's output
// gradient into its inputs. The tape is rebuilt for each forward pass.
template <typename T>
class Tape {
 public:
  // Receives the gradient of the node's output; accumulates into inputs via grad().
  using BackwardFn = std::function<void(Tape&, const std::vector<T>& out_grad)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var<T> constant(BasicTensor<T> value);
  // Leaf bound to `param`; backward() accumulates into param.grad().
  // `param` must outlive the tape and must not be moved while it lives.
  Var<T> parameter(BasicTensor<T>& param);
  Var<T> record(BasicTensor<T> value, std::vector<std::size_t> inputs, BackwardFn backward);

  const BasicTensor<T>& value(std::size_t id) const { return nodes_[id].value; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  // Gradient buffer of a node, allocated on first use.
  std::vector<T>& grad(std::size_t id);
  std::size_t size() const { return nodes_.size(); }

  // Seeds d(loss)/d(loss) = 1 and replays the tape in reverse. Parameter
  // gradients accumulate across calls; node gradients are reset per call.
  void backward(Var<T> loss);

 private:
  struct Node {
    BasicTensor<T> value;
    std::vector<T> grad;
    BackwardFn backward;
    BasicTensor<T>* param = nullptr;
    bool requires_grad = false;
  };
  std::vector<Node> nodes_;
};

extern template class Tape<float>;
extern template class Tape<double>;

}  // namespace priornet
