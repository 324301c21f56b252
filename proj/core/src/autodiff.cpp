#include "priornet/autodiff.hpp"

#include <stdexcept>

namespace priornet {

template <typename T>
Var<T> Tape<T>::constant(BasicTensor<T> value) {
  nodes_.push_back(Node{std::move(value), {}, {}, nullptr, false});
  return Var<T>(this, nodes_.size() - 1);
}

template <typename T>
Var<T> Tape<T>::parameter(BasicTensor<T>& param) {
  BasicTensor<T> copy(param.shape(), std::vector<T>(param.data().begin(), param.data().end()));
  nodes_.push_back(Node{std::move(copy), {}, {}, &param, true});
  return Var<T>(this, nodes_.size() - 1);
}

template <typename T>
Var<T> Tape<T>::record(BasicTensor<T> value, std::vector<std::size_t> inputs, BackwardFn backward) {
  bool needs = false;
  for (auto id : inputs) needs = needs || nodes_.at(id).requires_grad;
  nodes_.push_back(Node{std::move(value), {}, needs ? std::move(backward) : BackwardFn{}, nullptr, needs});
  return Var<T>(this, nodes_.size() - 1);
}

template <typename T>
std::vector<T>& Tape<T>::grad(std::size_t id) {
  auto& node = nodes_[id];
  if (node.grad.empty()) node.grad.assign(node.value.numel(), T(0));
  return node.grad;
}

template <typename T>
void Tape<T>::backward(Var<T> loss) {
  if (&loss.tape() != this) throw std::invalid_argument("backward: variable belongs to another tape");
  if (value(loss.id()).numel() != 1) {
    throw ShapeError("backward: loss must be scalar, got shape " + shape_to_string(value(loss.id()).shape()));
  }
  for (auto& n : nodes_) n.grad.clear();
  if (!nodes_[loss.id()].requires_grad) return;
  grad(loss.id())[0] = T(1);

  for (std::size_t k = loss.id() + 1; k-- > 0;) {
    auto& node = nodes_[k];
    if (!node.requires_grad || node.grad.empty()) continue;
    if (node.param != nullptr) {
      auto& pg = node.param->ensure_grad();
      for (std::size_t i = 0; i < pg.size(); ++i) pg[i] += node.grad[i];
    } else if (node.backward) {
      // Callbacks only touch grads of earlier nodes, so `node` stays valid.
      node.backward(*this, node.grad);
    }
  }
}

template class Tape<float>;
template class Tape<double>;

}  // namespace priornet
