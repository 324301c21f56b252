#include "priornet/tensor.hpp"

#include <algorithm>
#include <cmath>

namespace priornet {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_to_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

template <typename T>
bool BasicTensor<T>::all_finite() const {
  auto finite = [](T v) { return std::isfinite(v); };
  if (!std::all_of(data_.begin(), data_.end(), finite)) return false;
  return !grad_ || std::all_of(grad_->begin(), grad_->end(), finite);
}

template <typename T>
BasicTensor<T>& BasicParamRegistry<T>::add(std::string name, BasicTensor<T> tensor) {
  if (contains(name)) throw std::invalid_argument("duplicate parameter name: " + name);
  entries_.push_back({std::move(name), std::move(tensor)});
  return entries_.back().tensor;
}

template <typename T>
BasicTensor<T>& BasicParamRegistry<T>::get(std::string_view name) {
  for (auto& e : entries_) {
    if (e.name == name) return e.tensor;
  }
  throw std::out_of_range("unknown parameter: " + std::string(name));
}

template <typename T>
const BasicTensor<T>& BasicParamRegistry<T>::get(std::string_view name) const {
  return const_cast<BasicParamRegistry*>(this)->get(name);
}

template <typename T>
bool BasicParamRegistry<T>::contains(std::string_view name) const {
  return std::any_of(entries_.begin(), entries_.end(), [&](const Entry& e) { return e.name == name; });
}

template <typename T>
std::size_t BasicParamRegistry<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.tensor.numel();
  return n;
}

template <typename T>
void BasicParamRegistry<T>::zero_grad() {
  for (auto& e : entries_) e.tensor.zero_grad();
}

template class BasicTensor<float>;
template class BasicTensor<double>;
template class BasicParamRegistry<float>;
template class BasicParamRegistry<double>;

}  // namespace priornet
