#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace priornet {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_to_string(const Shape& shape);

// Raised for any operand whose extents do not fit the operation.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Dense row-major array. Images use channels x height x width.
template <typename T>
class BasicTensor {
 public:
  using value_type = T;

  BasicTensor() = default;
  explicit BasicTensor(Shape shape, T fill = T(0))
      : shape_(std::move(shape)), data_(shape_numel(shape_), fill) {}
  BasicTensor(Shape shape, std::vector<T> data) : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != shape_numel(shape_)) {
      throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                       " does not match shape " + shape_to_string(shape_));
    }
  }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t i) const { return shape_.at(i); }
  std::size_t numel() const { return data_.size(); }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  // C x H x W accessors.
  T& at(std::size_t c, std::size_t i, std::size_t j) {
    return data_[(c * shape_[1] + i) * shape_[2] + j];
  }
  const T& at(std::size_t c, std::size_t i, std::size_t j) const {
    return data_[(c * shape_[1] + i) * shape_[2] + j];
  }

  bool has_grad() const { return grad_.has_value(); }
  std::span<T> grad() { return ensure_grad(); }
  std::span<const T> grad() const {
    if (!grad_) throw std::logic_error("tensor has no gradient buffer");
    return *grad_;
  }
  std::vector<T>& ensure_grad() {
    if (!grad_) grad_.emplace(data_.size(), T(0));
    return *grad_;
  }
  void zero_grad() {
    if (grad_) std::fill(grad_->begin(), grad_->end(), T(0));
  }
  void drop_grad() { grad_.reset(); }

  BasicTensor reshaped(Shape shape) const {
    if (shape_numel(shape) != numel()) {
      throw ShapeError("cannot reshape " + shape_to_string(shape_) + " to " + shape_to_string(shape));
    }
    return BasicTensor(std::move(shape), data_);
  }

  template <typename U>
  BasicTensor<U> cast() const {
    std::vector<U> out(data_.begin(), data_.end());
    return BasicTensor<U>(shape_, std::move(out));
  }

  bool all_finite() const;

 private:
  Shape shape_;
  std::vector<T> data_;
  std::optional<std::vector<T>> grad_;
};

using Tensor = BasicTensor<float>;
using Tensor64 = BasicTensor<double>;

extern template class BasicTensor<float>;
extern template class BasicTensor<double>;

// Named learnable parameters in insertion order.
template <typename T>
class BasicParamRegistry {
 public:
  struct Entry {
    std::string name;
    BasicTensor<T> tensor;
  };

  BasicTensor<T>& add(std::string name, BasicTensor<T> tensor);

  BasicTensor<T>& get(std::string_view name);
  const BasicTensor<T>& get(std::string_view name) const;
  bool contains(std::string_view name) const;

  std::size_t size() const { return entries_.size(); }
  std::size_t parameter_count() const;

  std::vector<Entry>& entries() { return entries_; }
  const std::vector<Entry>& entries() const { return entries_; }

  void zero_grad();

  template <typename U>
  BasicParamRegistry<U> cast() const {
    BasicParamRegistry<U> out;
    for (const auto& e : entries_) out.add(e.name, e.tensor.template cast<U>());
    return out;
  }

 private:
  std::vector<Entry> entries_;
};

using ParamRegistry = BasicParamRegistry<float>;

extern template class BasicParamRegistry<float>;
extern template class BasicParamRegistry<double>;

}  // namespace priornet
