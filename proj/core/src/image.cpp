#include "priornet/image.hpp"

#include <algorithm>
#include <string>

namespace priornet {

Image::Image(std::size_t height, std::size_t width, float fill)
    : height_(height), width_(width), data_(kChannels * height * width, fill) {}

Image::Image(std::size_t height, std::size_t width, std::vector<float> data)
    : height_(height), width_(width), data_(std::move(data)) {
  if (data_.size() != kChannels * height * width) {
    throw ShapeError("image data length " + std::to_string(data_.size()) + " does not match 3x" +
                     std::to_string(height) + "x" + std::to_string(width));
  }
}

Image Image::from_tensor(const Tensor& t) {
  if (t.rank() != 3 || t.dim(0) != kChannels) {
    throw ShapeError("image tensor must be 3xHxW, got " + shape_to_string(t.shape()));
  }
  Image img(t.dim(1), t.dim(2), std::vector<float>(t.data().begin(), t.data().end()));
  img.clamp01();
  return img;
}

Tensor Image::to_tensor() const { return Tensor({kChannels, height_, width_}, data_); }

void Image::clamp01() {
  for (auto& v : data_) v = std::clamp(v, 0.0f, 1.0f);
}

void require_same_extent(const Image& a, const Image& b, const char* op) {
  if (!a.same_extent(b)) {
    throw ShapeError(std::string(op) + ": image extents differ (" + std::to_string(a.height()) + "x" +
                     std::to_string(a.width()) + " vs " + std::to_string(b.height()) + "x" +
                     std::to_string(b.width()) + ")");
  }
}

}  // namespace priornet
