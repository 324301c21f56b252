#include "priornet/init.hpp"

#include <cmath>

namespace priornet::init {

Tensor uniform_fan_in(Shape shape, std::size_t fan_in, std::mt19937_64& rng) {
  Tensor t(std::move(shape));
  const double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
  for (auto& v : t.data()) v = static_cast<float>(uniform(rng, -bound, bound));
  return t;
}

}  // namespace priornet::init
