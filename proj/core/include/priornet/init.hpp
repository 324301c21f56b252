#pragma once

#include <cstddef>
#include <random>

#include "priornet/tensor.hpp"

namespace priornet::init {

// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
inline double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }
inline double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * unit(rng); }

// Samples uniformly in +-sqrt(1 / fan_in).
Tensor uniform_fan_in(Shape shape, std::size_t fan_in, std::mt19937_64& rng);

}  // namespace priornet::init
