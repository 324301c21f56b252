#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "priornet/autodiff.hpp"
#include "priornet/ops.hpp"
#include "priornet/tensor.hpp"

namespace priornet::testing {

// Central finite differences in double against the tape's analytic gradient.
//
// A stencil x +- h that crosses a non-smooth point (ReLU zero, clamp bound,
// max-pool argmax switch) is not a valid oracle for the derivative at x. Such
// coordinates are detected through ops::kink_trace and re-checked with a
// one-sided stencil on the smooth side, then with the steps in
// `fallback_steps` until some stencil stays on the base piece.
struct GradCheckResult {
  double max_rel_error = 0.0;       // over every checked coordinate
  std::size_t checked = 0;
  std::size_t straddled = 0;        // coordinates that needed a step below h
  std::size_t unresolved = 0;       // no stencil stayed smooth
  std::string worst;

  bool passed(double tol) const { return max_rel_error < tol && unresolved == 0; }
};

using LossBuilder = std::function<Var<double>(Tape<double>&, const std::vector<Var<double>>&)>;

// |a - n| / max(|a|, |n|, floor). Below the floor a central difference in
// double is dominated by roundoff (about eps * |loss| / h), so tiny
// gradients are held to an absolute bound of tol * floor instead.
inline constexpr double kRelativeErrorFloor = 1e-8;

inline double relative_error(double analytic, double numeric, double floor = kRelativeErrorFloor) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

inline std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6e", v);
  return buf;
}

inline GradCheckResult gradcheck(std::vector<Tensor64*> leaves, const LossBuilder& build, double h = 1e-3,
                                 const std::vector<std::string>& names = {},
                                 const std::vector<double>& fallback_steps = {1e-4, 1e-5, 1e-6, 1e-7}) {
  for (auto* leaf : leaves) leaf->drop_grad();
  {
    Tape<double> tape;
    std::vector<Var<double>> vars;
    for (auto* leaf : leaves) vars.push_back(tape.parameter(*leaf));
    tape.backward(build(tape, vars));
  }
  struct Eval {
    double loss;
    std::uint64_t trace;
  };
  auto evaluate = [&]() {
    Tape<double> tape;
    std::vector<Var<double>> vars;
    for (auto* leaf : leaves) vars.push_back(tape.parameter(*leaf));
    ops::kink_trace::begin();
    const double loss = build(tape, vars).value()[0];
    return Eval{loss, ops::kink_trace::end()};
  };
  const Eval base = evaluate();

  GradCheckResult result;
  for (std::size_t l = 0; l < leaves.size(); ++l) {
    auto& leaf = *leaves[l];
    const std::vector<double> analytic = leaf.has_grad() ? std::vector<double>(leaf.grad().begin(), leaf.grad().end())
                                                         : std::vector<double>(leaf.numel(), 0.0);
    for (std::size_t i = 0; i < leaf.numel(); ++i) {
      const double saved = leaf[i];
      auto at = [&](double offset) {
        leaf[i] = saved + offset;
        const Eval e = evaluate();
        leaf[i] = saved;
        return e;
      };
      auto smooth = [&](const Eval& e) { return e.trace == base.trace; };
      // Central difference when both sides stay on the base piece, otherwise a
      // second-order one-sided difference on whichever side does.
      auto difference = [&](double step, double& out) {
        const Eval up = at(step), down = at(-step);
        if (smooth(up) && smooth(down)) {
          out = (up.loss - down.loss) / (2.0 * step);
          return true;
        }
        for (double dir : {1.0, -1.0}) {
          const Eval& near = dir > 0 ? up : down;
          if (!smooth(near)) continue;
          const Eval far = at(2.0 * dir * step);
          if (!smooth(far)) continue;
          out = (-3.0 * base.loss + 4.0 * near.loss - far.loss) / (2.0 * dir * step);
          return true;
        }
        return false;
      };
      double numeric = 0.0;
      if (!difference(h, numeric)) {
        ++result.straddled;
        bool resolved = false;
        for (double step : fallback_steps) {
          if ((resolved = difference(step, numeric))) break;
        }
        if (!resolved) ++result.unresolved;
      }
      const double err = relative_error(analytic[i], numeric);
      ++result.checked;
      if (err > result.max_rel_error || result.worst.empty()) {
        result.max_rel_error = std::max(result.max_rel_error, err);
        result.worst = (l < names.size() ? names[l] : "leaf" + std::to_string(l)) + "[" + std::to_string(i) +
                       "] analytic=" + sci(analytic[i]) + " numeric=" + sci(numeric);
      }
    }
  }
  return result;
}

inline Tensor64 random_tensor(Shape shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  Tensor64 t(std::move(shape));
  std::uniform_real_distribution<double> dist(lo, hi);
  for (auto& v : t.data()) v = dist(rng);
  return t;
}

}  // namespace priornet::testing
