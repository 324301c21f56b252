#include "priornet/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

namespace priornet::ops {
namespace {

[[noreturn]] void fail(const std::string& op, const std::string& what) { throw ShapeError(op + ": " + what); }

void require_rank(const Shape& s, std::size_t rank, const std::string& op, const std::string& operand) {
  if (s.size() != rank) {
    fail(op, operand + " must have rank " + std::to_string(rank) + ", got shape " + shape_to_string(s));
  }
}

void require_dim(std::size_t got, std::size_t want, const std::string& op, const std::string& dim) {
  if (got != want) fail(op, dim + " mismatch (" + std::to_string(got) + " vs " + std::to_string(want) + ")");
}

struct KinkState {
  bool active = false;
  std::uint64_t hash = 0xcbf29ce484222325ull;
};
thread_local KinkState kink_state;

inline void note_branch(std::uint64_t branch) {
  kink_state.hash = (kink_state.hash ^ branch) * 0x100000001b3ull;
}

template <typename T>
void accumulate(Tape<T>& tape, Var<T> v, auto&& fn) {
  if (v.requires_grad()) fn(tape.grad(v.id()));
}

template <typename T>
Var<T> conv2d_impl(Var<T> input, Var<T> weight, const Var<T>* bias) {
  const std::string op = "conv2d";
  const auto& xs = input.shape();
  const auto& ws = weight.shape();
  require_rank(xs, 3, op, "input");
  require_rank(ws, 4, op, "weight");
  const std::size_t cin = xs[0], h = xs[1], w = xs[2];
  const std::size_t cout = ws[0], k = ws[2];
  require_dim(ws[1], cin, op, "input channels");
  require_dim(ws[3], k, op, "kernel width vs height");
  if (k % 2 == 0) fail(op, "kernel size must be odd, got " + std::to_string(k));
  if (bias) {
    require_rank(bias->shape(), 1, op, "bias");
    require_dim(bias->shape()[0], cout, op, "bias length vs output channels");
  }
  const std::size_t pad = (k - 1) / 2;
  const std::size_t hp = h + 2 * pad, wp = w + 2 * pad;

  auto padded = std::make_shared<std::vector<T>>(cin * hp * wp, T(0));
  const auto x = input.value().data();
  for (std::size_t c = 0; c < cin; ++c)
    for (std::size_t i = 0; i < h; ++i)
      std::copy_n(&x[(c * h + i) * w], w, &(*padded)[(c * hp + i + pad) * wp + pad]);

  BasicTensor<T> out({cout, h, w});
  const auto wt = weight.value().data();
  auto o = out.data();
  for (std::size_t oc = 0; oc < cout; ++oc) {
    T* dst = &o[oc * h * w];
    std::fill_n(dst, h * w, bias ? bias->value()[oc] : T(0));
    for (std::size_t c = 0; c < cin; ++c) {
      for (std::size_t u = 0; u < k; ++u) {
        for (std::size_t v = 0; v < k; ++v) {
          const T wv = wt[((oc * cin + c) * k + u) * k + v];
          for (std::size_t i = 0; i < h; ++i) {
            const T* src = &(*padded)[(c * hp + i + u) * wp + v];
            T* row = dst + i * w;
            for (std::size_t j = 0; j < w; ++j) row[j] += wv * src[j];
          }
        }
      }
    }
  }

  std::vector<std::size_t> inputs{input.id(), weight.id()};
  if (bias) inputs.push_back(bias->id());
  const Var<T> b = bias ? *bias : Var<T>();
  const bool has_bias = bias != nullptr;
  return input.tape().record(
      std::move(out), std::move(inputs),
      [=](Tape<T>& tape, const std::vector<T>& g) {
        if (has_bias) {
          accumulate(tape, b, [&](std::vector<T>& gb) {
            for (std::size_t oc = 0; oc < cout; ++oc) {
              T s = 0;
              for (std::size_t p = 0; p < h * w; ++p) s += g[oc * h * w + p];
              gb[oc] += s;
            }
          });
        }
        accumulate(tape, weight, [&](std::vector<T>& gw) {
          for (std::size_t oc = 0; oc < cout; ++oc)
            for (std::size_t c = 0; c < cin; ++c)
              for (std::size_t u = 0; u < k; ++u)
                for (std::size_t v = 0; v < k; ++v) {
                  T s = 0;
                  for (std::size_t i = 0; i < h; ++i) {
                    const T* src = &(*padded)[(c * hp + i + u) * wp + v];
                    const T* gr = &g[(oc * h + i) * w];
                    for (std::size_t j = 0; j < w; ++j) s += gr[j] * src[j];
                  }
                  gw[((oc * cin + c) * k + u) * k + v] += s;
                }
        });
        accumulate(tape, input, [&](std::vector<T>& gx) {
          std::vector<T> gpad(cin * hp * wp, T(0));
          const auto wt2 = tape.value(weight.id()).data();
          for (std::size_t oc = 0; oc < cout; ++oc)
            for (std::size_t c = 0; c < cin; ++c)
              for (std::size_t u = 0; u < k; ++u)
                for (std::size_t v = 0; v < k; ++v) {
                  const T wv = wt2[((oc * cin + c) * k + u) * k + v];
                  for (std::size_t i = 0; i < h; ++i) {
                    T* dst = &gpad[(c * hp + i + u) * wp + v];
                    const T* gr = &g[(oc * h + i) * w];
                    for (std::size_t j = 0; j < w; ++j) dst[j] += wv * gr[j];
                  }
                }
          for (std::size_t c = 0; c < cin; ++c)
            for (std::size_t i = 0; i < h; ++i)
              for (std::size_t j = 0; j < w; ++j) gx[(c * h + i) * w + j] += gpad[(c * hp + i + pad) * wp + j + pad];
        });
      });
}

template <typename T>
Var<T> fully_connected_impl(Var<T> input, Var<T> weight, const Var<T>* bias) {
  const std::string op = "fully_connected";
  require_rank(weight.shape(), 2, op, "weight");
  const std::size_t m = weight.shape()[0], n = weight.shape()[1];
  require_dim(input.value().numel(), n, op, "input length vs weight columns");
  if (bias) require_dim(bias->value().numel(), m, op, "bias length vs weight rows");

  BasicTensor<T> out({m});
  const auto x = input.value().data();
  const auto wt = weight.value().data();
  for (std::size_t r = 0; r < m; ++r) {
    T s = bias ? bias->value()[r] : T(0);
    for (std::size_t c = 0; c < n; ++c) s += wt[r * n + c] * x[c];
    out[r] = s;
  }
  std::vector<std::size_t> inputs{input.id(), weight.id()};
  if (bias) inputs.push_back(bias->id());
  const Var<T> b = bias ? *bias : Var<T>();
  const bool has_bias = bias != nullptr;
  return input.tape().record(std::move(out), std::move(inputs), [=](Tape<T>& tape, const std::vector<T>& g) {
    const auto xv = tape.value(input.id()).data();
    const auto wv = tape.value(weight.id()).data();
    if (has_bias) {
      accumulate(tape, b, [&](std::vector<T>& gb) {
        for (std::size_t r = 0; r < m; ++r) gb[r] += g[r];
      });
    }
    accumulate(tape, weight, [&](std::vector<T>& gw) {
      for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < n; ++c) gw[r * n + c] += g[r] * xv[c];
    });
    accumulate(tape, input, [&](std::vector<T>& gx) {
      for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < n; ++c) gx[c] += g[r] * wv[r * n + c];
    });
  });
}

// Elementwise binary op with optional 1 x H x W broadcast over channels.
struct Broadcast {
  std::size_t channels = 1;
  std::size_t plane = 0;
  bool a_map = false;
  bool b_map = false;
};

Broadcast broadcast_plan(const Shape& a, const Shape& b, const std::string& op) {
  if (a == b) return {1, shape_numel(a), false, false};
  auto is_map_for = [](const Shape& map, const Shape& full) {
    return map.size() == 3 && full.size() == 3 && map[0] == 1 && map[1] == full[1] && map[2] == full[2];
  };
  if (is_map_for(a, b)) return {b[0], b[1] * b[2], true, false};
  if (is_map_for(b, a)) return {a[0], a[1] * a[2], false, true};
  fail(op, "incompatible shapes " + shape_to_string(a) + " and " + shape_to_string(b) +
               " (only equal shapes or 1xHxW against CxHxW are allowed)");
}

template <typename T, typename Fwd, typename DA, typename DB>
Var<T> binary(Var<T> a, Var<T> b, const std::string& op, Fwd fwd, DA da, DB db) {
  const Broadcast bc = broadcast_plan(a.shape(), b.shape(), op);
  const Shape out_shape = bc.a_map ? b.shape() : a.shape();
  BasicTensor<T> out(out_shape);
  const auto av = a.value().data();
  const auto bv = b.value().data();
  for (std::size_t c = 0; c < bc.channels; ++c)
    for (std::size_t p = 0; p < bc.plane; ++p) {
      const std::size_t idx = c * bc.plane + p;
      out[idx] = fwd(av[bc.a_map ? p : idx], bv[bc.b_map ? p : idx]);
    }
  return a.tape().record(std::move(out), {a.id(), b.id()}, [=](Tape<T>& tape, const std::vector<T>& g) {
    const auto avv = tape.value(a.id()).data();
    const auto bvv = tape.value(b.id()).data();
    if (a.requires_grad()) {
      auto& ga = tape.grad(a.id());
      for (std::size_t c = 0; c < bc.channels; ++c)
        for (std::size_t p = 0; p < bc.plane; ++p) {
          const std::size_t idx = c * bc.plane + p;
          const std::size_t ia = bc.a_map ? p : idx, ib = bc.b_map ? p : idx;
          ga[ia] += g[idx] * da(avv[ia], bvv[ib]);
        }
    }
    if (b.requires_grad()) {
      auto& gb = tape.grad(b.id());
      for (std::size_t c = 0; c < bc.channels; ++c)
        for (std::size_t p = 0; p < bc.plane; ++p) {
          const std::size_t idx = c * bc.plane + p;
          const std::size_t ia = bc.a_map ? p : idx, ib = bc.b_map ? p : idx;
          gb[ib] += g[idx] * db(avv[ia], bvv[ib]);
        }
    }
  });
}

// Elementwise unary op; dfn receives (input, output).
template <typename T, typename Fwd, typename Dfn>
Var<T> unary(Var<T> x, Fwd fwd, Dfn dfn) {
  BasicTensor<T> out(x.shape());
  const auto xv = x.value().data();
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = fwd(xv[i]);
  auto& tape = x.tape();
  const std::size_t self = tape.size();
  return tape.record(std::move(out), {x.id()}, [=](Tape<T>& t, const std::vector<T>& g) {
    const auto in = t.value(x.id()).data();
    const auto res = t.value(self).data();
    auto& gx = t.grad(x.id());
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * dfn(in[i], res[i]);
  });
}

}  // namespace

template <typename T>
Var<T> conv2d(Var<T> input, Var<T> weight, Var<T> bias) {
  return conv2d_impl(input, weight, &bias);
}
template <typename T>
Var<T> conv2d(Var<T> input, Var<T> weight) {
  return conv2d_impl<T>(input, weight, nullptr);
}

template <typename T>
Var<T> fully_connected(Var<T> input, Var<T> weight, Var<T> bias) {
  return fully_connected_impl(input, weight, &bias);
}
template <typename T>
Var<T> fully_connected(Var<T> input, Var<T> weight) {
  return fully_connected_impl<T>(input, weight, nullptr);
}

template <typename T>
Var<T> relu(Var<T> x) {
  if (kink_state.active)
    for (T v : x.value().data()) note_branch(v > T(0));
  return unary(
      x, [](T v) { return v > T(0) ? v : T(0); }, [](T v, T) { return v > T(0) ? T(1) : T(0); });
}

template <typename T>
Var<T> sigmoid(Var<T> x) {
  return unary(
      x, [](T v) { return T(1) / (T(1) + std::exp(-v)); }, [](T, T y) { return y * (T(1) - y); });
}

template <typename T>
Var<T> softmax(Var<T> x, std::size_t axis) {
  const auto& s = x.shape();
  if (axis >= s.size()) fail("softmax", "axis " + std::to_string(axis) + " out of range for " + shape_to_string(s));
  std::size_t outer = 1, inner = 1;
  for (std::size_t d = 0; d < axis; ++d) outer *= s[d];
  for (std::size_t d = axis + 1; d < s.size(); ++d) inner *= s[d];
  const std::size_t len = s[axis];

  BasicTensor<T> out(s);
  const auto xv = x.value().data();
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t in = 0; in < inner; ++in) {
      auto at = [&](std::size_t a) { return (o * len + a) * inner + in; };
      T mx = -std::numeric_limits<T>::infinity();
      for (std::size_t a = 0; a < len; ++a) mx = std::max(mx, xv[at(a)]);
      T total = 0;
      for (std::size_t a = 0; a < len; ++a) total += (out[at(a)] = std::exp(xv[at(a)] - mx));
      for (std::size_t a = 0; a < len; ++a) out[at(a)] /= total;
    }
  auto& tape = x.tape();
  const std::size_t self = tape.size();
  return tape.record(std::move(out), {x.id()}, [=](Tape<T>& t, const std::vector<T>& g) {
    const auto y = t.value(self).data();
    auto& gx = t.grad(x.id());
    for (std::size_t o = 0; o < outer; ++o)
      for (std::size_t in = 0; in < inner; ++in) {
        auto at = [&](std::size_t a) { return (o * len + a) * inner + in; };
        T dot = 0;
        for (std::size_t a = 0; a < len; ++a) dot += g[at(a)] * y[at(a)];
        for (std::size_t a = 0; a < len; ++a) gx[at(a)] += y[at(a)] * (g[at(a)] - dot);
      }
  });
}

template <typename T>
Var<T> avg_pool_global(Var<T> x) {
  require_rank(x.shape(), 3, "avg_pool_global", "input");
  const std::size_t c = x.shape()[0], plane = x.shape()[1] * x.shape()[2];
  BasicTensor<T> out({c});
  const auto xv = x.value().data();
  for (std::size_t k = 0; k < c; ++k) {
    double s = 0;
    for (std::size_t p = 0; p < plane; ++p) s += xv[k * plane + p];
    out[k] = static_cast<T>(s / static_cast<double>(plane));
  }
  return x.tape().record(std::move(out), {x.id()}, [=](Tape<T>& t, const std::vector<T>& g) {
    auto& gx = t.grad(x.id());
    const T inv = T(1) / static_cast<T>(plane);
    for (std::size_t k = 0; k < c; ++k)
      for (std::size_t p = 0; p < plane; ++p) gx[k * plane + p] += g[k] * inv;
  });
}

template <typename T>
Var<T> max_pool_global(Var<T> x) {
  require_rank(x.shape(), 3, "max_pool_global", "input");
  const std::size_t c = x.shape()[0], plane = x.shape()[1] * x.shape()[2];
  BasicTensor<T> out({c});
  std::vector<std::size_t> argmax(c);
  const auto xv = x.value().data();
  for (std::size_t k = 0; k < c; ++k) {
    std::size_t best = k * plane;
    for (std::size_t p = 1; p < plane; ++p)
      if (xv[k * plane + p] > xv[best]) best = k * plane + p;
    argmax[k] = best;
    out[k] = xv[best];
    if (kink_state.active) note_branch(best);
  }
  return x.tape().record(std::move(out), {x.id()}, [=](Tape<T>& t, const std::vector<T>& g) {
    auto& gx = t.grad(x.id());
    for (std::size_t k = 0; k < c; ++k) gx[argmax[k]] += g[k];
  });
}

template <typename T>
Var<T> sliding_avg_pool(Var<T> x, std::size_t window, std::size_t stride) {
  const std::string op = "sliding_avg_pool";
  require_rank(x.shape(), 3, op, "input");
  if (window == 0 || stride == 0) fail(op, "window and stride must be positive");
  const std::size_t c = x.shape()[0], h = x.shape()[1], w = x.shape()[2];
  if (h < window || w < window) {
    fail(op, "input " + std::to_string(h) + "x" + std::to_string(w) + " is smaller than the " +
                 std::to_string(window) + "x" + std::to_string(window) + " window; inputs must be at least " +
                 std::to_string(window) + "x" + std::to_string(window));
  }
  const std::size_t oh = (h - window) / stride + 1, ow = (w - window) / stride + 1;
  BasicTensor<T> out({c, oh, ow});
  const auto xv = x.value().data();
  const T inv = T(1) / static_cast<T>(window * window);
  for (std::size_t k = 0; k < c; ++k)
    for (std::size_t i = 0; i < oh; ++i)
      for (std::size_t j = 0; j < ow; ++j) {
        T s = 0;
        for (std::size_t u = 0; u < window; ++u)
          for (std::size_t v = 0; v < window; ++v) s += xv[(k * h + i * stride + u) * w + j * stride + v];
        out.at(k, i, j) = s * inv;
      }
  return x.tape().record(std::move(out), {x.id()}, [=](Tape<T>& t, const std::vector<T>& g) {
    auto& gx = t.grad(x.id());
    for (std::size_t k = 0; k < c; ++k)
      for (std::size_t i = 0; i < oh; ++i)
        for (std::size_t j = 0; j < ow; ++j) {
          const T gv = g[(k * oh + i) * ow + j] * inv;
          for (std::size_t u = 0; u < window; ++u)
            for (std::size_t v = 0; v < window; ++v) gx[(k * h + i * stride + u) * w + j * stride + v] += gv;
        }
  });
}

template <typename T>
Var<T> mul(Var<T> a, Var<T> b) {
  return binary(
      a, b, "mul", [](T x, T y) { return x * y; }, [](T, T y) { return y; }, [](T x, T) { return x; });
}

template <typename T>
Var<T> add(Var<T> a, Var<T> b) {
  return binary(
      a, b, "add", [](T x, T y) { return x + y; }, [](T, T) { return T(1); }, [](T, T) { return T(1); });
}

template <typename T>
Var<T> sub(Var<T> a, Var<T> b) {
  return binary(
      a, b, "sub", [](T x, T y) { return x - y; }, [](T, T) { return T(1); }, [](T, T) { return T(-1); });
}

template <typename T>
Var<T> scale_channels(Var<T> x, Var<T> s) {
  const std::string op = "scale_channels";
  require_rank(x.shape(), 3, op, "input");
  const std::size_t c = x.shape()[0], plane = x.shape()[1] * x.shape()[2];
  require_dim(s.value().numel(), c, op, "scale length vs channels");
  BasicTensor<T> out(x.shape());
  const auto xv = x.value().data();
  const auto sv = s.value().data();
  for (std::size_t k = 0; k < c; ++k)
    for (std::size_t p = 0; p < plane; ++p) out[k * plane + p] = xv[k * plane + p] * sv[k];
  return x.tape().record(std::move(out), {x.id(), s.id()}, [=](Tape<T>& t, const std::vector<T>& g) {
    const auto xv2 = t.value(x.id()).data();
    const auto sv2 = t.value(s.id()).data();
    accumulate(t, x, [&](std::vector<T>& gx) {
      for (std::size_t k = 0; k < c; ++k)
        for (std::size_t p = 0; p < plane; ++p) gx[k * plane + p] += g[k * plane + p] * sv2[k];
    });
    accumulate(t, s, [&](std::vector<T>& gs) {
      for (std::size_t k = 0; k < c; ++k) {
        T acc = 0;
        for (std::size_t p = 0; p < plane; ++p) acc += g[k * plane + p] * xv2[k * plane + p];
        gs[k] += acc;
      }
    });
  });
}

template <typename T>
Var<T> concat_channels(std::span<const Var<T>> xs) {
  const std::string op = "concat_channels";
  if (xs.empty()) fail(op, "no inputs");
  const auto& first = xs[0].shape();
  require_rank(first, 3, op, "input 0");
  std::size_t channels = 0;
  std::vector<std::size_t> ids;
  for (std::size_t n = 0; n < xs.size(); ++n) {
    const auto& s = xs[n].shape();
    require_rank(s, 3, op, "input " + std::to_string(n));
    require_dim(s[1], first[1], op, "height of input " + std::to_string(n));
    require_dim(s[2], first[2], op, "width of input " + std::to_string(n));
    channels += s[0];
    ids.push_back(xs[n].id());
  }
  BasicTensor<T> out({channels, first[1], first[2]});
  std::size_t offset = 0;
  for (const auto& x : xs) {
    const auto v = x.value().data();
    std::copy(v.begin(), v.end(), out.data().begin() + static_cast<std::ptrdiff_t>(offset));
    offset += v.size();
  }
  std::vector<Var<T>> parts(xs.begin(), xs.end());
  return xs[0].tape().record(std::move(out), std::move(ids), [parts](Tape<T>& t, const std::vector<T>& g) {
    std::size_t off = 0;
    for (const auto& p : parts) {
      const std::size_t n = p.value().numel();
      if (p.requires_grad()) {
        auto& gp = t.grad(p.id());
        for (std::size_t i = 0; i < n; ++i) gp[i] += g[off + i];
      }
      off += n;
    }
  });
}

template <typename T>
Var<T> reshape(Var<T> x, Shape shape) {
  BasicTensor<T> out = x.value().reshaped(std::move(shape));
  return x.tape().record(std::move(out), {x.id()}, [=](Tape<T>& t, const std::vector<T>& g) {
    auto& gx = t.grad(x.id());
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
  });
}

template <typename T>
Var<T> matmul(Var<T> a, Var<T> b) {
  const std::string op = "matmul";
  require_rank(a.shape(), 2, op, "left operand");
  require_rank(b.shape(), 2, op, "right operand");
  const std::size_t m = a.shape()[0], n = a.shape()[1], p = b.shape()[1];
  require_dim(b.shape()[0], n, op, "inner dimension");
  BasicTensor<T> out({m, p});
  const auto av = a.value().data();
  const auto bv = b.value().data();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      const T aik = av[i * n + k];
      for (std::size_t j = 0; j < p; ++j) out[i * p + j] += aik * bv[k * p + j];
    }
  return a.tape().record(std::move(out), {a.id(), b.id()}, [=](Tape<T>& t, const std::vector<T>& g) {
    const auto av2 = t.value(a.id()).data();
    const auto bv2 = t.value(b.id()).data();
    accumulate(t, a, [&](std::vector<T>& ga) {
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t k = 0; k < n; ++k) {
          T s = 0;
          for (std::size_t j = 0; j < p; ++j) s += g[i * p + j] * bv2[k * p + j];
          ga[i * n + k] += s;
        }
    });
    accumulate(t, b, [&](std::vector<T>& gb) {
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t k = 0; k < n; ++k) {
          const T aik = av2[i * n + k];
          for (std::size_t j = 0; j < p; ++j) gb[k * p + j] += aik * g[i * p + j];
        }
    });
  });
}

template <typename T>
Var<T> upsample_nearest(Var<T> x, std::size_t target_h, std::size_t target_w) {
  require_rank(x.shape(), 3, "upsample_nearest", "input");
  if (target_h == 0 || target_w == 0) fail("upsample_nearest", "target extents must be positive");
  const std::size_t c = x.shape()[0], h = x.shape()[1], w = x.shape()[2];
  std::vector<std::size_t> src(target_h * target_w);
  for (std::size_t i = 0; i < target_h; ++i)
    for (std::size_t j = 0; j < target_w; ++j) src[i * target_w + j] = (i * h / target_h) * w + (j * w / target_w);
  BasicTensor<T> out({c, target_h, target_w});
  const auto xv = x.value().data();
  const std::size_t plane = target_h * target_w;
  for (std::size_t k = 0; k < c; ++k)
    for (std::size_t p = 0; p < plane; ++p) out[k * plane + p] = xv[k * h * w + src[p]];
  return x.tape().record(std::move(out), {x.id()}, [=](Tape<T>& t, const std::vector<T>& g) {
    auto& gx = t.grad(x.id());
    for (std::size_t k = 0; k < c; ++k)
      for (std::size_t p = 0; p < plane; ++p) gx[k * h * w + src[p]] += g[k * plane + p];
  });
}

template <typename T>
Var<T> subsample(Var<T> x, std::size_t stride) {
  require_rank(x.shape(), 3, "subsample", "input");
  if (stride == 0) fail("subsample", "stride must be positive");
  const std::size_t c = x.shape()[0], h = x.shape()[1], w = x.shape()[2];
  const std::size_t oh = (h + stride - 1) / stride, ow = (w + stride - 1) / stride;
  BasicTensor<T> out({c, oh, ow});
  const auto& xv = x.value();
  for (std::size_t k = 0; k < c; ++k)
    for (std::size_t i = 0; i < oh; ++i)
      for (std::size_t j = 0; j < ow; ++j) out.at(k, i, j) = xv.at(k, i * stride, j * stride);
  return x.tape().record(std::move(out), {x.id()}, [=](Tape<T>& t, const std::vector<T>& g) {
    auto& gx = t.grad(x.id());
    for (std::size_t k = 0; k < c; ++k)
      for (std::size_t i = 0; i < oh; ++i)
        for (std::size_t j = 0; j < ow; ++j) gx[(k * h + i * stride) * w + j * stride] += g[(k * oh + i) * ow + j];
  });
}

template <typename T>
Var<T> scale(Var<T> x, T factor) {
  return unary(
      x, [factor](T v) { return v * factor; }, [factor](T, T) { return factor; });
}

template <typename T>
Var<T> add_scalar(Var<T> x, T value) {
  return unary(
      x, [value](T v) { return v + value; }, [](T, T) { return T(1); });
}

template <typename T>
Var<T> clamp(Var<T> x, T lo, T hi) {
  if (kink_state.active)
    for (T v : x.value().data()) note_branch(v <= lo ? 0 : (v < hi ? 1 : 2));
  return unary(
      x, [lo, hi](T v) { return std::clamp(v, lo, hi); },
      [lo, hi](T v, T) { return (v > lo && v < hi) ? T(1) : T(0); });
}

template <typename T>
Var<T> square(Var<T> x) {
  return unary(
      x, [](T v) { return v * v; }, [](T v, T) { return T(2) * v; });
}

template <typename T>
Var<T> sum(Var<T> x) {
  double s = 0;
  for (T v : x.value().data()) s += static_cast<double>(v);
  BasicTensor<T> out({1}, std::vector<T>{static_cast<T>(s)});
  return x.tape().record(std::move(out), {x.id()}, [=](Tape<T>& t, const std::vector<T>& g) {
    auto& gx = t.grad(x.id());
    for (auto& v : gx) v += g[0];
  });
}

template <typename T>
Var<T> mean(Var<T> x) {
  const std::size_t n = x.value().numel();
  if (n == 0) fail("mean", "empty tensor");
  double s = 0;
  for (T v : x.value().data()) s += static_cast<double>(v);
  BasicTensor<T> out({1}, std::vector<T>{static_cast<T>(s / static_cast<double>(n))});
  return x.tape().record(std::move(out), {x.id()}, [=](Tape<T>& t, const std::vector<T>& g) {
    auto& gx = t.grad(x.id());
    const T share = g[0] / static_cast<T>(n);
    for (auto& v : gx) v += share;
  });
}

#define PRIORNET_INSTANTIATE_OPS(T)                                       \
  template Var<T> conv2d(Var<T>, Var<T>, Var<T>);                         \
  template Var<T> conv2d(Var<T>, Var<T>);                                 \
  template Var<T> fully_connected(Var<T>, Var<T>, Var<T>);                \
  template Var<T> fully_connected(Var<T>, Var<T>);                        \
  template Var<T> relu(Var<T>);                                           \
  template Var<T> sigmoid(Var<T>);                                        \
  template Var<T> softmax(Var<T>, std::size_t);                           \
  template Var<T> avg_pool_global(Var<T>);                                \
  template Var<T> max_pool_global(Var<T>);                                \
  template Var<T> sliding_avg_pool(Var<T>, std::size_t, std::size_t);     \
  template Var<T> mul(Var<T>, Var<T>);                                    \
  template Var<T> add(Var<T>, Var<T>);                                    \
  template Var<T> sub(Var<T>, Var<T>);                                    \
  template Var<T> scale_channels(Var<T>, Var<T>);                         \
  template Var<T> concat_channels(std::span<const Var<T>>);               \
  template Var<T> reshape(Var<T>, Shape);                                 \
  template Var<T> matmul(Var<T>, Var<T>);                                 \
  template Var<T> upsample_nearest(Var<T>, std::size_t, std::size_t);     \
  template Var<T> subsample(Var<T>, std::size_t);                         \
  template Var<T> scale(Var<T>, T);                                       \
  template Var<T> add_scalar(Var<T>, T);                                  \
  template Var<T> clamp(Var<T>, T, T);                                    \
  template Var<T> square(Var<T>);                                         \
  template Var<T> sum(Var<T>);                                            \
  template Var<T> mean(Var<T>);

PRIORNET_INSTANTIATE_OPS(float)
PRIORNET_INSTANTIATE_OPS(double)

#undef PRIORNET_INSTANTIATE_OPS

namespace kink_trace {
void begin() { kink_state = KinkState{true}; }
std::uint64_t end() {
  kink_state.active = false;
  return kink_state.hash;
}
}  // namespace kink_trace

}  // namespace priornet::ops
