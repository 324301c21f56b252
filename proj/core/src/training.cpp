#include "priornet/training.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>

#include "priornet/errors.hpp"
#include "priornet/init.hpp"
#include "priornet/ops.hpp"

namespace priornet::training {

void TrainConfig::validate() const {
  if (!(adam.learning_rate >= 0.0)) throw std::invalid_argument("learning_rate: must be >= 0");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0)) throw std::invalid_argument("adam_beta1: must be in [0, 1)");
  if (!(adam.beta2 >= 0.0 && adam.beta2 < 1.0)) throw std::invalid_argument("adam_beta2: must be in [0, 1)");
  if (!(adam.epsilon > 0.0)) throw std::invalid_argument("adam_eps: must be positive");
  if (batch_size == 0) throw std::invalid_argument("batch_size: must be positive");
}

template <typename T>
RandomConvExtractor<T>::RandomConvExtractor(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::size_t in_channels[3] = {3, kWidth, kWidth};
  for (std::size_t layer = 0; layer < 3; ++layer) {
    const std::size_t fan_in = in_channels[layer] * 9;
    const double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
    BasicTensor<T> w({kWidth, in_channels[layer], 3, 3});
    for (auto& v : w.data()) v = static_cast<T>(static_cast<float>(init::uniform(rng, -bound, bound)));
    BasicTensor<T> b({kWidth});
    for (auto& v : b.data()) v = static_cast<T>(static_cast<float>(init::uniform(rng, -bound, bound)));
    weights_.push_back(std::move(w));
    biases_.push_back(std::move(b));
  }
}

template <typename T>
Var<T> RandomConvExtractor<T>::features(Var<T> image) const {
  Tape<T>& tape = image.tape();
  Var<T> x = image;
  for (std::size_t layer = 0; layer < 3; ++layer) {
    if (layer > 0) x = ops::subsample(x, 2);
    x = ops::relu(ops::conv2d(x, tape.constant(weights_[layer]), tape.constant(biases_[layer])));
  }
  return x;
}

double mse_loss(const Image& gt, const Image& out) {
  require_same_extent(gt, out, "mse_loss");
  double s = 0.0;
  for (std::size_t p = 0; p < gt.size(); ++p) {
    const double d = static_cast<double>(gt.data()[p]) - static_cast<double>(out.data()[p]);
    s += d * d;
  }
  return s / static_cast<double>(gt.size());
}

template <typename T>
Var<T> mse_loss(Var<T> out, Var<T> gt) {
  if (out.shape() != gt.shape()) {
    throw ShapeError("mse_loss: shapes differ " + shape_to_string(out.shape()) + " vs " + shape_to_string(gt.shape()));
  }
  return ops::mean(ops::square(ops::sub(out, gt)));
}

template <typename T>
Var<T> perceptual_loss(Var<T> out, Var<T> gt, const FeatureExtractor<T>& fx) {
  if (out.shape() != gt.shape()) {
    throw ShapeError("perceptual_loss: shapes differ " + shape_to_string(out.shape()) + " vs " +
                     shape_to_string(gt.shape()));
  }
  return ops::mean(ops::square(ops::sub(fx.features(out), fx.features(gt))));
}

double perceptual_loss(std::span<const Image> gt, std::span<const Image> out, const FeatureExtractor<float>& fx) {
  if (gt.size() != out.size() || gt.empty()) throw std::invalid_argument("perceptual_loss: batch sizes differ or empty");
  double total = 0.0;
  for (std::size_t n = 0; n < gt.size(); ++n) {
    Tape<float> tape;
    total += perceptual_loss(tape.constant(out[n].to_tensor()), tape.constant(gt[n].to_tensor()), fx).value()[0];
  }
  return total / static_cast<double>(gt.size());
}

template <typename T>
void adam_step(BasicParamRegistry<T>& params, AdamState<T>& state, const AdamConfig& config) {
  auto& entries = params.entries();
  if (state.step == 0 && state.m.empty()) {
    for (const auto& e : entries) {
      state.m.emplace_back(e.tensor.numel(), 0.0);
      state.v.emplace_back(e.tensor.numel(), 0.0);
    }
  }
  if (state.m.size() != entries.size()) {
    throw ShapeError("adam_step: optimizer state has " + std::to_string(state.m.size()) + " slots for " +
                     std::to_string(entries.size()) + " parameters");
  }
  for (std::size_t k = 0; k < entries.size(); ++k) {
    if (state.m[k].size() != entries[k].tensor.numel()) {
      throw ShapeError("adam_step: parameter '" + entries[k].name + "' changed size between steps");
    }
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t k = 0; k < entries.size(); ++k) {
    auto& tensor = entries[k].tensor;
    if (!tensor.has_grad()) continue;
    const auto g = tensor.grad();
    auto p = tensor.data();
    auto& m = state.m[k];
    auto& v = state.v[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double gi = g[i];
      m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * gi;
      v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * gi * gi;
      const double update = config.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + config.epsilon);
      p[i] = static_cast<T>(static_cast<double>(p[i]) - update);
    }
  }
}

TrainResult train(model::ModelWeights initial, std::span<const TrainingPair> dataset, const TrainConfig& config,
                  const FeatureExtractor<float>* extractor, const ProgressFn& progress) {
  config.validate();
  if (dataset.empty()) throw std::invalid_argument("train: dataset is empty");
  for (const auto& pair : dataset) {
    require_same_extent(pair.hazy, pair.clean, "train");
    if (pair.hazy.height() < model::kMinAttentionExtent || pair.hazy.width() < model::kMinAttentionExtent) {
      throw ShapeError("train: image '" + pair.id + "' is smaller than 8x8");
    }
  }
  RandomConvExtractor<float> default_extractor;
  const FeatureExtractor<float>& fx = extractor ? *extractor : default_extractor;

  TrainResult result{std::move(initial), {}};
  auto& params = result.weights.params;
  const auto& net = result.weights.config;
  AdamState<float> state;
  std::mt19937_64 rng(config.seed);

  std::vector<std::size_t> order(dataset.size());
  std::size_t cursor = order.size();
  auto next_index = [&]() {
    if (cursor == order.size()) {
      for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
      for (std::size_t k = order.size(); k > 1; --k) std::swap(order[k - 1], order[rng() % k]);
      cursor = 0;
    }
    return order[cursor++];
  };

  const std::size_t batch = std::min(config.batch_size, dataset.size());
  std::vector<Tensor> hazy, clean;
  for (const auto& pair : dataset) {
    hazy.push_back(pair.hazy.to_tensor());
    clean.push_back(pair.clean.to_tensor());
  }

  result.history.reserve(config.iterations);
  for (std::size_t it = 0; it < config.iterations; ++it) {
    params.zero_grad();
    LossBreakdown loss;
    for (std::size_t b = 0; b < batch; ++b) {
      const std::size_t idx = next_index();
      Tape<float> tape;
      const Var<float> input = tape.constant(hazy[idx]);
      const Var<float> gt = tape.constant(clean[idx]);
      const Var<float> out = model::dehaze_graph(params, net, input);
      const Var<float> mse = mse_loss(out, gt);
      loss.mse += static_cast<double>(mse.value()[0]) / static_cast<double>(batch);
      Var<float> objective = ops::scale(mse, 1.0f / static_cast<float>(batch));
      if (config.perceptual_enabled) {
        const Var<float> perc = perceptual_loss(out, gt, fx);
        loss.perceptual += static_cast<double>(perc.value()[0]) / static_cast<double>(batch);
        objective = ops::add(objective, ops::scale(perc, static_cast<float>(kPerceptualWeight / static_cast<double>(batch))));
      }
      tape.backward(objective);
    }
    loss.total = loss.mse + loss.beta * loss.perceptual;
    if (!std::isfinite(loss.total)) {
      throw NumericalAbort("non-finite loss at iteration " + std::to_string(it), it);
    }
    result.history.push_back(loss);
    adam_step(params, state, config.adam);
    for (const auto& e : params.entries()) {
      if (!e.tensor.all_finite()) {
        throw NumericalAbort("non-finite parameter '" + e.name + "' after iteration " + std::to_string(it), it);
      }
    }
    if (progress) progress(it, loss);
    if (config.checkpoint_every > 0 && (it + 1) % config.checkpoint_every == 0 && !config.checkpoint_prefix.empty()) {
      auto path = config.checkpoint_prefix;
      path += ".iter" + std::to_string(it + 1) + ".prnw";
      model::save_weights(result.weights, path);
    }
  }
  params.zero_grad();
  for (auto& e : params.entries()) e.tensor.drop_grad();
  return result;
}

void write_loss_csv(std::ostream& out, std::span<const LossBreakdown> history) {
  out << "iteration,mse,perceptual,total\n";
  char line[160];
  for (std::size_t k = 0; k < history.size(); ++k) {
    std::snprintf(line, sizeof line, "%zu,%.9g,%.9g,%.9g\n", k, history[k].mse, history[k].perceptual, history[k].total);
    out << line;
  }
}

template class RandomConvExtractor<float>;
template class RandomConvExtractor<double>;
template Var<float> mse_loss(Var<float>, Var<float>);
template Var<double> mse_loss(Var<double>, Var<double>);
template Var<float> perceptual_loss(Var<float>, Var<float>, const FeatureExtractor<float>&);
template Var<double> perceptual_loss(Var<double>, Var<double>, const FeatureExtractor<double>&);
template void adam_step(BasicParamRegistry<float>&, AdamState<float>&, const AdamConfig&);
template void adam_step(BasicParamRegistry<double>&, AdamState<double>&, const AdamConfig&);

}  // namespace priornet::training
