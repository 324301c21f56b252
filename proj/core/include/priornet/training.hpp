#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "priornet/autodiff.hpp"
#include "priornet/image.hpp"
#include "priornet/model.hpp"

namespace priornet::training {

inline constexpr double kPerceptualWeight = 0.1;

struct LossBreakdown {
  double mse = 0.0;
  double perceptual = 0.0;
  double beta = kPerceptualWeight;
  double total = 0.0;
};

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct TrainConfig {
  AdamConfig adam;
  std::size_t batch_size = 4;
  std::size_t iterations = 1000;
  std::uint64_t seed = 0;
  bool perceptual_enabled = false;
  std::size_t checkpoint_every = 0;  // 0 disables checkpoints
  std::filesystem::path checkpoint_prefix;

  void validate() const;
};

// Frozen feature network for the perceptual term. Its weights are tape
// constants and never enter the trainable registry.
template <typename T>
class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;
  virtual std::string id() const = 0;
  virtual Var<T> features(Var<T> image) const = 0;
};

template <typename T>
class IdentityExtractor final : public FeatureExtractor<T> {
 public:
  std::string id() const override { return "identity"; }
  Var<T> features(Var<T> image) const override { return image; }
};

// Three 3x3 conv + ReLU layers (3 -> 8 -> 8 -> 8) with stride-2 decimation
// between layers, weights drawn from a fixed seed.
template <typename T>
class RandomConvExtractor final : public FeatureExtractor<T> {
 public:
  static constexpr std::uint64_t kDefaultSeed = 0x5eed'f00d;
  static constexpr std::size_t kWidth = 8;

  explicit RandomConvExtractor(std::uint64_t seed = kDefaultSeed);
  std::string id() const override { return "rand-conv-v1"; }
  Var<T> features(Var<T> image) const override;

  const BasicTensor<T>& weight(std::size_t layer) const { return weights_.at(layer); }
  const BasicTensor<T>& bias(std::size_t layer) const { return biases_.at(layer); }

 private:
  std::vector<BasicTensor<T>> weights_;
  std::vector<BasicTensor<T>> biases_;
};

// Mean of squared differences over every sample, accumulated in double.
double mse_loss(const Image& gt, const Image& out);
template <typename T>
Var<T> mse_loss(Var<T> out, Var<T> gt);

// Mean squared feature difference for one pair.
template <typename T>
Var<T> perceptual_loss(Var<T> out, Var<T> gt, const FeatureExtractor<T>& fx);
// Batch mean of per-pair mean squared feature differences.
double perceptual_loss(std::span<const Image> gt, std::span<const Image> out, const FeatureExtractor<float>& fx);

template <typename T>
struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  std::uint64_t step = 0;
};

// One bias-corrected Adam update from the gradients stored in `params`.
// Parameters without a gradient buffer are treated as having zero gradient.
template <typename T>
void adam_step(BasicParamRegistry<T>& params, AdamState<T>& state, const AdamConfig& config);

struct TrainingPair {
  std::string id;
  Image hazy;
  Image clean;
};

struct TrainResult {
  model::ModelWeights weights;
  std::vector<LossBreakdown> history;
};

// Called after every iteration with its index and losses.
using ProgressFn = std::function<void(std::size_t iteration, const LossBreakdown&)>;

// Adam on mean-over-batch (mse + beta * perceptual). Batches are drawn from a
// seeded per-epoch shuffle. Throws NumericalAbort on a non-finite loss.
TrainResult train(model::ModelWeights initial, std::span<const TrainingPair> dataset, const TrainConfig& config,
                  const FeatureExtractor<float>* extractor = nullptr, const ProgressFn& progress = {});

// CSV with header "iteration,mse,perceptual,total".
void write_loss_csv(std::ostream& out, std::span<const LossBreakdown> history);

}  // namespace priornet::training
