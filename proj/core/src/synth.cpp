#include "priornet/synth.hpp"

#include <cstdio>
#include <sstream>

#include "priornet/init.hpp"

namespace priornet::io {

HazeSample sample_haze(std::mt19937_64& rng, const SynthRanges& ranges) {
  HazeSample s;
  s.airlight = static_cast<float>(init::uniform(rng, ranges.a_min, ranges.a_max));
  s.beta = static_cast<float>(init::uniform(rng, ranges.beta_min, ranges.beta_max));
  return s;
}

haze::HazeParams haze_params(const DepthMap& depth, const HazeSample& sample) {
  haze::HazeParams p;
  p.airlight = {sample.airlight, sample.airlight, sample.airlight};
  p.beta_scatter = sample.beta;
  p.transmission = haze::transmission_from_depth(depth, sample.beta);
  return p;
}

std::string sidecar_text(const HazeSample& sample) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "A = %.9g\nbeta = %.9g\n", sample.airlight, sample.beta);
  return buf;
}

HazeSample parse_sidecar(const std::string& text) {
  HazeSample s;
  bool have_a = false;
  bool have_beta = false;
  std::istringstream in(text);
  std::string key, eq;
  float value = 0.0f;
  while (in >> key >> eq >> value) {
    if (eq != "=") break;
    if (key == "A") {
      s.airlight = value;
      have_a = true;
    } else if (key == "beta") {
      s.beta = value;
      have_beta = true;
    }
  }
  if (!have_a || !have_beta) throw FormatError("sidecar must define A and beta");
  return s;
}

std::uint64_t scene_seed(std::uint64_t seed, std::size_t index) { return seed * 1000003ull + index; }

std::vector<training::TrainingPair> synthetic_corpus(std::uint64_t seed, std::size_t count, std::size_t height,
                                                     std::size_t width, const SynthRanges& ranges) {
  std::mt19937_64 rng(seed);
  std::vector<training::TrainingPair> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    auto scene = haze::make_scene(scene_seed(seed, i), height, width);
    const auto params = haze_params(scene.depth, sample_haze(rng, ranges));
    out.push_back({"scene" + std::to_string(i), haze::synthesize_haze(scene.clean, params), std::move(scene.clean)});
  }
  return out;
}

}  // namespace priornet::io
