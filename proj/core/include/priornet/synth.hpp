#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "priornet/haze.hpp"
#include "priornet/run_config.hpp"
#include "priornet/training.hpp"

namespace priornet::io {

// Grey airlight and scattering coefficient for one synthesized image.
struct HazeSample {
  float airlight = 1.0f;
  float beta = 1.0f;
};

// Draws A, then beta, uniformly from the configured ranges.
HazeSample sample_haze(std::mt19937_64& rng, const SynthRanges& ranges);

haze::HazeParams haze_params(const DepthMap& depth, const HazeSample& sample);

// "A = <value>\nbeta = <value>\n" sidecar text, round-trippable.
std::string sidecar_text(const HazeSample& sample);
HazeSample parse_sidecar(const std::string& text);

// Procedural scenes hazed with sampled parameters. Scene i uses seed
// seed * 1000003 + i; haze samples come from one stream seeded with `seed`.
std::vector<training::TrainingPair> synthetic_corpus(std::uint64_t seed, std::size_t count, std::size_t height,
                                                     std::size_t width, const SynthRanges& ranges);

std::uint64_t scene_seed(std::uint64_t seed, std::size_t index);

}  // namespace priornet::io
