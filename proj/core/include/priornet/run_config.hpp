#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "priornet/errors.hpp"
#include "priornet/model.hpp"
#include "priornet/training.hpp"

namespace priornet::io {

// Sampling ranges for synthetic haze: a grey airlight A and scattering beta.
struct SynthRanges {
  float a_min = 0.7f;
  float a_max = 1.0f;
  float beta_min = 0.6f;
  float beta_max = 1.8f;
};

struct RunConfig {
  model::PriorNetConfig model;
  training::TrainConfig train;
  SynthRanges synth;
  std::uint64_t seed = 0;
};

// Flat "key = value" file, '#' starts a comment. Unknown keys, duplicates and
// malformed values raise FormatError naming the line and key.
RunConfig parse_run_config(const std::string& text, const std::string& source = "config");
RunConfig load_run_config(const std::filesystem::path& path);

// Canonical text form; parse_run_config(to_string(c)) reproduces c.
std::string to_string(const RunConfig& config);

}  // namespace priornet::io
