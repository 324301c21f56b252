#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace priornet::cli {

namespace fs = std::filesystem;

struct SceneArgs {
  std::size_t count = 10;
  std::size_t height = 64;
  std::size_t width = 64;
  std::uint64_t seed = 0;
  fs::path out;
};

struct SynthArgs {
  fs::path manifest;
  fs::path config;
  fs::path out;
};

struct TrainArgs {
  fs::path manifest;
  fs::path config;
  fs::path out;
  fs::path loss_csv;
  bool quiet = false;
};

struct DehazeArgs {
  fs::path weights;
  fs::path input;
  fs::path output;
  fs::path manifest;
  fs::path out_dir;
};

struct EvalArgs {
  fs::path weights;
  fs::path manifest;
  fs::path report;
};

struct DcpArgs {
  fs::path input;
  fs::path output;
  fs::path manifest;
  fs::path out_dir;
  fs::path report;
  bool box_refinement = false;
};

struct InfoArgs {
  fs::path weights;
};

int run_scenes(const SceneArgs& args);
int run_synth(const SynthArgs& args);
int run_train(const TrainArgs& args);
int run_dehaze(const DehazeArgs& args);
int run_eval(const EvalArgs& args);
int run_dcp(const DcpArgs& args);
int run_info(const InfoArgs& args);

}  // namespace priornet::cli
