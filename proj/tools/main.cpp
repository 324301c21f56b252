#include <exception>
#include <functional>
#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "priornet/errors.hpp"
#include "priornet/tensor.hpp"

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kIo = 2, kFormat = 3, kNumerical = 4 };

int guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const priornet::IoError& e) {
    std::cerr << "priornet: I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const priornet::FormatError& e) {
    std::cerr << "priornet: format error: " << e.what() << "\n";
    return kFormat;
  } catch (const priornet::ShapeError& e) {
    std::cerr << "priornet: format error: " << e.what() << "\n";
    return kFormat;
  } catch (const priornet::NumericalAbort& e) {
    std::cerr << "priornet: numerical abort at iteration " << e.iteration() << ": " << e.what() << "\n";
    return kNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "priornet: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "priornet: " << e.what() << "\n";
    return kIo;
  }
}

}  // namespace

int main(int argc, char** argv) {
  using namespace priornet::cli;
  CLI::App app{"PriorNet single-image dehazing: synthesis, training, inference and evaluation"};
  app.require_subcommand(1);

  SceneArgs scene;
  auto* scenes = app.add_subcommand("scenes", "Generate procedural clean/depth pairs and their manifest");
  scenes->add_option("--count", scene.count, "Number of scenes")->check(CLI::PositiveNumber);
  scenes->add_option("--height", scene.height, "Image height")->check(CLI::PositiveNumber);
  scenes->add_option("--width", scene.width, "Image width")->check(CLI::PositiveNumber);
  scenes->add_option("--seed", scene.seed, "Scene seed");
  scenes->add_option("--out", scene.out, "Output directory")->required();

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Haze clean images from a clean/depth manifest");
  synth_cmd->add_option("--manifest", synth.manifest, "clean<TAB>depth manifest")->required();
  synth_cmd->add_option("--config", synth.config, "Run configuration")->required();
  synth_cmd->add_option("--out", synth.out, "Output directory")->required();

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train a model on a hazy/gt manifest");
  train_cmd->add_option("--manifest", train.manifest, "hazy<TAB>gt manifest")->required();
  train_cmd->add_option("--config", train.config, "Run configuration")->required();
  train_cmd->add_option("--out", train.out, "Output weight file")->required();
  train_cmd->add_option("--loss-csv", train.loss_csv, "Loss history CSV (default: <out>.loss.csv)");
  train_cmd->add_flag("--quiet", train.quiet, "Suppress progress output");

  DehazeArgs dehaze;
  auto* dehaze_cmd = app.add_subcommand("dehaze", "Dehaze one image or every hazy image of a manifest");
  dehaze_cmd->add_option("--weights", dehaze.weights, "Weight file")->required();
  auto* d_in = dehaze_cmd->add_option("--in", dehaze.input, "Input PPM");
  auto* d_out = dehaze_cmd->add_option("--out", dehaze.output, "Output PPM");
  auto* d_man = dehaze_cmd->add_option("--manifest", dehaze.manifest, "hazy<TAB>gt manifest");
  auto* d_dir = dehaze_cmd->add_option("--out-dir", dehaze.out_dir, "Output directory for manifest mode");
  d_in->needs(d_out)->excludes(d_man);
  d_man->needs(d_dir);
  d_out->needs(d_in);
  d_dir->needs(d_man);

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Dehaze and score a hazy/gt manifest");
  eval_cmd->add_option("--weights", eval.weights, "Weight file")->required();
  eval_cmd->add_option("--manifest", eval.manifest, "hazy<TAB>gt manifest")->required();
  eval_cmd->add_option("--report", eval.report, "CSV report path")->required();

  DcpArgs dcp;
  auto* dcp_cmd = app.add_subcommand("dcp", "Dark channel prior baseline");
  auto* c_in = dcp_cmd->add_option("--in", dcp.input, "Input PPM");
  auto* c_out = dcp_cmd->add_option("--out", dcp.output, "Output PPM");
  auto* c_man = dcp_cmd->add_option("--manifest", dcp.manifest, "hazy<TAB>gt manifest");
  auto* c_dir = dcp_cmd->add_option("--out-dir", dcp.out_dir, "Output directory for manifest mode");
  auto* c_rep = dcp_cmd->add_option("--report", dcp.report, "CSV report path (manifest mode)");
  dcp_cmd->add_flag("--box", dcp.box_refinement, "Box-blur refinement instead of the guided filter");
  c_in->needs(c_out)->excludes(c_man);
  c_out->needs(c_in);
  c_man->needs(c_dir);
  c_dir->needs(c_man);
  c_rep->needs(c_man);

  InfoArgs info;
  auto* info_cmd = app.add_subcommand("info", "Describe a weight file");
  info_cmd->add_option("--weights", info.weights, "Weight file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  if (*dehaze_cmd && dehaze.input.empty() && dehaze.manifest.empty()) {
    std::cerr << "priornet dehaze: one of --in or --manifest is required\n";
    return kUsage;
  }
  if (*dcp_cmd && dcp.input.empty() && dcp.manifest.empty()) {
    std::cerr << "priornet dcp: one of --in or --manifest is required\n";
    return kUsage;
  }

  if (*scenes) return guarded([&] { return run_scenes(scene); });
  if (*synth_cmd) return guarded([&] { return run_synth(synth); });
  if (*train_cmd) return guarded([&] { return run_train(train); });
  if (*dehaze_cmd) return guarded([&] { return run_dehaze(dehaze); });
  if (*eval_cmd) return guarded([&] { return run_eval(eval); });
  if (*dcp_cmd) return guarded([&] { return run_dcp(dcp); });
  return guarded([&] { return run_info(info); });
}
