#include "commands.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <vector>

#include "priornet/haze.hpp"
#include "priornet/manifest.hpp"
#include "priornet/metrics.hpp"
#include "priornet/model.hpp"
#include "priornet/netpbm.hpp"
#include "priornet/run_config.hpp"
#include "priornet/synth.hpp"
#include "priornet/training.hpp"

namespace priornet::cli {
namespace {

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

std::string format_row(const std::string& id, double psnr, double ssim) {
  char buf[64];
  std::snprintf(buf, sizeof buf, ",%.6f,%.6f", psnr, ssim);
  return id + buf;
}

// Scores every (restored, gt) pair in manifest order and writes the CSV report.
template <typename Restore>
void scored_batch(const io::DatasetManifest& manifest, const fs::path& report, const fs::path& out_dir,
                  Restore&& restore) {
  std::vector<metrics::QualityReport> rows;
  for (const auto& entry : manifest.entries) {
    const Image hazy = netpbm::read_image(entry.first);
    const Image gt = netpbm::read_image(entry.second);
    const Image out = restore(hazy);
    if (!out_dir.empty()) netpbm::write_image(out, out_dir / (entry.first.stem().string() + ".ppm"));
    rows.push_back(metrics::evaluate(out, gt, io::entry_id(entry)));
  }
  if (report.empty()) return;
  auto csv = open_out(report);
  csv << "image_id,psnr_db,ssim\n";
  double psnr_sum = 0.0;
  double ssim_sum = 0.0;
  for (const auto& r : rows) {
    csv << format_row(r.image_id, r.psnr_db, r.ssim) << "\n";
    psnr_sum += r.psnr_db;
    ssim_sum += r.ssim;
  }
  const double n = rows.empty() ? 1.0 : static_cast<double>(rows.size());
  csv << format_row("mean", psnr_sum / n, ssim_sum / n) << "\n";
  if (!csv) throw IoError("failed writing " + report.string());
  std::cout << "images: " << rows.size() << "\n" << format_row("mean", psnr_sum / n, ssim_sum / n) << "\n";
}

}  // namespace

int run_scenes(const SceneArgs& args) {
  ensure_dir(args.out);
  std::vector<io::ManifestEntry> entries;
  for (std::size_t i = 0; i < args.count; ++i) {
    const auto scene = haze::make_scene(io::scene_seed(args.seed, i), args.height, args.width);
    const std::string id = "scene" + std::to_string(i);
    const fs::path clean = args.out / (id + "_clean.ppm");
    const fs::path depth = args.out / (id + "_depth.pgm");
    netpbm::write_image(scene.clean, clean);
    netpbm::write_depth(scene.depth, depth);
    entries.push_back({clean, depth, i + 1});
  }
  io::write_manifest(args.out / "scenes.tsv", entries);
  std::cout << "wrote " << entries.size() << " scenes to " << args.out.string() << "\n";
  return 0;
}

int run_synth(const SynthArgs& args) {
  const auto config = io::load_run_config(args.config);
  const auto manifest = io::load_manifest(args.manifest);
  ensure_dir(args.out);
  std::mt19937_64 rng(config.seed);
  std::vector<io::ManifestEntry> pairs;
  for (const auto& entry : manifest.entries) {
    const Image clean = netpbm::read_image(entry.first);
    const DepthMap depth = netpbm::read_depth(entry.second);
    const auto sample = io::sample_haze(rng, config.synth);
    const Image hazy = haze::synthesize_haze(clean, io::haze_params(depth, sample));
    const std::string stem = entry.first.stem().string() + "_hazy";
    const fs::path hazy_path = args.out / (stem + ".ppm");
    netpbm::write_image(hazy, hazy_path);
    auto sidecar = open_out(args.out / (stem + ".txt"));
    sidecar << io::sidecar_text(sample);
    pairs.push_back({hazy_path, entry.first, entry.line});
  }
  io::write_manifest(args.out / "pairs.tsv", pairs);
  std::cout << "wrote " << pairs.size() << " hazy images to " << args.out.string() << "\n";
  return 0;
}

int run_train(const TrainArgs& args) {
  const auto config = io::load_run_config(args.config);
  const auto manifest = io::load_manifest(args.manifest);
  std::vector<training::TrainingPair> data;
  for (const auto& entry : manifest.entries) {
    data.push_back({io::entry_id(entry), netpbm::read_image(entry.first), netpbm::read_image(entry.second)});
  }
  if (data.empty()) throw FormatError(args.manifest.string() + ": manifest has no entries");

  auto train_config = config.train;
  if (train_config.checkpoint_every > 0) train_config.checkpoint_prefix = fs::path(args.out).replace_extension();
  const training::RandomConvExtractor<float> extractor;
  const std::size_t report_every = std::max<std::size_t>(1, train_config.iterations / 20);
  auto progress = [&](std::size_t it, const training::LossBreakdown& loss) {
    if (args.quiet || (it % report_every != 0 && it + 1 != train_config.iterations)) return;
    std::fprintf(stderr, "iter %zu  mse %.6g  perceptual %.6g  total %.6g\n", it, loss.mse, loss.perceptual,
                 loss.total);
  };
  auto result = training::train(model::build(config.model, config.seed), data, train_config,
                                train_config.perceptual_enabled ? &extractor : nullptr, progress);
  model::save_weights(result.weights, args.out);
  const fs::path csv_path = args.loss_csv.empty() ? fs::path(args.out.string() + ".loss.csv") : args.loss_csv;
  auto csv = open_out(csv_path);
  training::write_loss_csv(csv, result.history);
  if (!csv) throw IoError("failed writing " + csv_path.string());
  std::cout << "weights: " << args.out.string() << "\nloss history: " << csv_path.string() << "\n";
  return 0;
}

int run_dehaze(const DehazeArgs& args) {
  const auto weights = model::load_weights(args.weights);
  if (!args.input.empty()) {
    netpbm::write_image(model::dehaze(weights, netpbm::read_image(args.input)), args.output);
    return 0;
  }
  ensure_dir(args.out_dir);
  scored_batch(io::load_manifest(args.manifest), {}, args.out_dir,
               [&](const Image& hazy) { return model::dehaze(weights, hazy); });
  return 0;
}

int run_eval(const EvalArgs& args) {
  const auto weights = model::load_weights(args.weights);
  scored_batch(io::load_manifest(args.manifest), args.report, {},
               [&](const Image& hazy) { return model::dehaze(weights, hazy); });
  return 0;
}

int run_dcp(const DcpArgs& args) {
  haze::DcpOptions options;
  if (args.box_refinement) options.refinement = haze::Refinement::kBox;
  if (!args.input.empty()) {
    netpbm::write_image(haze::dcp_dehaze(netpbm::read_image(args.input), options), args.output);
    return 0;
  }
  ensure_dir(args.out_dir);
  scored_batch(io::load_manifest(args.manifest), args.report, args.out_dir,
               [&](const Image& hazy) { return haze::dcp_dehaze(hazy, options); });
  return 0;
}

int run_info(const InfoArgs& args) {
  const auto bytes = netpbm::read_file(args.weights);
  const auto weights = model::deserialize(bytes);
  const auto& c = weights.config;
  const auto kernels = c.kernel_sizes();
  std::cout << "format_version = " << weights.format_version << "\n"
            << "variant = " << model::variant_name(c.variant) << "\n"
            << "kernel_sizes = " << kernels[0] << "," << kernels[1] << "," << kernels[2] << "," << kernels[3] << ","
            << kernels[4] << "\n"
            << "channels_per_conv = " << c.channels_per_conv << "\n"
            << "mia_reduction = " << c.mia_reduction << "\n"
            << "bias_b = " << c.bias_b << "\n"
            << "parameters = " << weights.parameter_count() << "\n"
            << "payload_bytes = " << weights.parameter_count() * sizeof(float) << "\n"
            << "file_bytes = " << bytes.size() << "\n";
  for (const auto& e : weights.params.entries()) {
    std::cout << "  " << e.name << " " << shape_to_string(e.tensor.shape()) << "\n";
  }
  return 0;
}

}  // namespace priornet::cli
