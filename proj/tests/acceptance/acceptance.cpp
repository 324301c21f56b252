// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// hard failure. Soft checks print WARN and do not affect the exit code.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <sstream>

#include "acceptance.hpp"
#include "gradient_cases.hpp"
#include "priornet/haze.hpp"
#include "priornet/metrics.hpp"
#include "priornet/model.hpp"
#include "priornet/synth.hpp"
#include "priornet/training.hpp"

using namespace priornet;
using acceptance::Verdict;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void report(const char* id, const char* title, const Verdict& v) {
  if (!v.pass) ++failures;
  std::printf("%s %s %s: %s\n", v.pass ? "PASS" : "FAIL", id, title, v.detail.c_str());
  std::fflush(stdout);
}

void warn(const char* id, const std::string& detail) {
  std::printf("WARN %s %s\n", id, detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// C1 -------------------------------------------------------------------------

Verdict gradient_suite() {
  constexpr int kInstances = 20;
  constexpr double kTol = 1e-4;
  const auto start = Clock::now();
  std::vector<testing::CaseSummary> summaries;
  for (const auto& c : testing::op_cases()) {
    std::mt19937_64 rng(testing::case_seed(c.name));
    testing::CaseSummary s{c.name};
    for (int n = 0; n < kInstances; ++n) s.add(c.make(rng, n).check(1e-3));
    summaries.push_back(s);
  }
  testing::CaseSummary full{"priornet"};
  for (int n = 0; n < kInstances; ++n) {
    model::PriorNetConfig config;
    config.bias_b = n % 2 ? 1.0f : 0.5f;
    full.add(testing::model_instance(config, 1000 + n, 8, n % 4 == 0).check(1e-3));
  }
  summaries.push_back(full);

  const double elapsed = seconds_since(start);
  bool ok = elapsed < 120.0;
  double worst = 0.0;
  std::string worst_name;
  std::size_t straddled = 0, checked = 0;
  std::ostringstream failed;
  for (const auto& s : summaries) {
    if (!s.passed(kTol)) {
      ok = false;
      failed << " [" << s.name << ": " << s.worst << ", unresolved " << s.unresolved << "]";
    }
    if (s.max_rel_error >= worst) {
      worst = s.max_rel_error;
      worst_name = s.name;
    }
    straddled += s.straddled;
    checked += s.checked;
  }
  return {ok, fmt("%zu cases x %d instances, %zu coordinates, max rel err %.2e (%s), %zu coordinates needed a step below h, %.1f s",
                  summaries.size(), kInstances, checked, worst, worst_name.c_str(), straddled, elapsed) +
                  failed.str()};
}

// C2 -------------------------------------------------------------------------

Verdict physics_round_trip() {
  const auto start = Clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<float> unit(0.0f, 1.0f);
  double worst = 0.0;
  std::size_t compared = 0, skipped = 0;
  for (int n = 0; n < 100; ++n) {
    Image clean(32, 32);
    for (auto& v : clean.data()) v = unit(rng);
    haze::HazeParams params;
    for (auto& a : params.airlight) a = 0.5f + 0.5f * unit(rng);
    params.transmission = TransmissionMap(32, 32);
    for (auto& t : params.transmission.data()) t = 0.05f + 0.95f * unit(rng);
    const float bias = 0.25f + 1.5f * unit(rng);
    const Image hazy = haze::synthesize_haze(clean, params);
    const Image restored = haze::restore(hazy, haze::ideal_k(hazy, params, bias));
    for (std::size_t p = 0; p < hazy.size(); ++p) {
      if (std::abs(static_cast<double>(hazy.data()[p]) - 1.0) < 1e-3) {
        ++skipped;
        continue;
      }
      worst = std::max(worst, std::abs(static_cast<double>(restored.data()[p]) - clean.data()[p]));
      ++compared;
    }
  }
  const double elapsed = seconds_since(start);
  return {worst <= 1e-5 && elapsed < 10.0, fmt("100 cases, %zu samples compared (%zu near I=1 skipped), max |J'-J| "
                                               "%.3e, %.2f s",
                                               compared, skipped, worst, elapsed)};
}

// C3 -------------------------------------------------------------------------

Verdict weight_budget() {
  const auto weights = model::build(model::PriorNetConfig{}, 7);
  const auto bytes = model::serialize(weights);
  const std::size_t count = weights.parameter_count();
  const bool in_band = bytes.size() >= 9216 && bytes.size() <= 36864;
  const auto info = acceptance::cli_info_reports_count();
  return {in_band && count == 2781 && info.pass,
          fmt("file %zu bytes, %zu params (%zu payload bytes); ", bytes.size(), count, count * 4) + info.detail};
}

// C4 / C5 --------------------------------------------------------------------

struct Corpus {
  std::vector<training::TrainingPair> train;
  std::vector<training::TrainingPair> held_out;
};

Corpus make_corpus() {
  io::SynthRanges ranges;  // A in [0.7, 1.0], beta in [0.6, 1.8]
  auto all = io::synthetic_corpus(31337, 25, 64, 64, ranges);
  Corpus c;
  c.train.assign(all.begin(), all.begin() + 20);
  c.held_out.assign(all.begin() + 20, all.end());
  return c;
}

double dataset_mse(const model::ModelWeights& w, const std::vector<training::TrainingPair>& data) {
  double s = 0.0;
  for (const auto& p : data) s += metrics::mse(model::dehaze(w, p.hazy), p.clean);
  return s / static_cast<double>(data.size());
}

struct VariantRun {
  bool completed = false;
  std::string error;
  double initial_mse = 0.0;
  double final_mse = 0.0;
  double hazy_psnr = 0.0;
  double dehazed_psnr = 0.0;
  double seconds = 0.0;
};

VariantRun train_variant(model::Variant variant, const Corpus& corpus) {
  VariantRun run;
  const auto start = Clock::now();
  model::PriorNetConfig config;
  config.variant = variant;
  training::TrainConfig tc;
  tc.iterations = 2000;
  tc.seed = 5;
  tc.perceptual_enabled = false;
  try {
    const auto initial = model::build(config, 5);
    run.initial_mse = dataset_mse(initial, corpus.train);
    const auto result = training::train(initial, corpus.train, tc);
    run.final_mse = dataset_mse(result.weights, corpus.train);
    for (const auto& p : corpus.held_out) {
      run.hazy_psnr += metrics::psnr(p.hazy, p.clean) / static_cast<double>(corpus.held_out.size());
      run.dehazed_psnr +=
          metrics::psnr(model::dehaze(result.weights, p.hazy), p.clean) / static_cast<double>(corpus.held_out.size());
    }
    run.completed = true;
  } catch (const std::exception& e) {
    run.error = e.what();
  }
  run.seconds = seconds_since(start);
  return run;
}

Verdict training_converges(const VariantRun& r) {
  if (!r.completed) return {false, "training aborted: " + r.error};
  const bool a = r.final_mse < 0.5 * r.initial_mse;
  const bool b = r.dehazed_psnr >= r.hazy_psnr + 2.0;
  return {a && b && r.seconds < 900.0,
          fmt("(a) train MSE %.5f -> %.5f (ratio %.3f, need < 0.5) %s; (b) held-out PSNR hazy %.2f dB -> dehazed "
              "%.2f dB (gain %+.2f, need >= 2) %s; %.0f s",
              r.initial_mse, r.final_mse, r.final_mse / r.initial_mse, a ? "ok" : "FAILED", r.hazy_psnr,
              r.dehazed_psnr, r.dehazed_psnr - r.hazy_psnr, b ? "ok" : "FAILED", r.seconds)};
}

Verdict variants_train(const Corpus& corpus, const VariantRun& full) {
  std::map<model::Variant, VariantRun> runs;
  runs[model::Variant::kFull] = full;
  for (auto v : {model::Variant::kKernel3Only, model::Variant::kNoMia, model::Variant::kChannelAttentionOnly}) {
    runs[v] = train_variant(v, corpus);
  }
  bool ok = true;
  std::ostringstream detail;
  for (const auto& [v, r] : runs) {
    ok = ok && r.completed;
    detail << model::variant_name(v) << " "
           << (r.completed ? fmt("%.2f dB", r.dehazed_psnr) : "ABORTED (" + r.error + ")") << "; ";
  }
  const double p_full = runs[model::Variant::kFull].dehazed_psnr;
  const double p_nomia = runs[model::Variant::kNoMia].dehazed_psnr;
  const double p_k3 = runs[model::Variant::kKernel3Only].dehazed_psnr;
  if (p_full < p_nomia) warn("C5", fmt("soft check full >= no_mia not met (%.2f < %.2f dB)", p_full, p_nomia));
  if (p_nomia < p_k3) warn("C5", fmt("soft check 5x5 >= 3x3 not met (no_mia %.2f < kernel3_only %.2f dB)", p_nomia, p_k3));
  detail << "hazy input " << fmt("%.2f dB", full.hazy_psnr);
  return {ok, detail.str()};
}

// C6 -------------------------------------------------------------------------

GrayMap exhaustive_dark_channel(const Image& img, std::size_t patch) {
  const long h = static_cast<long>(img.height()), w = static_cast<long>(img.width()), r = static_cast<long>(patch / 2);
  GrayMap out(img.height(), img.width());
  for (long i = 0; i < h; ++i)
    for (long j = 0; j < w; ++j) {
      float m = 1e30f;
      for (long di = -r; di <= r; ++di)
        for (long dj = -r; dj <= r; ++dj) {
          const long y = std::clamp(i + di, 0L, h - 1), x = std::clamp(j + dj, 0L, w - 1);
          for (std::size_t c = 0; c < 3; ++c) m = std::min(m, img.at(c, y, x));
        }
      out.at(i, j) = m;
    }
  return out;
}

Verdict dcp_baseline() {
  int improved = 0;
  std::ostringstream gains;
  for (int n = 0; n < 10; ++n) {
    const auto scene = haze::make_scene(500 + n, 64, 64);
    haze::HazeParams params;
    params.airlight = {0.9f, 0.9f, 0.9f};
    params.transmission = haze::uniform_transmission(64, 64, 0.6f);
    const Image hazy = haze::synthesize_haze(scene.clean, params);
    const double before = metrics::psnr(hazy, scene.clean);
    const double after = metrics::psnr(haze::dcp_dehaze(hazy), scene.clean);
    if (after > before) ++improved;
    gains << fmt("%+.1f", after - before) << (n < 9 ? " " : "");
  }
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<float> unit(0.0f, 1.0f);
  const std::size_t patches[] = {1, 3, 5, 7, 15};
  int exact = 0;
  for (int n = 0; n < 100; ++n) {
    Image img(8, 8);
    for (auto& v : img.data()) v = unit(rng);
    const std::size_t patch = patches[n % 5];
    if (haze::dark_channel(img, patch) == exhaustive_dark_channel(img, patch)) ++exact;
  }
  return {improved >= 8 && exact == 100, fmt("PSNR improved on %d/10 images (gains dB: %s); dark channel exact on "
                                             "%d/100 random 8x8 images",
                                             improved, gains.str().c_str(), exact)};
}

// C7 -------------------------------------------------------------------------

// Direct windowed SSIM: 2-D Gaussian weights, moments summed per window.
double naive_ssim(const Image& a, const Image& b) {
  constexpr int kWin = 11;
  constexpr double kSigma = 1.5, c1 = 1e-4, c2 = 9e-4;
  double g[kWin], gsum = 0.0;
  for (int k = 0; k < kWin; ++k) gsum += g[k] = std::exp(-(k - 5.0) * (k - 5.0) / (2 * kSigma * kSigma));
  double total = 0.0;
  std::size_t windows = 0;
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t i = 0; i + kWin <= a.height(); ++i)
      for (std::size_t j = 0; j + kWin <= a.width(); ++j) {
        double mx = 0, my = 0;
        for (int u = 0; u < kWin; ++u)
          for (int v = 0; v < kWin; ++v) {
            const double wt = g[u] * g[v] / (gsum * gsum);
            mx += wt * a.at(c, i + u, j + v);
            my += wt * b.at(c, i + u, j + v);
          }
        double vx = 0, vy = 0, cov = 0;
        for (int u = 0; u < kWin; ++u)
          for (int v = 0; v < kWin; ++v) {
            const double wt = g[u] * g[v] / (gsum * gsum);
            const double dx = a.at(c, i + u, j + v) - mx, dy = b.at(c, i + u, j + v) - my;
            vx += wt * dx * dx;
            vy += wt * dy * dy;
            cov += wt * dx * dy;
          }
        total += (2 * mx * my + c1) * (2 * cov + c2) / ((mx * mx + my * my + c1) * (vx + vy + c2));
        ++windows;
      }
  return total / static_cast<double>(windows);
}

Verdict metric_oracles() {
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<float> unit(0.0f, 1.0f);
  double worst = 0.0;
  for (int n = 0; n < 50; ++n) {
    Image a(16, 16), b(16, 16);
    for (auto& v : a.data()) v = unit(rng);
    // Mix of related and unrelated pairs so SSIM spans its range.
    const float mix = static_cast<float>(n) / 49.0f;
    for (std::size_t p = 0; p < a.size(); ++p) b.data()[p] = mix * unit(rng) + (1.0f - mix) * a.data()[p];
    worst = std::max(worst, std::abs(metrics::ssim(a, b) - naive_ssim(a, b)));
  }
  const double p = metrics::psnr_from_mse(0.01);
  const double perr = std::abs(p - 20.0);
  return {worst <= 1e-6 && perr <= 1e-9,
          fmt("ssim max |diff| vs direct formula %.2e over 50 pairs; psnr(mse=0.01) = %.12f dB (err %.1e)", worst, p,
              perr)};
}

}  // namespace

int main() {
  const auto start = Clock::now();
  report("C1", "gradient suite", gradient_suite());
  report("C2", "physics round-trip", physics_round_trip());
  report("C3", "weight budget", weight_budget());
  const Corpus corpus = make_corpus();
  const VariantRun full = train_variant(model::Variant::kFull, corpus);
  report("C4", "synthetic training", training_converges(full));
  report("C5", "variants", variants_train(corpus, full));
  report("C6", "dcp baseline", dcp_baseline());
  report("C7", "metric oracles", metric_oracles());
  report("C8", "cli determinism", acceptance::cli_deterministic());
  std::printf("%s: %d hard failure(s), %.0f s total\n", failures ? "FAILED" : "ALL PASSED", failures,
              seconds_since(start));
  return failures ? 1 : 0;
}
