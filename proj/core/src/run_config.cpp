#include "priornet/run_config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace priornet::io {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& value) {
  T out{};
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) throw std::invalid_argument("not a valid number: '" + value + "'");
  return out;
}

bool parse_bool(const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw std::invalid_argument("expected true/false, got '" + value + "'");
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table{
      {"kernel_size", [](RunConfig& c, const std::string& v) { c.model.kernel_size = parse_number<std::size_t>(v); }},
      {"channels_per_conv",
       [](RunConfig& c, const std::string& v) { c.model.channels_per_conv = parse_number<std::size_t>(v); }},
      {"mia_reduction", [](RunConfig& c, const std::string& v) { c.model.mia_reduction = parse_number<std::size_t>(v); }},
      {"bias_b", [](RunConfig& c, const std::string& v) { c.model.bias_b = parse_number<float>(v); }},
      {"variant",
       [](RunConfig& c, const std::string& v) {
         const auto parsed = model::parse_variant(v);
         if (!parsed) throw std::invalid_argument("unknown variant '" + v + "'");
         c.model.variant = *parsed;
       }},
      {"learning_rate", [](RunConfig& c, const std::string& v) { c.train.adam.learning_rate = parse_number<double>(v); }},
      {"adam_beta1", [](RunConfig& c, const std::string& v) { c.train.adam.beta1 = parse_number<double>(v); }},
      {"adam_beta2", [](RunConfig& c, const std::string& v) { c.train.adam.beta2 = parse_number<double>(v); }},
      {"adam_eps", [](RunConfig& c, const std::string& v) { c.train.adam.epsilon = parse_number<double>(v); }},
      {"batch_size", [](RunConfig& c, const std::string& v) { c.train.batch_size = parse_number<std::size_t>(v); }},
      {"iterations", [](RunConfig& c, const std::string& v) { c.train.iterations = parse_number<std::size_t>(v); }},
      {"perceptual_enabled", [](RunConfig& c, const std::string& v) { c.train.perceptual_enabled = parse_bool(v); }},
      {"checkpoint_every",
       [](RunConfig& c, const std::string& v) { c.train.checkpoint_every = parse_number<std::size_t>(v); }},
      {"seed",
       [](RunConfig& c, const std::string& v) {
         c.seed = parse_number<std::uint64_t>(v);
         c.train.seed = c.seed;
       }},
      {"A_min", [](RunConfig& c, const std::string& v) { c.synth.a_min = parse_number<float>(v); }},
      {"A_max", [](RunConfig& c, const std::string& v) { c.synth.a_max = parse_number<float>(v); }},
      {"beta_min", [](RunConfig& c, const std::string& v) { c.synth.beta_min = parse_number<float>(v); }},
      {"beta_max", [](RunConfig& c, const std::string& v) { c.synth.beta_max = parse_number<float>(v); }},
  };
  return table;
}

}  // namespace

RunConfig parse_run_config(const std::string& text, const std::string& source) {
  RunConfig config;
  std::istringstream in(text);
  std::string raw;
  std::size_t number = 0;
  std::set<std::string> seen;
  while (std::getline(in, raw)) {
    ++number;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const std::string at = source + ":" + std::to_string(number);
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError(at + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw FormatError(at + ": unknown key '" + key + "'");
    if (!seen.insert(key).second) throw FormatError(at + ": duplicate key '" + key + "'");
    try {
      it->second(config, value);
    } catch (const std::invalid_argument& e) {
      throw FormatError(at + ": key '" + key + "': " + e.what());
    }
  }
  try {
    config.model.validate();
    config.train.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(source + ": " + e.what());
  }
  const auto& s = config.synth;
  if (!(s.a_min >= 0.0f && s.a_min <= s.a_max && s.a_max <= 1.0f)) {
    throw FormatError(source + ": A_min/A_max must satisfy 0 <= A_min <= A_max <= 1");
  }
  if (!(s.beta_min >= 0.0f && s.beta_min <= s.beta_max)) {
    throw FormatError(source + ": beta_min/beta_max must satisfy 0 <= beta_min <= beta_max");
  }
  return config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_run_config(buffer.str(), path.string());
}

std::string to_string(const RunConfig& c) {
  std::ostringstream out;
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  out << "kernel_size = " << c.model.kernel_size << "\n"
      << "channels_per_conv = " << c.model.channels_per_conv << "\n"
      << "mia_reduction = " << c.model.mia_reduction << "\n"
      << "bias_b = " << num(c.model.bias_b) << "\n"
      << "variant = " << model::variant_name(c.model.variant) << "\n"
      << "learning_rate = " << num(c.train.adam.learning_rate) << "\n"
      << "adam_beta1 = " << num(c.train.adam.beta1) << "\n"
      << "adam_beta2 = " << num(c.train.adam.beta2) << "\n"
      << "adam_eps = " << num(c.train.adam.epsilon) << "\n"
      << "batch_size = " << c.train.batch_size << "\n"
      << "iterations = " << c.train.iterations << "\n"
      << "perceptual_enabled = " << (c.train.perceptual_enabled ? "true" : "false") << "\n"
      << "checkpoint_every = " << c.train.checkpoint_every << "\n"
      << "seed = " << c.seed << "\n"
      << "A_min = " << num(c.synth.a_min) << "\n"
      << "A_max = " << num(c.synth.a_max) << "\n"
      << "beta_min = " << num(c.synth.beta_min) << "\n"
      << "beta_max = " << num(c.synth.beta_max) << "\n";
  return out.str();
}

}  // namespace priornet::io
