#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "priornet/model.hpp"

namespace priornet::model {
namespace {

constexpr std::array<std::uint8_t, 4> kMagic{'P', 'R', 'N', 'W'};

class Writer {
 public:
  void u32(std::uint32_t v) {
    for (int k = 0; k < 4; ++k) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void raw(std::span<const std::uint8_t> data) { bytes_.insert(bytes_.end(), data.begin(), data.end()); }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::span<const std::uint8_t> raw(std::size_t n, const char* what) {
    if (bytes_.size() - pos_ < n) {
      throw WeightFormatError(WeightFormatError::Kind::kTruncated,
                              std::string("truncated payload while reading ") + what + " at byte " + std::to_string(pos_));
    }
    auto out = bytes_.subspan(pos_, n);
    pos_ += n;
    return out;
  }
  std::uint32_t u32(const char* what) {
    const auto b = raw(4, what);
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(b[static_cast<std::size_t>(k)]) << (8 * k);
    return v;
  }
  float f32(const char* what) { return std::bit_cast<float>(u32(what)); }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

[[noreturn]] void mismatch(const std::string& what) {
  throw WeightFormatError(WeightFormatError::Kind::kShapeMismatch, "shape/config mismatch: " + what);
}

}  // namespace

std::vector<std::uint8_t> serialize(const ModelWeights& weights) {
  Writer w;
  w.raw(kMagic);
  w.u32(weights.format_version);
  w.u32(static_cast<std::uint32_t>(weights.config.kernel_size));
  w.u32(static_cast<std::uint32_t>(weights.config.channels_per_conv));
  w.u32(static_cast<std::uint32_t>(weights.config.mia_reduction));
  w.f32(weights.config.bias_b);
  w.u32(static_cast<std::uint32_t>(weights.config.variant));
  w.u32(static_cast<std::uint32_t>(weights.params.size()));
  for (const auto& e : weights.params.entries()) {
    w.u32(static_cast<std::uint32_t>(e.name.size()));
    w.raw({reinterpret_cast<const std::uint8_t*>(e.name.data()), e.name.size()});
    w.u32(static_cast<std::uint32_t>(e.tensor.rank()));
    for (auto d : e.tensor.shape()) w.u32(static_cast<std::uint32_t>(d));
    for (float v : e.tensor.data()) w.f32(v);
  }
  return w.take();
}

ModelWeights deserialize(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  const auto magic = r.raw(4, "magic");
  if (!std::equal(magic.begin(), magic.end(), kMagic.begin())) {
    throw WeightFormatError(WeightFormatError::Kind::kBadMagic, "bad magic: not a PRNW weight file");
  }
  const std::uint32_t version = r.u32("version");
  if (version != kWeightFormatVersion) {
    throw WeightFormatError(WeightFormatError::Kind::kVersionMismatch,
                            "version mismatch: file has " + std::to_string(version) + ", expected " +
                                std::to_string(kWeightFormatVersion));
  }
  PriorNetConfig config;
  config.kernel_size = r.u32("kernel_size");
  config.channels_per_conv = r.u32("channels_per_conv");
  config.mia_reduction = r.u32("mia_reduction");
  config.bias_b = r.f32("bias_b");
  config.variant = static_cast<Variant>(r.u32("variant"));
  try {
    config.validate();
  } catch (const std::invalid_argument& e) {
    mismatch(std::string("invalid config block: ") + e.what());
  }

  // The expected layout comes from the config; every record must match it.
  ModelWeights out = build(config, 0);
  const std::uint32_t count = r.u32("record count");
  if (count != out.params.size()) {
    mismatch("file has " + std::to_string(count) + " parameter records, config implies " +
             std::to_string(out.params.size()));
  }
  for (auto& e : out.params.entries()) {
    const std::uint32_t name_len = r.u32("name length");
    const auto name_bytes = r.raw(name_len, "parameter name");
    const std::string name(name_bytes.begin(), name_bytes.end());
    if (name != e.name) mismatch("expected parameter '" + e.name + "', found '" + name + "'");
    const std::uint32_t rank = r.u32("rank");
    Shape shape;
    for (std::uint32_t d = 0; d < rank; ++d) shape.push_back(r.u32("extent"));
    if (shape != e.tensor.shape()) {
      mismatch("parameter '" + name + "' has shape " + shape_to_string(shape) + ", config implies " +
               shape_to_string(e.tensor.shape()));
    }
    for (auto& v : e.tensor.data()) v = r.f32("payload");
  }
  if (r.remaining() != 0) {
    throw WeightFormatError(WeightFormatError::Kind::kTrailingData,
                            std::to_string(r.remaining()) + " unexpected trailing bytes");
  }
  return out;
}

void save_weights(const ModelWeights& weights, const std::filesystem::path& path) {
  const auto bytes = serialize(weights);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

ModelWeights load_weights(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

}  // namespace priornet::model
