#include "priornet/manifest.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace priornet::io {

DatasetManifest parse_manifest(const std::string& text, const std::filesystem::path& base_dir,
                               const std::filesystem::path& source) {
  DatasetManifest m;
  m.source = source;
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  std::set<std::filesystem::path> seen;
  const std::string where = source.empty() ? "manifest" : source.string();
  auto resolve = [&](const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  };
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
      throw FormatError(where + ":" + std::to_string(number) + ": expected exactly two tab-separated paths");
    }
    ManifestEntry e{resolve(line.substr(0, tab)), resolve(line.substr(tab + 1)), number};
    for (const auto* p : {&e.first, &e.second}) {
      if (!std::filesystem::exists(*p)) {
        throw IoError(where + ":" + std::to_string(number) + ": file does not exist: " + p->string());
      }
    }
    if (!seen.insert(e.first.lexically_normal()).second) {
      throw FormatError(where + ":" + std::to_string(number) + ": duplicate entry " + e.first.string());
    }
    m.entries.push_back(std::move(e));
  }
  return m;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_manifest(buffer.str(), path.parent_path(), path);
}

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  const auto base = std::filesystem::absolute(path).lexically_normal().parent_path();
  auto rel = [&](const std::filesystem::path& p) {
    return std::filesystem::absolute(p).lexically_normal().lexically_relative(base).generic_string();
  };
  for (const auto& e : entries) out << rel(e.first) << '\t' << rel(e.second) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

std::string entry_id(const ManifestEntry& entry) { return entry.first.stem().string(); }

}  // namespace priornet::io
