#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "priornet/errors.hpp"

namespace priornet::io {

// One tab-separated line: hazy/gt pair for training and evaluation, or
// clean/depth pair for synthesis.
struct ManifestEntry {
  std::filesystem::path first;
  std::filesystem::path second;
  std::size_t line = 0;
};

struct DatasetManifest {
  std::filesystem::path source;
  std::vector<ManifestEntry> entries;
};

// Relative paths resolve against the manifest's directory. Lines starting
// with '#' and blank lines are skipped. Every referenced file must exist and
// first-column paths must be unique; violations raise FormatError naming the line.
DatasetManifest load_manifest(const std::filesystem::path& path);
DatasetManifest parse_manifest(const std::string& text, const std::filesystem::path& base_dir,
                               const std::filesystem::path& source = {});

// Writes entries as "first<TAB>second" lines, paths relative to the manifest directory.
void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries);

// Stable identifier for reports: the file stem of the first column.
std::string entry_id(const ManifestEntry& entry);

}  // namespace priornet::io
