// Copyright 2026 The gewild Authors
// SPDX-License-Identifier: Apache-2.0

// Clip manifests: tab-separated, one clip per line under the header
//   id  frames  wav  label  split  origin
// Paths are stored relative to the manifest's directory.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace gewild {

struct ManifestRecord {
  std::string id;
  std::filesystem::path frames;  // frame directory (absolute once loaded)
  std::filesystem::path wav;
  int label = 0;
  std::string split = "train";     // train | val | test
  std::string origin = "real";     // real | synthetic
};

inline constexpr const char* kManifestHeader = "id\tframes\twav\tlabel\tsplit\torigin";

/// Parses and validates a manifest. With `check_paths`, every frame
/// directory and WAV file must exist.
std::vector<ManifestRecord> read_manifest(const std::filesystem::path& path, bool check_paths = true);
std::vector<ManifestRecord> parse_manifest(const std::string& text, const std::filesystem::path& base,
                                           const std::string& origin_name = "<manifest>");

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestRecord>& records);

/// Records whose split equals `split`.
std::vector<ManifestRecord> filter_split(const std::vector<ManifestRecord>& records, const std::string& split);

}  // namespace gewild
