// Copyright 2026 The gewild Authors
// SPDX-License-Identifier: Apache-2.0

#include "common/manifest.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "common/error.hpp"
#include "common/labels.hpp"

namespace gewild {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

std::string relative_to(const std::filesystem::path& p, const std::filesystem::path& base) {
  if (p.empty()) return {};
  const auto rel = std::filesystem::relative(std::filesystem::absolute(p), std::filesystem::absolute(base));
  return rel.empty() ? p.generic_string() : rel.generic_string();
}

}  // namespace

std::vector<ManifestRecord> parse_manifest(const std::string& text, const std::filesystem::path& base,
                                           const std::string& origin_name) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  std::set<std::string> ids;
  std::vector<ManifestRecord> records;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line != kManifestHeader)
        fail(ErrorKind::Data, origin_name, ":", lineno, ": expected header '", kManifestHeader, "'");
      header = true;
      continue;
    }
    const auto cols = split_tabs(line);
    if (cols.size() != 6) fail(ErrorKind::Data, origin_name, ":", lineno, ": expected 6 columns, got ", cols.size());
    ManifestRecord r;
    r.id = cols[0];
    if (r.id.empty()) fail(ErrorKind::Data, origin_name, ":", lineno, ": empty clip id");
    if (!ids.insert(r.id).second) fail(ErrorKind::Data, origin_name, ":", lineno, ": duplicate clip id ", r.id);
    auto resolve = [&](const std::string& p) -> std::filesystem::path {
      if (p.empty() || p == "-") return {};
      std::filesystem::path path(p);
      return path.is_absolute() ? path : base / path;
    };
    r.frames = resolve(cols[1]);
    r.wav = resolve(cols[2]);
    try {
      r.label = parse_label(cols[3]);
    } catch (const Error& e) {
      fail(ErrorKind::Data, origin_name, ":", lineno, ": ", e.what());
    }
    r.split = cols[4];
    if (r.split != "train" && r.split != "val" && r.split != "test")
      fail(ErrorKind::Data, origin_name, ":", lineno, ": unknown split '", r.split, "'");
    r.origin = cols[5];
    if (r.origin != "real" && r.origin != "synthetic")
      fail(ErrorKind::Data, origin_name, ":", lineno, ": unknown origin '", r.origin, "'");
    records.push_back(std::move(r));
  }
  if (!header) fail(ErrorKind::Data, origin_name, ": missing manifest header");
  return records;
}

std::vector<ManifestRecord> read_manifest(const std::filesystem::path& path, bool check_paths) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open manifest ", path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  auto records = parse_manifest(ss.str(), path.parent_path(), path.string());
  if (check_paths) {
    for (const auto& r : records) {
      if (!r.frames.empty() && !std::filesystem::is_directory(r.frames))
        fail(ErrorKind::Data, path.string(), ": clip ", r.id, ": frame directory ", r.frames.string(), " not found");
      if (!r.wav.empty() && !std::filesystem::is_regular_file(r.wav))
        fail(ErrorKind::Data, path.string(), ": clip ", r.id, ": audio file ", r.wav.string(), " not found");
    }
  }
  return records;
}

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestRecord>& records) {
  const auto base = path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path();
  std::filesystem::create_directories(base);
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot write manifest ", path.string());
  out << kManifestHeader << '\n';
  for (const auto& r : records) {
    const std::string frames = relative_to(r.frames, base), wav = relative_to(r.wav, base);
    out << r.id << '\t' << (frames.empty() ? "-" : frames) << '\t' << (wav.empty() ? "-" : wav) << '\t'
        << label_name(r.label) << '\t' << r.split << '\t' << r.origin << '\n';
  }
  if (!out) fail(ErrorKind::Io, "short write to ", path.string());
}

std::vector<ManifestRecord> filter_split(const std::vector<ManifestRecord>& records, const std::string& split) {
  std::vector<ManifestRecord> out;
  for (const auto& r : records)
    if (r.split == split) out.push_back(r);
  return out;
}

}  // namespace gewild
