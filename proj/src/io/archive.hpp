// Copyright 2026 The gewild Authors
// SPDX-License-Identifier: Apache-2.0

// GEWT tensor archive: "GEWT", u32 version, u32 count, then per entry
// u32 name length, UTF-8 name, u32 rank, u32 dims[rank], f32 data. All
// integers and floats little-endian.

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gewild::io {

inline constexpr std::uint32_t kArchiveVersion = 1;

struct ArchiveEntry {
  std::string name;
  std::vector<std::uint32_t> dims;
  std::vector<float> data;
};

class TensorArchive {
 public:
  /// Appends an entry; names must be unique.
  void put(std::string name, std::vector<std::uint32_t> dims, std::vector<float> data);

  const ArchiveEntry* find(std::string_view name) const;
  const ArchiveEntry& at(std::string_view name) const;
  const std::vector<ArchiveEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  std::vector<std::uint8_t> serialize() const;
  static TensorArchive parse(std::span<const std::uint8_t> bytes);

  void save(const std::filesystem::path& path) const;
  static TensorArchive load(const std::filesystem::path& path);

 private:
  std::vector<ArchiveEntry> entries_;
};

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace gewild::io
