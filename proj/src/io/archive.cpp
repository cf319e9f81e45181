// Copyright 2026 The gewild Authors
// SPDX-License-Identifier: Apache-2.0

#include "io/archive.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "common/error.hpp"

namespace gewild::io {

namespace {

constexpr char kMagic[4] = {'G', 'E', 'W', 'T'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint32_t u32() {
    need(4, "u32");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }

  std::span<const std::uint8_t> take(std::size_t n, const char* what) {
    need(n, what);
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

  std::size_t pos() const { return pos_; }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n, const char* what) {
    if (bytes_.size() - pos_ < n)
      fail(ErrorKind::Format, "GEWT archive truncated reading ", what, " at byte ", pos_);
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

void TensorArchive::put(std::string name, std::vector<std::uint32_t> dims, std::vector<float> data) {
  if (find(name)) fail(ErrorKind::Format, "duplicate archive entry '", name, "'");
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  if (n != data.size())
    fail(ErrorKind::Dimension, "archive entry '", name, "' dims hold ", n, " values, got ", data.size());
  entries_.push_back({std::move(name), std::move(dims), std::move(data)});
}

const ArchiveEntry* TensorArchive::find(std::string_view name) const {
  for (const auto& e : entries_)
    if (e.name == name) return &e;
  return nullptr;
}

const ArchiveEntry& TensorArchive::at(std::string_view name) const {
  const auto* e = find(name);
  if (!e) fail(ErrorKind::Data, "archive has no entry '", name, "'");
  return *e;
}

std::vector<std::uint8_t> TensorArchive::serialize() const {
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put_u32(out, kArchiveVersion);
  put_u32(out, static_cast<std::uint32_t>(entries_.size()));
  for (const auto& e : entries_) {
    put_u32(out, static_cast<std::uint32_t>(e.name.size()));
    out.insert(out.end(), e.name.begin(), e.name.end());
    put_u32(out, static_cast<std::uint32_t>(e.dims.size()));
    for (auto d : e.dims) put_u32(out, d);
    for (float v : e.data) put_u32(out, std::bit_cast<std::uint32_t>(v));
  }
  return out;
}

TensorArchive TensorArchive::parse(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  auto magic = r.take(4, "magic");
  if (std::memcmp(magic.data(), kMagic, 4) != 0) fail(ErrorKind::Format, "not a GEWT archive (bad magic)");
  const auto version = r.u32();
  if (version != kArchiveVersion) fail(ErrorKind::Format, "unsupported GEWT version ", version);
  const auto count = r.u32();
  TensorArchive archive;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = r.u32();
    auto name_bytes = r.take(name_len, "entry name");
    std::string name(name_bytes.begin(), name_bytes.end());
    const auto rank = r.u32();
    std::vector<std::uint32_t> dims(rank);
    std::size_t n = 1;
    for (auto& d : dims) {
      d = r.u32();
      n *= d;
    }
    if (n > (bytes.size() - r.pos()) / 4)
      fail(ErrorKind::Format, "GEWT entry '", name, "' truncated at byte ", r.pos());
    auto raw = r.take(n * 4, "tensor data");
    std::vector<float> data(n);
    for (std::size_t k = 0; k < n; ++k) {
      std::uint32_t bits = 0;
      for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(raw[k * 4 + b]) << (8 * b);
      data[k] = std::bit_cast<float>(bits);
    }
    archive.put(std::move(name), std::move(dims), std::move(data));
  }
  if (!r.done()) fail(ErrorKind::Format, "trailing bytes after GEWT archive at byte ", r.pos());
  return archive;
}

void TensorArchive::save(const std::filesystem::path& path) const { write_file_bytes(path, serialize()); }

TensorArchive TensorArchive::load(const std::filesystem::path& path) { return parse(read_file_bytes(path)); }

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open ", path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot write ", path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::Io, "short write to ", path.string());
}

}  // namespace gewild::io
