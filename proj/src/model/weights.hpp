// Copyright 2026 The gewild Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "io/archive.hpp"
#include "model/fusion_model.hpp"

namespace gewild::model {

/// model parameter name -> archive entry name
using NameMap = std::map<std::string, std::string>;

/// Tab-separated `model_name <TAB> archive_name` lines; '#' starts a comment.
NameMap load_name_map(const std::filesystem::path& path);
NameMap parse_name_map(const std::string& text);

struct ImportReport {
  std::size_t loaded = 0;
  std::vector<std::string> missing;  // model parameters absent from the archive
};

template <typename T>
io::TensorArchive export_weights(FusionModel<T>& model) {
  io::TensorArchive archive;
  for (auto* p : model.parameters()) {
    std::vector<std::uint32_t> dims(p->tensor.shape().begin(), p->tensor.shape().end());
    std::vector<float> data(p->tensor.data().begin(), p->tensor.data().end());
    archive.put(p->name, std::move(dims), std::move(data));
  }
  return archive;
}

/// Loads every parameter found in the archive (after name mapping). Shapes
/// are checked for all parameters before anything is written, so a conflict
/// leaves the model untouched.
template <typename T>
ImportReport import_weights(FusionModel<T>& model, const io::TensorArchive& archive, const NameMap& names = {}) {
  ImportReport report;
  std::vector<std::pair<nn::Parameter<T>*, const io::ArchiveEntry*>> plan;
  for (auto* p : model.parameters()) {
    auto it = names.find(p->name);
    const std::string& key = it == names.end() ? p->name : it->second;
    const auto* entry = archive.find(key);
    if (!entry) {
      report.missing.push_back(p->name);
      continue;
    }
    const nn::Shape archived(entry->dims.begin(), entry->dims.end());
    if (archived != p->tensor.shape())
      fail(ErrorKind::Format, "shape mismatch loading ", p->name, " from '", key, "': model ",
           nn::shape_str(p->tensor.shape()), " vs archive ", nn::shape_str(archived));
    plan.emplace_back(p, entry);
  }
  for (auto& [p, entry] : plan) {
    auto dst = p->tensor.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = static_cast<T>(entry->data[i]);
    ++report.loaded;
  }
  return report;
}

}  // namespace gewild::model
