// Copyright 2026 The gewild Authors
// SPDX-License-Identifier: Apache-2.0

#include "model/weights.hpp"

#include <fstream>
#include <sstream>

#include "common/error.hpp"

namespace gewild::model {

NameMap parse_name_map(const std::string& text) {
  NameMap map;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size())
      fail(ErrorKind::Format, "name map line ", lineno, ": expected model_name<TAB>archive_name");
    if (!map.emplace(line.substr(0, tab), line.substr(tab + 1)).second)
      fail(ErrorKind::Format, "name map line ", lineno, ": duplicate model name ", line.substr(0, tab));
  }
  return map;
}

NameMap load_name_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open ", path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_name_map(ss.str());
}

}  // namespace gewild::model
