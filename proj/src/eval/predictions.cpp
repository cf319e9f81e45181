// Copyright 2026 The gewild Authors
// SPDX-License-Identifier: Apache-2.0

#include "eval/predictions.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "common/error.hpp"

namespace gewild::eval {

namespace {
constexpr const char* kHeader = "id\tclass\tp0\tp1\tp2";
constexpr const char* kTagPrefix = "# model=";

std::string fmt_prob(float p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(p));
  return buf;
}
}  // namespace

int argmax(const Probs& probs) {
  int best = 0;
  for (int c = 1; c < kNumClasses; ++c)
    if (probs[static_cast<std::size_t>(c)] > probs[static_cast<std::size_t>(best)]) best = c;
  return best;
}

Prediction make_prediction(std::string id, const Probs& probs) { return {std::move(id), argmax(probs), probs}; }

void validate(const PredictionSet& set, const std::string& origin) {
  std::unordered_set<std::string> ids;
  for (const auto& p : set.predictions) {
    if (!ids.insert(p.id).second) fail(ErrorKind::Eval, origin, ": duplicate clip id ", p.id);
    double sum = 0.0;
    for (float v : p.probs) {
      if (!(v >= 0.0f && v <= 1.0f)) fail(ErrorKind::Eval, origin, ": clip ", p.id, " has probability ", v);
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-4) fail(ErrorKind::Eval, origin, ": probabilities of clip ", p.id, " sum to ", sum);
    if (p.predicted != argmax(p.probs))
      fail(ErrorKind::Eval, origin, ": clip ", p.id, " predicts class ", p.predicted, " but its argmax is ",
           argmax(p.probs));
  }
}

std::string format_predictions(const PredictionSet& set) {
  std::string out = kTagPrefix + set.model_tag + "\n" + kHeader + "\n";
  for (const auto& p : set.predictions) {
    out += p.id + "\t" + std::to_string(p.predicted);
    for (float v : p.probs) out += "\t" + fmt_prob(v);
    out += "\n";
  }
  return out;
}

PredictionSet parse_predictions(const std::string& text, const std::string& origin) {
  PredictionSet set;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind(kTagPrefix, 0) == 0) {
      set.model_tag = line.substr(std::char_traits<char>::length(kTagPrefix));
      continue;
    }
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line != kHeader) fail(ErrorKind::Format, origin, ":", lineno, ": expected header '", kHeader, "'");
      header = true;
      continue;
    }
    std::vector<std::string> cols;
    std::size_t start = 0;
    while (true) {
      const auto tab = line.find('\t', start);
      cols.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (cols.size() != 5) fail(ErrorKind::Format, origin, ":", lineno, ": expected 5 columns, got ", cols.size());
    Prediction p;
    p.id = cols[0];
    if (cols[1].size() != 1 || cols[1][0] < '0' || cols[1][0] >= '0' + kNumClasses)
      fail(ErrorKind::Format, origin, ":", lineno, ": bad class '", cols[1], "'");
    p.predicted = cols[1][0] - '0';
    for (std::size_t c = 0; c < p.probs.size(); ++c) {
      const char* s = cols[2 + c].c_str();
      char* end = nullptr;
      p.probs[c] = std::strtof(s, &end);
      if (cols[2 + c].empty() || *end != '\0')
        fail(ErrorKind::Format, origin, ":", lineno, ": bad probability '", cols[2 + c], "'");
    }
    set.predictions.push_back(std::move(p));
  }
  if (!header) fail(ErrorKind::Format, origin, ": missing header '", kHeader, "'");
  validate(set, origin);
  return set;
}

void write_predictions(const std::filesystem::path& path, const PredictionSet& set) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::Io, "cannot write ", path.string());
  f << format_predictions(set);
  if (!f) fail(ErrorKind::Io, "failed writing ", path.string());
}

PredictionSet read_predictions(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::Io, "cannot read ", path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_predictions(ss.str(), path.string());
}

}  // namespace gewild::eval
