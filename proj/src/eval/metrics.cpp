// Copyright 2026 The gewild Authors
// SPDX-License-Identifier: Apache-2.0

#include "eval/metrics.hpp"

#include <cstdio>
#include <set>

#include "common/error.hpp"

namespace gewild::eval {

namespace {

std::string id_list(const std::vector<std::string>& ids) {
  constexpr std::size_t kShown = 10;
  std::string out;
  for (std::size_t i = 0; i < ids.size() && i < kShown; ++i) out += (i ? ", " : "") + ids[i];
  if (ids.size() > kShown) out += ", ... (" + std::to_string(ids.size()) + " total)";
  return out;
}

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

Truth truth_from_records(const std::vector<ManifestRecord>& records) {
  Truth t;
  for (const auto& r : records)
    if (!t.emplace(r.id, r.label).second) fail(ErrorKind::Eval, "duplicate truth id ", r.id);
  return t;
}

Confusion confusion(const PredictionSet& pred, const Truth& truth) {
  if (pred.predictions.empty()) fail(ErrorKind::Eval, "cannot score an empty prediction set");
  std::vector<std::string> missing;
  Confusion m{};
  for (const auto& p : pred.predictions) {
    auto it = truth.find(p.id);
    if (it == truth.end()) {
      missing.push_back(p.id);
      continue;
    }
    ++m.at(static_cast<std::size_t>(it->second)).at(static_cast<std::size_t>(p.predicted));
  }
  if (!missing.empty()) fail(ErrorKind::Eval, "predicted ids absent from truth: ", id_list(missing));
  return m;
}

double accuracy(const PredictionSet& pred, const Truth& truth) { return evaluate(pred, truth).accuracy; }

EvalReport evaluate(const PredictionSet& pred, const Truth& truth) {
  EvalReport r;
  r.confusion = confusion(pred, truth);
  for (std::size_t t = 0; t < kNumClasses; ++t)
    for (std::size_t p = 0; p < kNumClasses; ++p) {
      r.total += r.confusion[t][p];
      if (t == p) r.correct += r.confusion[t][p];
    }
  r.accuracy = static_cast<double>(r.correct) / static_cast<double>(r.total);
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    std::size_t predicted = 0, actual = 0;
    for (std::size_t k = 0; k < kNumClasses; ++k) {
      predicted += r.confusion[k][c];
      actual += r.confusion[c][k];
    }
    const auto hit = static_cast<double>(r.confusion[c][c]);
    if (predicted) r.precision[c] = hit / static_cast<double>(predicted);
    if (actual) r.recall[c] = hit / static_cast<double>(actual);
  }
  return r;
}

double prediction_agreement(const PredictionSet& a, const PredictionSet& b) {
  if (a.predictions.empty() || b.predictions.empty()) fail(ErrorKind::Eval, "cannot compare empty prediction sets");
  std::map<std::string, int> bmap;
  for (const auto& p : b.predictions) bmap[p.id] = p.predicted;
  std::set<std::string> aids;
  std::vector<std::string> missing_in_b, missing_in_a;
  std::size_t same = 0;
  for (const auto& p : a.predictions) {
    aids.insert(p.id);
    auto it = bmap.find(p.id);
    if (it == bmap.end())
      missing_in_b.push_back(p.id);
    else
      same += it->second == p.predicted;
  }
  for (const auto& p : b.predictions)
    if (!aids.count(p.id)) missing_in_a.push_back(p.id);
  if (!missing_in_a.empty() || !missing_in_b.empty()) {
    std::string msg = "prediction sets cover different clips;";
    if (!missing_in_b.empty()) msg += " missing from b: " + id_list(missing_in_b) + ";";
    if (!missing_in_a.empty()) msg += " missing from a: " + id_list(missing_in_a) + ";";
    msg.pop_back();
    fail(ErrorKind::Eval, msg);
  }
  return static_cast<double>(same) / static_cast<double>(a.predictions.size());
}

std::string format_report(const EvalReport& r) {
  std::string out = "accuracy\t" + fixed(r.accuracy) + "\t(" + std::to_string(r.correct) + "/" +
                    std::to_string(r.total) + ")\n";
  out += "confusion (rows: truth, columns: predicted)\n";
  out += "truth\\pred";
  for (auto name : kClassNames) out += "\t" + std::string(name);
  out += "\n";
  for (std::size_t t = 0; t < kNumClasses; ++t) {
    out += std::string(kClassNames[t]);
    for (std::size_t p = 0; p < kNumClasses; ++p) out += "\t" + std::to_string(r.confusion[t][p]);
    out += "\n";
  }
  out += "class\tprecision\trecall\n";
  for (std::size_t c = 0; c < kNumClasses; ++c)
    out += std::string(kClassNames[c]) + "\t" + (r.precision[c] ? fixed(*r.precision[c]) : "n/a") + "\t" +
           (r.recall[c] ? fixed(*r.recall[c]) : "n/a") + "\n";
  return out;
}

std::string report_csv(const EvalReport& r) {
  std::string out = "metric,class,value\n";
  out += "accuracy,all," + fixed(r.accuracy) + "\n";
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    const std::string name(kClassNames[c]);
    if (r.precision[c]) out += "precision," + name + "," + fixed(*r.precision[c]) + "\n";
    if (r.recall[c]) out += "recall," + name + "," + fixed(*r.recall[c]) + "\n";
    for (std::size_t p = 0; p < kNumClasses; ++p)
      out += "confusion_" + name + "," + std::string(kClassNames[p]) + "," + std::to_string(r.confusion[c][p]) + "\n";
  }
  return out;
}

}  // namespace gewild::eval
