#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "ame/json_io.hpp"
#include "ame/model.hpp"
#include "ame/version.hpp"

namespace ame {

/// Human-readable pattern names per vulnerability, in Loc-pattern order.
inline std::array<std::string, 3> pattern_names(Vuln v) {
  switch (v) {
    case Vuln::Reentrancy: return {"enoughBalance", "callValueInvocation", "balanceDeduction"};
    case Vuln::Timestamp:
      return {"timestampInvocation", "timestampAssign", "timestampContaminate"};
    case Vuln::InfiniteLoop: return {"loopStatement", "loopCondition", "selfInvocation"};
  }
  return {};
}

/// Per-function detection verdict with the interpretable feature weights.
struct DetectionReport {
  std::string file;
  std::string function;
  Vuln vuln = Vuln::Reentrancy;
  int verdict = 0;
  double confidence = 0.0;
  double sigma = 0.25;
  std::array<bool, 3> flags{};
  std::vector<std::pair<std::string, double>> weights;  // feature name -> weight
  std::vector<std::string> warnings;
  std::string tool_version = kVersion;
  std::string model_hash;
};

/// Assembles the report from a forward trace. Warnings name the expert
/// patterns that are present in the function and carried a weight above
/// sigma in the prediction.
inline DetectionReport make_report(const std::string& file, const std::string& function,
                                   Vuln vuln, nn::Variant variant, const ForwardTrace& trace,
                                   const PatternVector& pv, double sigma,
                                   const std::string& model_hash) {
  DetectionReport r;
  r.file = file;
  r.function = function;
  r.vuln = vuln;
  r.verdict = trace.yhat;
  r.confidence = trace.confidence;
  r.sigma = sigma;
  r.flags = pv.flags;
  r.model_hash = model_hash;

  auto names = pattern_names(vuln);
  std::size_t wi = 0;
  if (variant != nn::Variant::AME_RG)
    r.weights.push_back({"graph", trace.weights.at(wi++)});
  if (variant != nn::Variant::AME_RP) {
    for (int i = 0; i < 3; ++i) {
      double w = trace.weights.at(wi++);
      r.weights.push_back({names[i], w});
      if (w > sigma && pv.flags[i]) r.warnings.push_back(names[i]);
    }
  }

  double sum = 0.0;
  for (const auto& [name, w] : r.weights) sum += w;
  if (std::fabs(sum - 1.0) > 1e-6)
    throw Error("report weights do not sum to 1: " + std::to_string(sum));
  return r;
}

inline json report_to_json(const DetectionReport& r) {
  json weights = json::object();
  for (const auto& [name, w] : r.weights) weights[name] = w;
  json flags = json::array();
  for (bool f : r.flags) flags.push_back(f ? 1 : 0);
  return json{{"file", r.file},
              {"function", r.function},
              {"vulnerability", to_string(r.vuln)},
              {"verdict", r.verdict},
              {"confidence", r.confidence},
              {"sigma", r.sigma},
              {"flags", flags},
              {"weights", weights},
              {"warnings", r.warnings},
              {"tool_version", r.tool_version},
              {"model_hash", r.model_hash}};
}

inline std::string report_to_text(const DetectionReport& r) {
  char buf[64];
  std::string out;
  out += r.function + " (" + r.file + ")\n";
  out += std::string("  vulnerability: ") + to_string(r.vuln) + "\n";
  std::snprintf(buf, sizeof(buf), "%.6f", r.confidence);
  out += std::string("  verdict: ") + (r.verdict ? "VULNERABLE" : "safe") +
         "  confidence: " + buf + "\n";
  out += "  weights:\n";
  for (const auto& [name, w] : r.weights) {
    std::snprintf(buf, sizeof(buf), "%.6f", w);
    out += "    " + name + ": " + buf + "\n";
  }
  if (!r.warnings.empty()) {
    out += "  warnings:";
    for (const auto& w : r.warnings) out += " " + w;
    out += "\n";
  }
  out += "  model: " + r.model_hash + "  tool: " + r.tool_version + "\n";
  return out;
}

}  // namespace ame
