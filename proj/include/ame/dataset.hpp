#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ame/graph.hpp"
#include "ame/model.hpp"
#include "ame/patterns.hpp"

namespace ame {

struct ManifestEntry {
  std::string file;
  std::string function;
  Vuln vuln = Vuln::Reentrancy;
  int label = 0;
};

/// Manifest: JSON object with an "entries" array of
/// {file, function, vulnerability, label}; file paths are relative to the
/// manifest's directory unless absolute.
inline std::vector<ManifestEntry> load_manifest(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw LoadError("cannot open manifest: " + path);
  nlohmann::json j = nlohmann::json::parse(is);
  std::vector<ManifestEntry> out;
  for (const auto& e : j.at("entries")) {
    ManifestEntry m;
    m.file = e.at("file").get<std::string>();
    m.function = e.at("function").get<std::string>();
    m.vuln = vuln_from_string(e.at("vulnerability").get<std::string>());
    m.label = e.at("label").get<int>();
    out.push_back(std::move(m));
  }
  return out;
}

/// One prepared example: cached pattern vector and normalized graph, with
/// the source content hash recorded so caches can be validated.
struct LabeledExample {
  std::string path;
  std::string function;
  Vuln vuln = Vuln::Reentrancy;
  int label = 0;
  std::uint64_t content_hash = 0;
  PatternVector pv;
  std::optional<NormalizedGraph> graph;

  ModelInput input() const {
    ModelInput in;
    in.encodings = pv.encodings;
    in.graph = graph ? &*graph : nullptr;
    return in;
  }
};

inline std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw LoadError("cannot open source file: " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

/// Prepares an example from an already analyzed function.
inline LabeledExample prepare_example(const AnalyzedFunction& af, Vuln vuln, int label,
                                      std::uint64_t content_hash) {
  LabeledExample ex;
  ex.path = af.file;
  ex.function = af.ir.name;
  ex.vuln = vuln;
  ex.label = label;
  ex.content_hash = content_hash;
  ex.pv = extract_patterns(af, vuln);
  ex.graph = try_normalize(build_graph(af, vuln));
  return ex;
}

/// Loads and preprocesses every manifest entry. Each file is parsed once.
inline std::vector<LabeledExample> prepare_examples(const std::vector<ManifestEntry>& entries,
                                                    const std::string& base_dir) {
  std::map<std::string, std::vector<AnalyzedFunction>> by_file;
  std::map<std::string, std::uint64_t> hashes;
  std::vector<LabeledExample> out;
  for (const auto& e : entries) {
    std::filesystem::path p(e.file);
    if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
    std::string full = p.string();
    auto it = by_file.find(full);
    if (it == by_file.end()) {
      std::string text = read_file(full);
      hashes[full] = fnv1a64(text);
      it = by_file.emplace(full, analyze_source(text, full)).first;
    }
    const AnalyzedFunction* found = nullptr;
    for (const auto& af : it->second)
      if (af.ir.name == e.function) {
        found = &af;
        break;
      }
    if (!found)
      throw NoFunctionsFoundError("function '" + e.function + "' not found in " + full);
    out.push_back(prepare_example(*found, e.vuln, e.label, hashes[full]));
  }
  return out;
}

/// Deterministic stratified 80/20 split: per label class the indices are
/// shuffled by the seed and round(n/5) of them become test examples.
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_dataset(
    const std::vector<LabeledExample>& examples, std::uint64_t seed) {
  if (examples.size() < 5)
    throw TooFewExamplesError("need at least 5 examples to split, got " +
                              std::to_string(examples.size()));
  Rng rng(seed);
  std::map<int, std::vector<std::size_t>> by_label;
  for (std::size_t i = 0; i < examples.size(); ++i)
    by_label[examples[i].label].push_back(i);

  std::vector<std::size_t> train, test;
  for (auto& [label, idx] : by_label) {
    rng.shuffle(idx);
    std::size_t n_test = static_cast<std::size_t>(
        static_cast<double>(idx.size()) * 0.2 + 0.5);
    for (std::size_t i = 0; i < idx.size(); ++i)
      (i < n_test ? test : train).push_back(idx[i]);
  }
  if (test.empty() && !train.empty()) {
    test.push_back(train.back());
    train.pop_back();
  }
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {train, test};
}

}  // namespace ame
