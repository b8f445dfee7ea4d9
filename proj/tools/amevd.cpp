// amevd: explainable smart-contract vulnerability detector.
//
// Subcommands: parse, extract-patterns, build-graph, train, eval, stats,
// detect. All machine-readable output is JSON on stdout.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ame/dataset.hpp"
#include "ame/json_io.hpp"
#include "ame/report.hpp"
#include "ame/trainer.hpp"

namespace fs = std::filesystem;
using ame::json;

namespace {

std::string resolve_model_path(const std::string& path) {
  if (fs::exists(path)) return path;
  if (const char* dir = std::getenv("AME_MODEL_DIR")) {
    fs::path candidate = fs::path(dir) / path;
    if (fs::exists(candidate)) return candidate.string();
  }
  throw ame::LoadError("model checkpoint not found: " + path);
}

json eval_to_json(const ame::EvalReport& r) {
  return json{{"accuracy", r.accuracy}, {"recall", r.recall},   {"precision", r.precision},
              {"f1", r.f1},             {"tp", r.tp},           {"fp", r.fp},
              {"tn", r.tn},             {"fn", r.fn}};
}

json stats_to_json(const ame::WeightStats& ws, ame::Vuln vuln, ame::nn::Variant variant) {
  std::vector<std::string> names;
  if (variant != ame::nn::Variant::AME_RG) names.push_back("graph");
  if (variant != ame::nn::Variant::AME_RP)
    for (const auto& n : ame::pattern_names(vuln)) names.push_back(n);
  json features = json::array();
  for (std::size_t i = 0; i < ws.features.size(); ++i) {
    features.push_back({{"feature", i < names.size() ? names[i] : std::to_string(i)},
                        {"above_sigma", ws.features[i].above_sigma},
                        {"argmax", ws.features[i].argmax},
                        {"mean", ws.features[i].mean},
                        {"stddev", ws.features[i].stddev}});
  }
  return json{{"sigma", ws.sigma},
              {"vulnerability", ame::to_string(vuln)},
              {"features", std::move(features)},
              {"per_example", ws.per_example}};
}

std::vector<ame::LabeledExample> load_examples(const std::string& manifest_path) {
  auto entries = ame::load_manifest(manifest_path);
  std::string base = fs::path(manifest_path).parent_path().string();
  return ame::prepare_examples(entries, base);
}

void check_vuln_consistency(const std::vector<ame::LabeledExample>& examples, ame::Vuln vuln) {
  for (const auto& e : examples)
    if (e.vuln != vuln)
      throw ame::CheckpointMismatchError(
          "manifest entry vulnerability does not match the model: " + e.function);
}

int cmd_detect(const std::vector<std::string>& files, const std::string& vuln_str,
               const std::string& model_path, double sigma, const std::string& format) {
  ame::Vuln vuln = ame::vuln_from_string(vuln_str);
  std::string resolved = resolve_model_path(model_path);
  ame::AmeModel model = ame::AmeModel::from_checkpoint(resolved);
  if (model.cfg.vuln != vuln)
    throw ame::CheckpointMismatchError("checkpoint was trained for a different vulnerability");
  std::string hash = ame::nn::checkpoint_hash(resolved);

  json out;
  out["tool"] = {{"name", "amevd"}, {"version", ame::kVersion}};
  out["vulnerability"] = ame::to_string(vuln);
  out["model"] = {{"path", resolved}, {"hash", hash}};
  out["sigma"] = sigma;
  json reports = json::array();
  json errors = json::array();
  std::string text_out;
  int n_functions = 0, n_vulnerable = 0;

  for (const auto& file : files) {
    std::vector<ame::AnalyzedFunction> funcs;
    try {
      funcs = ame::analyze_source(ame::read_file(file), file);
    } catch (const std::exception& ex) {
      errors.push_back({{"file", file}, {"message", ex.what()}});
      continue;
    }
    for (const auto& af : funcs) {
      try {
        ame::PatternVector pv = ame::extract_patterns(af, vuln);
        auto graph = ame::try_normalize(ame::build_graph(af, vuln));
        ame::ModelInput in;
        in.encodings = pv.encodings;
        in.graph = graph ? &*graph : nullptr;
        ame::ForwardTrace trace = model.trace(in);
        ame::DetectionReport r = ame::make_report(file, af.ir.name, vuln, model.cfg.variant,
                                                  trace, pv, sigma, hash);
        n_functions++;
        if (r.verdict) n_vulnerable++;
        reports.push_back(ame::report_to_json(r));
        text_out += ame::report_to_text(r) + "\n";
      } catch (const std::exception& ex) {
        errors.push_back({{"file", file}, {"function", af.ir.name}, {"message", ex.what()}});
      }
    }
  }
  if (n_functions == 0 && errors.empty())
    throw ame::NoFunctionsFoundError("no functions found in the given files");

  out["reports"] = std::move(reports);
  out["errors"] = errors;
  if (format == "text") {
    std::cout << text_out;
    if (!errors.empty()) std::cerr << errors.dump(2) << "\n";
  } else {
    std::cout << out.dump(2) << "\n";
  }
  return n_vulnerable > 0 ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"amevd: explainable smart-contract vulnerability detection"};
  app.require_subcommand(1);

  // parse
  auto* parse_cmd = app.add_subcommand("parse", "Parse functions and dump the IR");
  std::vector<std::string> parse_files;
  bool emit_ir = false;
  parse_cmd->add_option("files", parse_files, "Solidity-like source files")->required();
  parse_cmd->add_flag("--emit-ir", emit_ir, "emit the full JSON IR");

  // extract-patterns
  auto* pat_cmd = app.add_subcommand("extract-patterns", "Extract expert-pattern flags");
  std::string pat_vuln, pat_file;
  pat_cmd->add_option("--vuln", pat_vuln, "reentrancy|timestamp|loop")->required();
  pat_cmd->add_option("file", pat_file)->required();

  // build-graph
  auto* graph_cmd = app.add_subcommand("build-graph", "Build the code semantic graph");
  std::string graph_vuln, graph_file;
  bool normalized = false;
  graph_cmd->add_option("--vuln", graph_vuln, "reentrancy|timestamp|loop")->required();
  graph_cmd->add_option("file", graph_file)->required();
  graph_cmd->add_flag("--normalized", normalized, "emit the core-only normalized graph");

  // train
  auto* train_cmd = app.add_subcommand("train", "Train a model from a manifest");
  std::string train_vuln, train_manifest, train_out, train_variant = "ame";
  std::uint64_t train_seed = 0;
  int train_epochs = 60, train_threads = 2;
  double train_lr = 1e-3;
  train_cmd->add_option("--vuln", train_vuln)->required();
  train_cmd->add_option("--manifest", train_manifest)->required();
  train_cmd->add_option("--out", train_out)->required();
  train_cmd->add_option("--seed", train_seed);
  train_cmd->add_option("--epochs", train_epochs);
  train_cmd->add_option("--lr", train_lr);
  train_cmd->add_option("--threads", train_threads);
  train_cmd->add_option("--variant", train_variant, "ame|ame-rg|ame-rp");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a model on a manifest");
  std::string eval_model, eval_manifest;
  eval_cmd->add_option("--model", eval_model)->required();
  eval_cmd->add_option("--manifest", eval_manifest)->required();

  // stats
  auto* stats_cmd = app.add_subcommand("stats", "Interpretable weight statistics");
  std::string stats_model, stats_manifest;
  double stats_sigma = 0.25;
  stats_cmd->add_option("--model", stats_model)->required();
  stats_cmd->add_option("--manifest", stats_manifest)->required();
  stats_cmd->add_option("--sigma", stats_sigma);

  // detect
  auto* detect_cmd = app.add_subcommand("detect", "Detect vulnerabilities in source files");
  std::vector<std::string> detect_files;
  std::string detect_vuln, detect_model, detect_format = "json";
  double detect_sigma = 0.25;
  detect_cmd->add_option("--vuln", detect_vuln)->required();
  detect_cmd->add_option("--model", detect_model)->required();
  detect_cmd->add_option("--sigma", detect_sigma);
  detect_cmd->add_option("--format", detect_format, "json|text");
  detect_cmd->add_option("files", detect_files)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*parse_cmd) {
      json out = json::array();
      for (const auto& f : parse_files) {
        for (const auto& af : ame::analyze_source(ame::read_file(f), f)) {
          if (emit_ir) {
            json j = ame::ir_to_json(af.ir);
            j["file"] = f;
            out.push_back(std::move(j));
          } else {
            out.push_back({{"file", f}, {"function", af.ir.name}});
          }
        }
      }
      std::cout << out.dump(2) << "\n";
      return 0;
    }
    if (*pat_cmd) {
      ame::Vuln vuln = ame::vuln_from_string(pat_vuln);
      json out = json::array();
      for (const auto& af : ame::analyze_source(ame::read_file(pat_file), pat_file)) {
        json j = ame::patterns_to_json(ame::extract_patterns(af, vuln));
        j["function"] = af.ir.name;
        out.push_back(std::move(j));
      }
      std::cout << out.dump(2) << "\n";
      return 0;
    }
    if (*graph_cmd) {
      ame::Vuln vuln = ame::vuln_from_string(graph_vuln);
      json out = json::array();
      for (const auto& af : ame::analyze_source(ame::read_file(graph_file), graph_file)) {
        ame::ContractGraph g = ame::build_graph(af, vuln);
        json j;
        if (normalized) {
          auto ng = ame::try_normalize(g);
          j = ng ? ame::graph_to_json(*ng, vuln)
                 : json{{"nodes", json::array()}, {"edges", json::array()}};
        } else {
          j = ame::graph_to_json(g, vuln);
        }
        j["function"] = af.ir.name;
        out.push_back(std::move(j));
      }
      std::cout << out.dump(2) << "\n";
      return 0;
    }
    if (*train_cmd) {
      ame::Vuln vuln = ame::vuln_from_string(train_vuln);
      auto examples = load_examples(train_manifest);
      check_vuln_consistency(examples, vuln);
      ame::ModelConfig cfg;
      cfg.vuln = vuln;
      cfg.variant = ame::nn::variant_from_string(train_variant);
      ame::AmeModel model(cfg);
      model.init(train_seed);
      ame::TrainOptions opt;
      opt.epochs = train_epochs;
      opt.lr = train_lr;
      opt.seed = train_seed;
      opt.threads = train_threads;
      ame::TrainResult res = ame::train(model, ame::view_all(examples), opt);
      model.save(train_out);
      json out{{"checkpoint", train_out},
               {"epochs", train_epochs},
               {"seed", train_seed},
               {"examples", examples.size()},
               {"loss_curve", res.loss_curve}};
      std::cout << out.dump(2) << "\n";
      return 0;
    }
    if (*eval_cmd) {
      ame::AmeModel model = ame::AmeModel::from_checkpoint(resolve_model_path(eval_model));
      auto examples = load_examples(eval_manifest);
      check_vuln_consistency(examples, model.cfg.vuln);
      ame::EvalReport r = ame::evaluate(model, ame::view_all(examples));
      std::cout << eval_to_json(r).dump(2) << "\n";
      return 0;
    }
    if (*stats_cmd) {
      ame::AmeModel model = ame::AmeModel::from_checkpoint(resolve_model_path(stats_model));
      auto examples = load_examples(stats_manifest);
      check_vuln_consistency(examples, model.cfg.vuln);
      ame::WeightStats ws = ame::weight_stats(model, ame::view_all(examples), stats_sigma);
      std::cout << stats_to_json(ws, model.cfg.vuln, model.cfg.variant).dump(2) << "\n";
      return 0;
    }
    if (*detect_cmd) {
      return cmd_detect(detect_files, detect_vuln, detect_model, detect_sigma, detect_format);
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 1;
}
