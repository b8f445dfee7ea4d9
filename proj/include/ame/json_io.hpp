#pragma once

#include <string>

#include <json.hpp>

#include "ame/graph.hpp"
#include "ame/patterns.hpp"
#include "ame/symbols.hpp"

namespace ame {

using json = nlohmann::json;

inline const char* to_string(NodeKind k) {
  switch (k) {
    case NodeKind::Core: return "core";
    case NodeKind::Normal: return "normal";
    case NodeKind::Fallback: return "fallback";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// FunctionIR -> JSON (the --emit-ir debug dump; field names are stable and
// documented in docs/ir-json.md)
// ---------------------------------------------------------------------------

inline json expr_to_json(const Expr& e) {
  static const char* kinds[] = {"ident", "literal", "binary", "unary", "member", "index", "call"};
  json j;
  j["kind"] = kinds[static_cast<int>(e.kind)];
  if (!e.text.empty()) j["text"] = e.text;
  j["reads"] = e.reads;
  if (!e.children.empty()) {
    json kids = json::array();
    for (const auto& c : e.children) kids.push_back(expr_to_json(c));
    j["children"] = std::move(kids);
  }
  return j;
}

inline json span_to_json(const SourceSpan& s) {
  return json{{"line", s.line}, {"col", s.col}, {"end_line", s.end_line}, {"end_col", s.end_col}};
}

inline json statement_to_json(const Statement& s);

inline json block_to_json(const std::vector<Statement>& block) {
  json arr = json::array();
  for (const auto& s : block) arr.push_back(statement_to_json(s));
  return arr;
}

inline json statement_to_json(const Statement& s) {
  json j;
  j["span"] = span_to_json(s.span);
  j["order"] = s.order;
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, AssignStmt>) {
          j["kind"] = "assign";
          j["lhs"] = expr_to_json(n.lhs);
          j["rhs"] = expr_to_json(n.rhs);
          if (n.compound) j["compound"] = std::string(1, n.compound);
          if (n.is_decl) j["decl_type"] = n.decl_type;
        } else if constexpr (std::is_same_v<T, CallStmt>) {
          j["kind"] = "call";
          j["callee"] = n.path;
          static const char* kinds[] = {"plain", "callValue", "transferLike", "selfCall"};
          j["call_kind"] = kinds[static_cast<int>(n.kind)];
          j["expr"] = expr_to_json(n.expr);
        } else if constexpr (std::is_same_v<T, RequireStmt>) {
          j["kind"] = n.is_assert ? "assert" : "require";
          j["cond"] = expr_to_json(n.cond);
        } else if constexpr (std::is_same_v<T, IfStmt>) {
          j["kind"] = "if";
          j["cond"] = expr_to_json(n.cond);
          j["then"] = block_to_json(n.then_block);
          if (n.has_else) j["else"] = block_to_json(n.else_block);
        } else if constexpr (std::is_same_v<T, LoopStmt>) {
          j["kind"] = n.kind == LoopKind::For ? "for" : "while";
          if (n.cond) j["cond"] = expr_to_json(*n.cond);
          if (!n.init.empty()) j["init"] = block_to_json(n.init);
          if (!n.updates.empty()) j["updates"] = block_to_json(n.updates);
          j["body"] = block_to_json(n.body);
        } else if constexpr (std::is_same_v<T, ReturnStmt>) {
          j["kind"] = "return";
          if (n.value) j["value"] = expr_to_json(*n.value);
        } else if constexpr (std::is_same_v<T, RevertStmt>) {
          j["kind"] = "revert";
        } else if constexpr (std::is_same_v<T, ThrowStmt>) {
          j["kind"] = "throw";
        } else {
          j["kind"] = "opaque";
          j["reads"] = n.reads;
        }
      },
      s.node);
  return j;
}

inline json ir_to_json(const FunctionIR& ir) {
  json j;
  j["name"] = ir.name;
  json params = json::array();
  for (const auto& p : ir.params) params.push_back({{"name", p.name}, {"type", p.type}});
  j["params"] = std::move(params);
  j["modifiers"] = ir.modifiers;
  j["statements"] = block_to_json(ir.statements);
  return j;
}

// ---------------------------------------------------------------------------
// Patterns / graphs -> JSON
// ---------------------------------------------------------------------------

inline json patterns_to_json(const PatternVector& pv) {
  json j;
  j["vulnerability"] = to_string(pv.vuln);
  j["flags"] = json::array();
  for (bool f : pv.flags) j["flags"].push_back(f ? 1 : 0);
  j["encodings"] = json::array();
  for (const auto& enc : pv.encodings) j["encodings"].push_back(enc);
  return j;
}

template <typename Graph>
json graph_to_json(const Graph& g, Vuln vuln) {
  json j;
  json nodes = json::array();
  for (const auto& n : g.nodes) {
    nodes.push_back({{"id", n.id},
                     {"kind", to_string(n.kind)},
                     {"category", category_name(vuln, n.category_slot)},
                     {"label", n.label},
                     {"feature", n.init_feature}});
  }
  json edges = json::array();
  for (const auto& e : g.edges) {
    edges.push_back({{"start", e.start},
                     {"end", e.end},
                     {"etype", to_string(e.etype)},
                     {"eclass", to_string(e.eclass)},
                     {"t", e.temporal}});
  }
  j["nodes"] = std::move(nodes);
  j["edges"] = std::move(edges);
  return j;
}

}  // namespace ame
