#pragma once

#include <string>

#include "ame/json_io.hpp"

namespace test_support {

// Canonical source emission used by the parser round-trip test. The output
// is re-parseable; spans and statement order indices will differ.

inline std::string print_expr(const ame::Expr& e) {
  using ame::ExprKind;
  switch (e.kind) {
    case ExprKind::Ident: return e.text;
    case ExprKind::Literal:
      return e.text.empty() ? "0" : e.text;
    case ExprKind::Member: return print_expr(e.children[0]) + "." + e.text;
    case ExprKind::Index:
      return print_expr(e.children[0]) + "[" + print_expr(e.children[1]) + "]";
    case ExprKind::Call: {
      std::string out = print_expr(e.children[0]) + "(";
      for (std::size_t i = 1; i < e.children.size(); ++i) {
        if (i > 1) out += ", ";
        out += print_expr(e.children[i]);
      }
      return out + ")";
    }
    case ExprKind::Unary:
      if (e.text.rfind("post", 0) == 0) return print_expr(e.children[0]) + e.text.substr(4);
      return e.text + print_expr(e.children[0]);
    case ExprKind::Binary:
      if (e.text == "?:")
        return "(" + print_expr(e.children[0]) + " ? " + print_expr(e.children[1]) + " : " +
               print_expr(e.children[2]) + ")";
      return "(" + print_expr(e.children[0]) + " " + e.text + " " + print_expr(e.children[1]) +
             ")";
  }
  return "";
}

inline void print_block(const std::vector<ame::Statement>& block, std::string& out,
                        int indent);

inline void print_statement(const ame::Statement& s, std::string& out, int indent) {
  using namespace ame;
  std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, AssignStmt>) {
          out += pad;
          if (n.is_decl) out += n.decl_type == "mapping" ? "var " : n.decl_type + " ";
          out += print_expr(n.lhs);
          out += n.compound ? std::string(" ") + n.compound + "= " : " = ";
          out += print_expr(n.rhs) + ";\n";
        } else if constexpr (std::is_same_v<T, CallStmt>) {
          out += pad + print_expr(n.expr) + ";\n";
        } else if constexpr (std::is_same_v<T, RequireStmt>) {
          out += pad + (n.is_assert ? "assert(" : "require(") + print_expr(n.cond) + ");\n";
        } else if constexpr (std::is_same_v<T, IfStmt>) {
          out += pad + "if (" + print_expr(n.cond) + ") {\n";
          print_block(n.then_block, out, indent + 1);
          out += pad + "}";
          if (n.has_else) {
            out += " else {\n";
            print_block(n.else_block, out, indent + 1);
            out += pad + "}";
          }
          out += "\n";
        } else if constexpr (std::is_same_v<T, LoopStmt>) {
          if (n.kind == LoopKind::While) {
            out += pad + "while (" + (n.cond ? print_expr(*n.cond) : "true") + ") {\n";
          } else {
            out += pad + "for (";
            if (!n.init.empty()) {
              std::string tmp;
              print_statement(n.init[0], tmp, 0);
              tmp.erase(tmp.find_last_of(';'));  // strip ";\n"
              out += tmp;
            }
            out += "; ";
            if (n.cond) out += print_expr(*n.cond);
            out += "; ";
            for (std::size_t i = 0; i < n.updates.size(); ++i) {
              if (i) out += ", ";
              std::string tmp;
              print_statement(n.updates[i], tmp, 0);
              tmp.erase(tmp.find_last_of(';'));
              out += tmp;
            }
            out += ") {\n";
          }
          print_block(n.body, out, indent + 1);
          out += pad + "}\n";
        } else if constexpr (std::is_same_v<T, ReturnStmt>) {
          out += pad + "return";
          if (n.value) out += " " + print_expr(*n.value);
          out += ";\n";
        } else if constexpr (std::is_same_v<T, RevertStmt>) {
          out += pad + "revert;\n";
        } else if constexpr (std::is_same_v<T, ThrowStmt>) {
          out += pad + "throw;\n";
        } else if constexpr (std::is_same_v<T, OpaqueStmt>) {
          out += pad + n.text + ";\n";
        }
      },
      s.node);
}

inline void print_block(const std::vector<ame::Statement>& block, std::string& out, int indent) {
  for (const auto& s : block) print_statement(s, out, indent);
}

inline std::string pretty_print(const ame::FunctionIR& ir) {
  std::string out = "function " + ir.name + "(";
  for (std::size_t i = 0; i < ir.params.size(); ++i) {
    if (i) out += ", ";
    out += (ir.params[i].type.empty() ? "uint" : ir.params[i].type) + " " + ir.params[i].name;
  }
  out += ")";
  for (const auto& m : ir.modifiers) out += " " + m;
  out += " {\n";
  print_block(ir.statements, out, 1);
  out += "}\n";
  return out;
}

inline void strip_volatile(nlohmann::json& j) {
  if (j.is_object()) {
    j.erase("span");
    j.erase("order");
    for (auto& [k, v] : j.items()) strip_volatile(v);
  } else if (j.is_array()) {
    for (auto& v : j) strip_volatile(v);
  }
}

/// Structural IR equality ignoring source spans and pre-order indices.
inline bool ir_equal_modulo_spans(const ame::FunctionIR& a, const ame::FunctionIR& b) {
  nlohmann::json ja = ame::ir_to_json(a), jb = ame::ir_to_json(b);
  strip_volatile(ja);
  strip_volatile(jb);
  return ja == jb;
}

}  // namespace test_support
