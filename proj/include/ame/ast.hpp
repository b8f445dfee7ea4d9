#pragma once

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "ame/common.hpp"

namespace ame {

// ---------------------------------------------------------------------------
// Expressions
// ---------------------------------------------------------------------------

enum class ExprKind { Ident, Literal, Binary, Unary, Member, Index, Call };

/// Expression tree. `text` holds the identifier name, literal text or
/// operator spelling depending on the kind. Each node carries the set of
/// identifiers it reads (member chains rooted at the builtin namespaces
/// block/msg/tx read the dotted path as a single identifier, e.g.
/// "block.timestamp"; other chains read their base identifier).
struct Expr {
  ExprKind kind = ExprKind::Literal;
  std::string text;
  std::vector<Expr> children;
  std::vector<std::string> reads;

  bool is_literal_true() const {
    if (kind != ExprKind::Literal) return false;
    if (text == "true") return true;
    if (text.empty() || !std::isdigit(static_cast<unsigned char>(text[0]))) return false;
    std::string digits =
        (text.size() > 2 && (text[1] == 'x' || text[1] == 'X')) ? text.substr(2) : text;
    return digits.find_first_not_of("0_") != std::string::npos;  // nonzero numeric
  }
  bool is_literal_false() const {
    if (kind != ExprKind::Literal) return false;
    if (text == "false") return true;
    return !text.empty() && std::isdigit(static_cast<unsigned char>(text[0])) &&
           text.find_first_not_of("0_") == std::string::npos;
  }
};

inline bool is_builtin_root(const std::string& s) {
  return s == "block" || s == "msg" || s == "tx";
}

/// Dotted callee path of a call-like expression, ignoring intermediate
/// call applications: `msg.sender.call.value(x)()` -> "msg.sender.call.value".
inline std::string callee_path(const Expr& e) {
  switch (e.kind) {
    case ExprKind::Ident: return e.text;
    case ExprKind::Member: {
      std::string base = callee_path(e.children[0]);
      return base.empty() ? e.text : base + "." + e.text;
    }
    case ExprKind::Call:
    case ExprKind::Index:
      return e.children.empty() ? std::string() : callee_path(e.children[0]);
    default: return {};
  }
}

namespace detail {

inline void merge_reads(std::vector<std::string>& dst, const std::vector<std::string>& src) {
  for (const auto& s : src)
    if (std::find(dst.begin(), dst.end(), s) == dst.end()) dst.push_back(s);
}

/// Member chains collapse to one read: the full dotted path when rooted at a
/// builtin namespace, otherwise the base identifier.
inline std::vector<std::string> member_reads(const Expr& e) {
  const Expr* cur = &e;
  std::vector<std::string> parts;
  while (cur->kind == ExprKind::Member) {
    parts.push_back(cur->text);
    cur = &cur->children[0];
  }
  if (cur->kind == ExprKind::Ident) {
    if (is_builtin_root(cur->text)) {
      std::string path = cur->text;
      for (auto it = parts.rbegin(); it != parts.rend(); ++it) path += "." + *it;
      return {path};
    }
    return {cur->text};
  }
  // Base is itself an expression (e.g. an index or call); inherit its reads,
  // which are already computed bottom-up.
  return cur->reads;
}

}  // namespace detail

/// Fills `reads` bottom-up for the whole tree.
inline void compute_reads(Expr& e) {
  for (auto& c : e.children) compute_reads(c);
  e.reads.clear();
  switch (e.kind) {
    case ExprKind::Ident:
      e.reads.push_back(e.text);
      break;
    case ExprKind::Literal:
      break;
    case ExprKind::Member:
      e.reads = detail::member_reads(e);
      break;
    default:
      for (const auto& c : e.children) detail::merge_reads(e.reads, c.reads);
      break;
  }
}

// ---------------------------------------------------------------------------
// Statements
// ---------------------------------------------------------------------------

enum class CallKind { Plain, CallValue, TransferLike, SelfCall };
enum class LoopKind { For, While };

/// One call expression found inside a statement, classified by callee path.
struct CallSite {
  std::string path;
  CallKind kind = CallKind::Plain;
  std::vector<std::string> reads;  // callee + argument reads
};

struct Statement;

struct AssignStmt {
  Expr lhs;
  Expr rhs;
  char compound = 0;  // 0 for plain '=', else '+', '-', '*', '/', '%'
  bool is_decl = false;
  std::string decl_type;
};

struct CallStmt {
  Expr expr;  // the full call expression
  std::string path;
  CallKind kind = CallKind::Plain;
};

struct RequireStmt {
  Expr cond;
  bool is_assert = false;
};

struct IfStmt {
  Expr cond;
  std::vector<Statement> then_block;
  std::vector<Statement> else_block;
  bool has_else = false;
};

struct LoopStmt {
  LoopKind kind = LoopKind::While;
  std::optional<Expr> cond;
  std::vector<Statement> init;     // for-init, parsed as statements
  std::vector<Statement> updates;  // for-update expressions, desugared
  std::vector<Statement> body;
};

struct ReturnStmt {
  std::optional<Expr> value;
};

struct RevertStmt {};
struct ThrowStmt {};

/// Unrecognized syntax, preserved with its identifier reads.
struct OpaqueStmt {
  std::string text;
  std::vector<std::string> reads;
};

using StmtNode = std::variant<AssignStmt, CallStmt, RequireStmt, IfStmt, LoopStmt,
                              ReturnStmt, RevertStmt, ThrowStmt, OpaqueStmt>;

struct Statement {
  SourceSpan span;
  int order = 0;  // pre-order index within the function, assigned post-parse
  StmtNode node;
  std::vector<CallSite> call_sites;  // every call expression in the statement
};

struct Param {
  std::string name;
  std::string type;
};

struct FunctionIR {
  std::string name;
  std::vector<Param> params;
  std::vector<std::string> modifiers;
  std::vector<Statement> statements;
  std::set<std::string> locals;  // names declared in the body
};

// ---------------------------------------------------------------------------
// Contract-level context
// ---------------------------------------------------------------------------

struct StateVar {
  std::string name;
  std::string type_text;
  bool mapping_addr_uint = false;  // declared mapping(address => uint...)
};

struct ContractIndex {
  std::string contract_name;
  std::vector<StateVar> state_vars;
  std::set<std::string> function_names;
  std::set<std::string> transfer_like;  // functions whose body contains call.value

  bool is_state(const std::string& name) const {
    for (const auto& v : state_vars)
      if (v.name == name) return true;
    return false;
  }
  const StateVar* state_var(const std::string& name) const {
    for (const auto& v : state_vars)
      if (v.name == name) return &v;
    return nullptr;
  }
};

// ---------------------------------------------------------------------------
// Walking
// ---------------------------------------------------------------------------

struct WalkContext {
  int loop_depth = 0;
  int if_depth = 0;
};

/// Visits statements in pre-order (source order), including nested blocks and
/// for-init/update slots. The callback sees the statement and its context.
inline void walk_statements(const std::vector<Statement>& block, WalkContext ctx,
                            const std::function<void(const Statement&, const WalkContext&)>& fn) {
  for (const auto& s : block) {
    fn(s, ctx);
    if (const auto* iff = std::get_if<IfStmt>(&s.node)) {
      WalkContext inner = ctx;
      inner.if_depth++;
      walk_statements(iff->then_block, inner, fn);
      walk_statements(iff->else_block, inner, fn);
    } else if (const auto* loop = std::get_if<LoopStmt>(&s.node)) {
      walk_statements(loop->init, ctx, fn);
      WalkContext inner = ctx;
      inner.loop_depth++;
      walk_statements(loop->updates, inner, fn);
      walk_statements(loop->body, inner, fn);
    }
  }
}

inline void walk_statements(const FunctionIR& ir,
                            const std::function<void(const Statement&, const WalkContext&)>& fn) {
  walk_statements(ir.statements, WalkContext{}, fn);
}

/// Identifier reads of one statement (not descending into nested blocks;
/// nested statements report their own reads when walked).
inline std::vector<std::string> statement_reads(const Statement& s) {
  std::vector<std::string> out;
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, AssignStmt>) {
          detail::merge_reads(out, n.rhs.reads);
          // Subscripts on the left-hand side are reads too: everything the
          // lhs reads except its base identifier.
          const Expr* base = &n.lhs;
          while ((base->kind == ExprKind::Index || base->kind == ExprKind::Member) &&
                 !base->children.empty())
            base = &base->children[0];
          for (const auto& r : n.lhs.reads)
            if (base->kind != ExprKind::Ident || r != base->text)
              detail::merge_reads(out, {r});
          if (n.compound) detail::merge_reads(out, n.lhs.reads);
        } else if constexpr (std::is_same_v<T, CallStmt>) {
          detail::merge_reads(out, n.expr.reads);
        } else if constexpr (std::is_same_v<T, RequireStmt>) {
          detail::merge_reads(out, n.cond.reads);
        } else if constexpr (std::is_same_v<T, IfStmt>) {
          detail::merge_reads(out, n.cond.reads);
        } else if constexpr (std::is_same_v<T, LoopStmt>) {
          if (n.cond) detail::merge_reads(out, n.cond->reads);
        } else if constexpr (std::is_same_v<T, ReturnStmt>) {
          if (n.value) detail::merge_reads(out, n.value->reads);
        } else if constexpr (std::is_same_v<T, OpaqueStmt>) {
          detail::merge_reads(out, n.reads);
        }
      },
      s.node);
  return out;
}

/// Base identifier written by a statement, if any (assignment targets).
inline std::optional<std::string> statement_write(const Statement& s) {
  if (const auto* a = std::get_if<AssignStmt>(&s.node)) {
    const Expr* base = &a->lhs;
    while ((base->kind == ExprKind::Index || base->kind == ExprKind::Member) &&
           !base->children.empty())
      base = &base->children[0];
    if (base->kind == ExprKind::Ident) return base->text;
  }
  return std::nullopt;
}

/// True when the assignment subtracts from its own target (`x -= e` or
/// `x = x - e` shapes).
inline bool is_subtraction_write(const AssignStmt& a) {
  if (a.compound == '-') return true;
  if (a.compound) return false;
  if (a.rhs.kind != ExprKind::Binary || a.rhs.text != "-") return false;
  const Expr* base = &a.lhs;
  while ((base->kind == ExprKind::Index || base->kind == ExprKind::Member) &&
         !base->children.empty())
    base = &base->children[0];
  if (base->kind != ExprKind::Ident) return false;
  const auto& r = a.rhs.reads;
  return std::find(r.begin(), r.end(), base->text) != r.end();
}

}  // namespace ame
