#pragma once

#include <cassert>
#include <string>
#include <utility>
#include <vector>

#include "ame/ast.hpp"
#include "ame/lexer.hpp"

namespace ame {

struct ContractDef {
  std::string name;
  std::vector<StateVar> state_vars;
  std::vector<FunctionIR> functions;
};

struct SourceUnit {
  std::vector<ContractDef> contracts;  // top-level functions live in a contract named ""
};

namespace detail {

inline bool is_type_name(const std::string& s) {
  if (s == "address" || s == "bool" || s == "string" || s == "var" || s == "byte") return true;
  if (s.rfind("uint", 0) == 0 || s.rfind("int", 0) == 0 || s.rfind("bytes", 0) == 0) {
    std::string rest = s.rfind("uint", 0) == 0   ? s.substr(4)
                       : s.rfind("int", 0) == 0  ? s.substr(3)
                                                 : s.substr(5);
    return rest.empty() || rest.find_first_not_of("0123456789") == std::string::npos;
  }
  return false;
}

inline bool is_storage_qualifier(const std::string& s) {
  return s == "memory" || s == "storage" || s == "calldata" || s == "payable" ||
         s == "constant" || s == "public" || s == "private" || s == "internal";
}

inline bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace detail

/// Recursive-descent parser over the token stream. Statement forms outside
/// the supported subset degrade to opaque statements instead of failing, so
/// real-world files parse partially.
class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  /// Parses one function starting at the current position, which must be a
  /// `function` keyword.
  FunctionIR parse_function() {
    expect_keyword("function");
    FunctionIR ir;
    if (!at_kind(TokenKind::Identifier))
      throw MalformedHeaderError("expected function name at " + here());
    ir.name = eat().text;
    if (!at_punct("(")) throw MalformedHeaderError("expected '(' after function name at " + here());
    eat();
    parse_params(ir);
    parse_modifiers(ir);
    if (at_punct(";")) {  // body-less declaration
      eat();
      finalize(ir);
      return ir;
    }
    if (!at_punct("{"))
      throw MalformedHeaderError("expected function body at " + here());
    eat();
    ir.statements = parse_block(ir);
    finalize(ir);
    return ir;
  }

  /// Parses a whole source file: contracts with state variables and
  /// functions, plus any top-level functions.
  static SourceUnit parse_source(const std::string& text) {
    Parser p(tokenize(text));
    SourceUnit unit;
    ContractDef toplevel;
    while (!p.eof()) {
      if (p.at_keyword("contract") ||
          (p.at_kind(TokenKind::Identifier) &&
           (p.peek().text == "library" || p.peek().text == "interface"))) {
        unit.contracts.push_back(p.parse_contract());
        continue;
      }
      if (p.at_keyword("function")) {
        p.parse_function_into(toplevel);
        continue;
      }
      std::size_t before = p.pos_;
      p.skip_toplevel_item();
      if (p.pos_ == before && !p.eof()) p.eat();  // never stall on stray tokens
    }
    if (!toplevel.functions.empty()) unit.contracts.push_back(std::move(toplevel));
    return unit;
  }

  /// Builds the per-contract index and upgrades Plain calls that target a
  /// transfer wrapper (a same-contract function containing call.value) to
  /// TransferLike.
  static ContractIndex index_contract(ContractDef& c) {
    ContractIndex idx;
    idx.contract_name = c.name;
    idx.state_vars = c.state_vars;
    for (const auto& f : c.functions) {
      idx.function_names.insert(f.name);
      bool has_cv = false;
      walk_statements(f, [&](const Statement& s, const WalkContext&) {
        for (const auto& cs : s.call_sites)
          if (cs.kind == CallKind::CallValue) has_cv = true;
      });
      if (has_cv) idx.transfer_like.insert(f.name);
    }
    for (auto& f : c.functions) rekind_transfer_calls(f, idx);
    return idx;
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;

  bool eof() const { return pos_ >= toks_.size(); }
  const Token& peek(std::size_t off = 0) const {
    static const Token eof_tok{TokenKind::Punct, "<eof>", 0, 0};
    return pos_ + off < toks_.size() ? toks_[pos_ + off] : eof_tok;
  }
  Token eat() { return toks_[pos_++]; }
  bool at_kind(TokenKind k) const { return !eof() && peek().kind == k; }
  bool at_punct(std::string_view t) const { return !eof() && peek().is_punct(t); }
  bool at_keyword(std::string_view t) const { return !eof() && peek().is_keyword(t); }
  std::string here() const {
    if (eof()) return "<eof>";
    return "line " + std::to_string(peek().line) + ", col " + std::to_string(peek().col);
  }
  void expect_keyword(std::string_view t) {
    if (!at_keyword(t)) throw MalformedHeaderError("expected '" + std::string(t) + "' at " + here());
    eat();
  }
  void expect_punct(std::string_view t) {
    if (!at_punct(t)) throw ParseError("expected '" + std::string(t) + "' at " + here());
    eat();
  }

  struct ParseError : Error {
    using Error::Error;
  };

  // --- header -------------------------------------------------------------

  void parse_params(FunctionIR& ir) {
    while (!eof() && !at_punct(")")) {
      std::vector<Token> group;
      int depth = 0;
      while (!eof()) {
        if (depth == 0 && (at_punct(",") || at_punct(")"))) break;
        if (at_punct("{") || at_punct("}") || at_punct(";"))
          throw MalformedHeaderError("unterminated parameter list at " + here());
        if (at_punct("(") || at_punct("[")) depth++;
        if (at_punct(")") || at_punct("]")) depth--;
        group.push_back(eat());
      }
      if (!group.empty()) {
        Param p;
        // Last identifier is the name; everything before it is the type.
        int name_at = -1;
        for (int i = static_cast<int>(group.size()) - 1; i >= 0; --i) {
          if (group[i].kind == TokenKind::Identifier &&
              !detail::is_storage_qualifier(group[i].text)) {
            name_at = i;
            break;
          }
        }
        if (name_at >= 0 && name_at == static_cast<int>(group.size()) - 1 && group.size() > 1) {
          p.name = group[name_at].text;
          for (int i = 0; i < name_at; ++i) {
            if (!p.type.empty()) p.type += " ";
            p.type += group[i].text;
          }
        } else if (group.size() == 1) {
          // Unnamed parameter, type only.
          p.type = group[0].text;
        } else if (name_at >= 0) {
          p.name = group.back().kind == TokenKind::Identifier ? group.back().text : "";
          for (std::size_t i = 0; i + 1 < group.size(); ++i) {
            if (!p.type.empty()) p.type += " ";
            p.type += group[i].text;
          }
        }
        if (!p.name.empty() || !p.type.empty()) ir.params.push_back(std::move(p));
      }
      if (at_punct(",")) eat();
    }
    if (eof()) throw MalformedHeaderError("unterminated parameter list");
    eat();  // ')'
  }

  void parse_modifiers(FunctionIR& ir) {
    while (!eof() && !at_punct("{") && !at_punct(";")) {
      if (at_keyword("returns")) {
        eat();
        if (at_punct("(")) skip_balanced("(", ")");
        continue;
      }
      if (at_kind(TokenKind::Identifier) || at_kind(TokenKind::Keyword)) {
        ir.modifiers.push_back(eat().text);
        if (at_punct("(")) skip_balanced("(", ")");
        continue;
      }
      eat();  // stray punctuation in the header; tolerate
    }
  }

  void skip_balanced(std::string_view open, std::string_view close) {
    assert(at_punct(open));
    eat();
    int depth = 1;
    while (!eof() && depth > 0) {
      if (at_punct(open)) depth++;
      if (at_punct(close)) depth--;
      eat();
    }
  }

  // --- statements ---------------------------------------------------------

  std::vector<Statement> parse_block(FunctionIR& ir) {
    std::vector<Statement> out;
    while (!eof() && !at_punct("}")) out.push_back(parse_statement(ir));
    if (eof()) throw UnbalancedBracesError("unexpected end of input inside block");
    eat();  // '}'
    return out;
  }

  std::vector<Statement> parse_stmt_or_block(FunctionIR& ir) {
    if (at_punct("{")) {
      eat();
      return parse_block(ir);
    }
    std::vector<Statement> out;
    out.push_back(parse_statement(ir));
    return out;
  }

  Statement parse_statement(FunctionIR& ir) {
    Statement s;
    s.span.line = peek().line;
    s.span.col = peek().col;
    try {
      parse_statement_node(ir, s);
    } catch (const ParseError&) {
      recover_opaque(s);
    }
    s.span.end_line = pos_ > 0 ? toks_[pos_ - 1].line : s.span.line;
    s.span.end_col = pos_ > 0 ? toks_[pos_ - 1].col : s.span.col;
    return s;
  }

  void parse_statement_node(FunctionIR& ir, Statement& s) {
    if (at_keyword("require") || at_keyword("assert")) {
      RequireStmt r;
      r.is_assert = peek().text == "assert";
      eat();
      expect_punct("(");
      r.cond = parse_expr();
      if (at_punct(",")) {  // optional message argument
        eat();
        parse_expr();
      }
      expect_punct(")");
      expect_punct(";");
      s.node = std::move(r);
      return;
    }
    if (at_keyword("revert")) {
      eat();
      if (at_punct("(")) skip_balanced("(", ")");
      if (at_punct(";")) eat();
      s.node = RevertStmt{};
      return;
    }
    if (at_keyword("throw")) {
      eat();
      if (at_punct(";")) eat();
      s.node = ThrowStmt{};
      return;
    }
    if (at_keyword("if")) {
      eat();
      IfStmt f;
      expect_punct("(");
      f.cond = parse_expr();
      expect_punct(")");
      f.then_block = parse_stmt_or_block(ir);
      if (at_keyword("else")) {
        eat();
        f.has_else = true;
        f.else_block = parse_stmt_or_block(ir);
      }
      s.node = std::move(f);
      return;
    }
    if (at_keyword("while")) {
      eat();
      LoopStmt l;
      l.kind = LoopKind::While;
      expect_punct("(");
      if (!at_punct(")")) l.cond = parse_expr();
      expect_punct(")");
      l.body = parse_stmt_or_block(ir);
      s.node = std::move(l);
      return;
    }
    if (at_keyword("for")) {
      eat();
      LoopStmt l;
      l.kind = LoopKind::For;
      expect_punct("(");
      if (!at_punct(";")) l.init.push_back(parse_simple_statement(ir, /*consume_semi=*/false));
      expect_punct(";");
      if (!at_punct(";")) l.cond = parse_expr();
      expect_punct(";");
      while (!at_punct(")")) {
        l.updates.push_back(parse_simple_statement(ir, /*consume_semi=*/false));
        if (at_punct(","))
          eat();
        else
          break;
      }
      expect_punct(")");
      l.body = parse_stmt_or_block(ir);
      s.node = std::move(l);
      return;
    }
    if (at_keyword("return")) {
      eat();
      ReturnStmt r;
      if (!at_punct(";")) r.value = parse_expr();
      expect_punct(";");
      s.node = std::move(r);
      return;
    }
    s.node = parse_simple_statement(ir, /*consume_semi=*/true).node;
  }

  /// Local declaration, assignment, inc/dec or call; used both for normal
  /// statements and the for-header slots.
  Statement parse_simple_statement(FunctionIR& ir, bool consume_semi) {
    Statement s;
    s.span.line = peek().line;
    s.span.col = peek().col;

    // Local declaration: type name [qualifiers] ident [= expr]
    if ((at_kind(TokenKind::Identifier) && detail::is_type_name(peek().text)) ||
        at_keyword("mapping")) {
      std::size_t save = pos_;
      std::string type_text = eat().text;
      if (type_text == "mapping" && at_punct("(")) {
        skip_balanced("(", ")");
        type_text = "mapping";
      }
      while (at_punct("[")) {
        skip_balanced("[", "]");
        type_text += "[]";
      }
      while (at_kind(TokenKind::Identifier) && detail::is_storage_qualifier(peek().text)) eat();
      if (at_kind(TokenKind::Identifier)) {
        AssignStmt a;
        a.is_decl = true;
        a.decl_type = type_text;
        a.lhs.kind = ExprKind::Ident;
        a.lhs.text = eat().text;
        ir.locals.insert(a.lhs.text);
        if (at_punct("=")) {
          eat();
          a.rhs = parse_expr();
        } else {
          a.rhs.kind = ExprKind::Literal;
          a.rhs.text = "0";
        }
        if (consume_semi) expect_punct(";");
        compute_reads(a.lhs);
        compute_reads(a.rhs);
        s.node = std::move(a);
        return s;
      }
      pos_ = save;  // not a declaration after all
    }

    Expr e = parse_expr();
    // Postfix ++/-- desugars to a compound assignment.
    if (e.kind == ExprKind::Unary && (e.text == "post++" || e.text == "post--" ||
                                      e.text == "++" || e.text == "--")) {
      AssignStmt a;
      a.lhs = e.children[0];
      a.compound = e.text.find("++") != std::string::npos ? '+' : '-';
      a.rhs.kind = ExprKind::Literal;
      a.rhs.text = "1";
      if (consume_semi) expect_punct(";");
      compute_reads(a.lhs);
      compute_reads(a.rhs);
      s.node = std::move(a);
      return s;
    }
    if (at_punct("=") || at_punct("+=") || at_punct("-=") || at_punct("*=") ||
        at_punct("/=") || at_punct("%=")) {
      std::string op = eat().text;
      AssignStmt a;
      a.lhs = std::move(e);
      a.compound = op.size() == 2 ? op[0] : 0;
      a.rhs = parse_expr();
      if (consume_semi) expect_punct(";");
      s.node = std::move(a);
      return s;
    }
    if (e.kind == ExprKind::Call) {
      CallStmt c;
      c.path = callee_path(e);
      c.expr = std::move(e);
      if (consume_semi) expect_punct(";");
      s.node = std::move(c);
      return s;
    }
    // A bare expression statement we do not model; keep its reads.
    OpaqueStmt o;
    o.reads = e.reads;
    if (consume_semi) {
      if (!at_punct(";")) throw ParseError("expected ';' at " + here());
      eat();
    }
    s.node = std::move(o);
    return s;
  }

  /// Consumes tokens to the end of the failed statement and records its
  /// identifier reads.
  void recover_opaque(Statement& s) {
    OpaqueStmt o;
    int depth = 0;
    while (!eof()) {
      if (at_punct("{")) depth++;
      if (at_punct("}")) {
        if (depth == 0) break;
        depth--;
      }
      const Token& t = peek();
      if (t.kind == TokenKind::Identifier) {
        if (std::find(o.reads.begin(), o.reads.end(), t.text) == o.reads.end())
          o.reads.push_back(t.text);
      }
      o.text += t.text;
      o.text += ' ';
      bool was_semi = t.is_punct(";");
      eat();
      if (was_semi && depth == 0) break;
    }
    s.node = std::move(o);
  }

  // --- expressions ----------------------------------------------------------

  static int binary_prec(const std::string& op) {
    if (op == "**") return 10;
    if (op == "*" || op == "/" || op == "%") return 9;
    if (op == "+" || op == "-") return 8;
    if (op == "<<" || op == ">>") return 7;
    if (op == "<" || op == ">" || op == "<=" || op == ">=") return 6;
    if (op == "==" || op == "!=") return 5;
    if (op == "&") return 4;
    if (op == "^") return 3;
    if (op == "|") return 2;
    if (op == "&&") return 1;
    if (op == "||") return 0;
    return -1;
  }

  Expr parse_expr(int min_prec = 0) {
    Expr lhs = parse_unary();
    while (!eof() && at_kind(TokenKind::Punct)) {
      // Ternary binds loosest.
      if (min_prec == 0 && at_punct("?")) {
        eat();
        Expr mid = parse_expr();
        expect_punct(":");
        Expr rhs = parse_expr();
        Expr t;
        t.kind = ExprKind::Binary;
        t.text = "?:";
        t.children = {std::move(lhs), std::move(mid), std::move(rhs)};
        lhs = std::move(t);
        continue;
      }
      int prec = binary_prec(peek().text);
      if (prec < min_prec) break;
      std::string op = eat().text;
      Expr rhs = parse_expr(prec + 1);
      Expr b;
      b.kind = ExprKind::Binary;
      b.text = std::move(op);
      b.children = {std::move(lhs), std::move(rhs)};
      lhs = std::move(b);
    }
    compute_reads(lhs);
    return lhs;
  }

  Expr parse_unary() {
    if (at_punct("!") || at_punct("-") || at_punct("~") || at_punct("++") || at_punct("--")) {
      Expr u;
      u.kind = ExprKind::Unary;
      u.text = eat().text;
      u.children.push_back(parse_unary());
      return u;
    }
    return parse_postfix();
  }

  Expr parse_postfix() {
    Expr e = parse_primary();
    while (!eof()) {
      if (at_kind(TokenKind::MemberDot)) {
        eat();
        if (!at_kind(TokenKind::Identifier) && !at_kind(TokenKind::Keyword))
          throw ParseError("expected member name at " + here());
        Expr m;
        m.kind = ExprKind::Member;
        m.text = eat().text;
        m.children.push_back(std::move(e));
        e = std::move(m);
        continue;
      }
      if (at_punct("[")) {
        eat();
        Expr idx;
        idx.kind = ExprKind::Index;
        Expr sub = parse_expr();
        expect_punct("]");
        idx.children.push_back(std::move(e));
        idx.children.push_back(std::move(sub));
        e = std::move(idx);
        continue;
      }
      if (at_punct("(")) {
        eat();
        Expr call;
        call.kind = ExprKind::Call;
        call.children.push_back(std::move(e));
        while (!at_punct(")")) {
          call.children.push_back(parse_expr());
          if (at_punct(","))
            eat();
          else
            break;
        }
        expect_punct(")");
        e = std::move(call);
        continue;
      }
      if (at_punct("++") || at_punct("--")) {
        Expr u;
        u.kind = ExprKind::Unary;
        u.text = "post" + eat().text;
        u.children.push_back(std::move(e));
        e = std::move(u);
        continue;
      }
      break;
    }
    return e;
  }

  Expr parse_primary() {
    if (at_punct("(")) {
      eat();
      Expr e = parse_expr();
      expect_punct(")");
      return e;
    }
    if (at_kind(TokenKind::Identifier) || at_kind(TokenKind::Keyword)) {
      Expr e;
      e.kind = ExprKind::Ident;
      e.text = eat().text;
      return e;
    }
    if (at_kind(TokenKind::Literal)) {
      Expr e;
      e.kind = ExprKind::Literal;
      e.text = eat().text;
      return e;
    }
    throw ParseError("unexpected token at " + here());
  }

  // --- finalization ---------------------------------------------------------

  void parse_function_into(ContractDef& c) {
    c.functions.push_back(parse_function());
  }

  ContractDef parse_contract() {
    ContractDef c;
    eat();  // 'contract' / 'library' / 'interface'
    if (at_kind(TokenKind::Identifier)) c.name = eat().text;
    while (!eof() && !at_punct("{")) eat();  // `is Base, ...`
    if (eof()) return c;
    eat();  // '{'
    while (!eof() && !at_punct("}")) {
      if (at_keyword("function")) {
        try {
          parse_function_into(c);
        } catch (const Error&) {
          skip_failed_function();
        }
        continue;
      }
      parse_state_var_or_skip(c);
    }
    if (!eof()) eat();  // '}'
    return c;
  }

  void skip_failed_function() {
    // Abandon the current function: skip to the next balanced close or ';'.
    int depth = 0;
    while (!eof()) {
      if (at_punct("{")) depth++;
      if (at_punct("}")) {
        if (depth == 0) return;
        depth--;
        eat();
        if (depth == 0) return;
        continue;
      }
      if (at_punct(";") && depth == 0) {
        eat();
        return;
      }
      eat();
    }
  }

  void parse_state_var_or_skip(ContractDef& c) {
    if (at_keyword("mapping")) {
      StateVar v;
      eat();
      std::string key, val;
      if (at_punct("(")) {
        eat();
        if (!eof()) key = eat().text;
        if (at_punct("=>")) eat();
        while (!eof() && !at_punct(")")) val += eat().text;
        if (!eof()) eat();  // ')'
      }
      v.type_text = "mapping(" + key + "=>" + val + ")";
      v.mapping_addr_uint = key == "address" && val.rfind("uint", 0) == 0;
      while (at_kind(TokenKind::Identifier) && detail::is_storage_qualifier(peek().text)) eat();
      if (at_kind(TokenKind::Identifier)) {
        v.name = eat().text;
        c.state_vars.push_back(std::move(v));
      }
      skip_to_semi();
      return;
    }
    if (at_kind(TokenKind::Identifier) && detail::is_type_name(peek().text)) {
      StateVar v;
      v.type_text = eat().text;
      while (at_punct("[")) {
        skip_balanced("[", "]");
        v.type_text += "[]";
      }
      while (at_kind(TokenKind::Identifier) && detail::is_storage_qualifier(peek().text)) eat();
      if (at_kind(TokenKind::Identifier)) {
        v.name = eat().text;
        c.state_vars.push_back(std::move(v));
      }
      skip_to_semi();
      return;
    }
    // event/modifier/struct/using/constructor/...: skip the whole item.
    skip_toplevel_item();
  }

  void skip_toplevel_item() {
    while (!eof()) {
      if (at_punct(";")) {
        eat();
        return;
      }
      if (at_punct("{")) {
        skip_balanced("{", "}");
        return;
      }
      if (at_punct("}")) return;  // let the caller close the contract
      eat();
    }
  }

  void skip_to_semi() {
    while (!eof() && !at_punct(";")) eat();
    if (!eof()) eat();
  }

  /// Assigns pre-order statement indices and collects classified call sites.
  void finalize(FunctionIR& ir) {
    int next = 0;
    assign_order(ir.statements, next);
    collect_sites(ir.statements, ir.name);
  }

  static void assign_order(std::vector<Statement>& block, int& next) {
    for (auto& s : block) {
      s.order = next++;
      if (auto* iff = std::get_if<IfStmt>(&s.node)) {
        assign_order(iff->then_block, next);
        assign_order(iff->else_block, next);
      } else if (auto* loop = std::get_if<LoopStmt>(&s.node)) {
        assign_order(loop->init, next);
        assign_order(loop->updates, next);
        assign_order(loop->body, next);
      }
    }
  }

  static void classify_site(CallSite& cs, const std::string& fname) {
    std::string p = cs.path;
    if (p.rfind("this.", 0) == 0) p = p.substr(5);
    if (p == "call.value" || detail::ends_with(p, ".call.value"))
      cs.kind = CallKind::CallValue;
    else if (p == fname)
      cs.kind = CallKind::SelfCall;
    else
      cs.kind = CallKind::Plain;
  }

  static void find_call_sites(const Expr& e, std::vector<CallSite>& out,
                              const std::string& fname) {
    if (e.kind == ExprKind::Call) {
      CallSite cs;
      cs.path = callee_path(e);
      cs.reads = e.reads;
      classify_site(cs, fname);
      out.push_back(std::move(cs));
    }
    for (const auto& c : e.children) find_call_sites(c, out, fname);
  }

  static void collect_sites(std::vector<Statement>& block, const std::string& fname) {
    for (auto& s : block) {
      s.call_sites.clear();
      std::visit(
          [&](auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, AssignStmt>) {
              find_call_sites(n.rhs, s.call_sites, fname);
              find_call_sites(n.lhs, s.call_sites, fname);
            } else if constexpr (std::is_same_v<T, CallStmt>) {
              find_call_sites(n.expr, s.call_sites, fname);
              if (!s.call_sites.empty()) n.kind = s.call_sites.front().kind;
            } else if constexpr (std::is_same_v<T, RequireStmt>) {
              find_call_sites(n.cond, s.call_sites, fname);
            } else if constexpr (std::is_same_v<T, IfStmt>) {
              find_call_sites(n.cond, s.call_sites, fname);
              collect_sites(n.then_block, fname);
              collect_sites(n.else_block, fname);
            } else if constexpr (std::is_same_v<T, LoopStmt>) {
              if (n.cond) find_call_sites(*n.cond, s.call_sites, fname);
              collect_sites(n.init, fname);
              collect_sites(n.updates, fname);
              collect_sites(n.body, fname);
            } else if constexpr (std::is_same_v<T, ReturnStmt>) {
              if (n.value) find_call_sites(*n.value, s.call_sites, fname);
            }
          },
          s.node);
    }
  }

  static void rekind_transfer_calls(FunctionIR& f, const ContractIndex& idx) {
    auto upgrade = [&](CallSite& cs) {
      if (cs.kind != CallKind::Plain) return;
      std::string p = cs.path;
      if (p.rfind("this.", 0) == 0) p = p.substr(5);
      if (idx.transfer_like.count(p)) cs.kind = CallKind::TransferLike;
    };
    std::function<void(std::vector<Statement>&)> rec = [&](std::vector<Statement>& block) {
      for (auto& s : block) {
        for (auto& cs : s.call_sites) upgrade(cs);
        std::visit(
            [&](auto& n) {
              using T = std::decay_t<decltype(n)>;
              if constexpr (std::is_same_v<T, CallStmt>) {
                if (n.kind == CallKind::Plain) {
                  std::string p = n.path;
                  if (p.rfind("this.", 0) == 0) p = p.substr(5);
                  if (idx.transfer_like.count(p)) n.kind = CallKind::TransferLike;
                }
              } else if constexpr (std::is_same_v<T, IfStmt>) {
                rec(n.then_block);
                rec(n.else_block);
              } else if constexpr (std::is_same_v<T, LoopStmt>) {
                rec(n.init);
                rec(n.updates);
                rec(n.body);
              }
            },
            s.node);
      }
    };
    rec(f.statements);
  }
};

}  // namespace ame
