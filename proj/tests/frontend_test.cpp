#include <catch2/catch_amalgamated.hpp>

#include "ame/json_io.hpp"
#include "ame/lexer.hpp"
#include "ame/parser.hpp"
#include "ame/symbols.hpp"
#include "support/pretty_print.hpp"
#include "support/util.hpp"

using namespace ame;

TEST_CASE("tokenize member chains") {
  auto toks = tokenize("msg.sender.call.value(x)()");
  std::vector<std::pair<TokenKind, std::string>> expect = {
      {TokenKind::Identifier, "msg"}, {TokenKind::MemberDot, "."},
      {TokenKind::Identifier, "sender"}, {TokenKind::MemberDot, "."},
      {TokenKind::Identifier, "call"}, {TokenKind::MemberDot, "."},
      {TokenKind::Identifier, "value"}, {TokenKind::Punct, "("},
      {TokenKind::Identifier, "x"}, {TokenKind::Punct, ")"},
      {TokenKind::Punct, "("}, {TokenKind::Punct, ")"}};
  REQUIRE(toks.size() == expect.size());
  for (std::size_t i = 0; i < expect.size(); ++i) {
    CHECK(toks[i].kind == expect[i].first);
    CHECK(toks[i].text == expect[i].second);
  }
}

TEST_CASE("tokenize empty input") { CHECK(tokenize("").empty()); }

TEST_CASE("tokenize while header") {
  auto toks = tokenize("while (i < 9) { }");
  REQUIRE(toks.size() == 8);
  CHECK(toks[0].is_keyword("while"));
  CHECK(toks[1].is_punct("("));
  CHECK(toks[2].text == "i");
  CHECK(toks[3].is_punct("<"));
  CHECK(toks[4].kind == TokenKind::Literal);
  CHECK(toks[4].text == "9");
  CHECK(toks[5].is_punct(")"));
  CHECK(toks[6].is_punct("{"));
  CHECK(toks[7].is_punct("}"));
}

TEST_CASE("tokenize preserves positions and drops comments") {
  auto toks = tokenize("a // comment\n  b /* x */ c");
  REQUIRE(toks.size() == 3);
  CHECK(toks[0].line == 1);
  CHECK(toks[1].line == 2);
  CHECK(toks[1].col == 3);
  CHECK(toks[2].text == "c");
}

TEST_CASE("tokenize error positions") {
  CHECK_THROWS_AS(tokenize("x = \"abc"), UnterminatedStringError);
  CHECK_THROWS_AS(tokenize("a # b"), IllegalCharacterError);
  try {
    tokenize("\n\n  @");
  } catch (const IllegalCharacterError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("parse the withdraw case") {
  auto af = test_util::analyze_named(test_util::kWithdrawSource, "withdraw");
  const FunctionIR& ir = af.ir;
  CHECK(ir.name == "withdraw");
  REQUIRE(ir.params.size() == 1);
  CHECK(ir.params[0].name == "amount");
  REQUIRE(ir.statements.size() == 3);

  CHECK(std::holds_alternative<RequireStmt>(ir.statements[0].node));
  const auto* call = std::get_if<CallStmt>(&ir.statements[1].node);
  REQUIRE(call != nullptr);
  CHECK(call->kind == CallKind::CallValue);
  CHECK(call->path == "msg.sender.call.value");
  const auto* assign = std::get_if<AssignStmt>(&ir.statements[2].node);
  REQUIRE(assign != nullptr);
  CHECK(assign->compound == '-');
  CHECK(is_subtraction_write(*assign));
}

TEST_CASE("parse empty function") {
  auto af = test_util::analyze_first("function f() {}");
  CHECK(af.ir.statements.empty());
  CHECK(af.ir.name == "f");
}

TEST_CASE("parse for with empty condition") {
  auto af = test_util::analyze_first("function f() { for(;;){} }");
  REQUIRE(af.ir.statements.size() == 1);
  const auto* loop = std::get_if<LoopStmt>(&af.ir.statements[0].node);
  REQUIRE(loop != nullptr);
  CHECK(loop->kind == LoopKind::For);
  CHECK(!loop->cond.has_value());
}

TEST_CASE("parser errors abort the function only") {
  CHECK_THROWS_AS(Parser(tokenize("function () {}")).parse_function(), MalformedHeaderError);
  CHECK_THROWS_AS(Parser(tokenize("function f() { if (x) { }")).parse_function(),
                  UnbalancedBracesError);
  // The surrounding contract still yields the sibling function.
  auto funcs = analyze_source("contract C { function broken( { } function ok() { a = 1; } }");
  bool found_ok = false;
  for (const auto& af : funcs) found_ok = found_ok || af.ir.name == "ok";
  CHECK(found_ok);
}

TEST_CASE("unknown statements become opaque, reads preserved") {
  auto af = test_util::analyze_first(
      "function f() { assembly { let x := 1 } emit Foo(bar); baz = 1; }");
  REQUIRE(!af.ir.statements.empty());
  bool has_opaque = false;
  int assigns = 0;
  walk_statements(af.ir, [&](const Statement& s, const WalkContext&) {
    if (std::holds_alternative<OpaqueStmt>(s.node)) has_opaque = true;
    if (std::holds_alternative<AssignStmt>(s.node)) assigns++;
  });
  CHECK(has_opaque);
  CHECK(assigns >= 1);
}

TEST_CASE("symbol classification") {
  auto af = test_util::analyze_named(test_util::kWithdrawSource, "withdraw");
  CHECK(af.symbols.classify("userBalance").kind == SymKind::State);
  CHECK(af.symbols.is_balance_like("userBalance"));
  CHECK(af.symbols.classify("amount").kind == SymKind::Param);
  CHECK(af.symbols.classify("tx.origin").kind == SymKind::External);
}

TEST_CASE("balance lexicon second signal: address-uint mapping, require + subtraction") {
  const char* src = R"(
    contract C {
      mapping(address => uint256) credit;
      mapping(address => uint256) lastSeen;
      function pay(uint amount) public {
        require(credit[msg.sender] >= amount);
        msg.sender.call.value(amount)();
        credit[msg.sender] -= amount;
        lastSeen[msg.sender] = amount;
      }
    }
  )";
  auto af = test_util::analyze_named(src, "pay");
  CHECK(af.symbols.is_balance_like("credit"));
  CHECK(!af.symbols.is_balance_like("lastSeen"));  // never read in a require / subtracted
}

TEST_CASE("locals are tracked and classified") {
  auto af = test_util::analyze_first("function f() { uint t = 1; t = t + 1; }");
  CHECK(af.symbols.classify("t").kind == SymKind::Local);
}

TEST_CASE("call kind is a pure function of callee path and enclosing name") {
  auto af = test_util::analyze_first("function f() { f(); g(); a.call.value(1)(); }");
  REQUIRE(af.ir.statements.size() == 3);
  CHECK(std::get_if<CallStmt>(&af.ir.statements[0].node)->kind == CallKind::SelfCall);
  CHECK(std::get_if<CallStmt>(&af.ir.statements[1].node)->kind == CallKind::Plain);
  CHECK(std::get_if<CallStmt>(&af.ir.statements[2].node)->kind == CallKind::CallValue);
}

TEST_CASE("transfer wrappers re-kind calls via the contract index") {
  const char* src = R"(
    contract C {
      function doSend(address to, uint v) internal { to.call.value(v)(); }
      function pay(address to, uint v) public { doSend(to, v); }
    }
  )";
  auto af = test_util::analyze_named(src, "pay");
  CHECK(af.index.transfer_like.count("doSend") == 1);
  const auto* call = std::get_if<CallStmt>(&af.ir.statements[0].node);
  REQUIRE(call != nullptr);
  CHECK(call->kind == CallKind::TransferLike);
}

TEST_CASE("statement count invariant under comments and whitespace") {
  const char* plain = "function f() { a = 1; if (a > 0) { b = a; } while (b < 3) { b += 1; } }";
  const char* noisy =
      "function f()   {\n  a = 1; // set a\n  if (a > 0)\n  {\n    /* copy */ b = a;\n  }\n"
      "  while (b < 3) { b += 1; }\n}";
  auto a = test_util::analyze_first(plain);
  auto b = test_util::analyze_first(noisy);
  int ca = 0, cb = 0;
  walk_statements(a.ir, [&](const Statement&, const WalkContext&) { ca++; });
  walk_statements(b.ir, [&](const Statement&, const WalkContext&) { cb++; });
  CHECK(ca == cb);
}

TEST_CASE("round trip: parse(pretty_print(ir)) equals ir up to spans") {
  const char* sources[] = {
      test_util::kWithdrawSource,
      "function f(uint n) { for (i = 0; i < n; i++) { total += i; } return total; }",
      "function g() { if (x > 1) { y = x; } else { revert; } }",
      "function h() { uint t = block.timestamp; if (t % 2 == 0) { w.call.value(p)(); } }",
  };
  for (const char* src : sources) {
    auto af = test_util::analyze_first(src);
    std::string printed = test_support::pretty_print(af.ir);
    INFO(printed);
    auto af2 = test_util::analyze_first(printed);
    CHECK(test_support::ir_equal_modulo_spans(af.ir, af2.ir));
  }
}

TEST_CASE("expression read sets union children") {
  auto af = test_util::analyze_first("function f() { x = a[i] + bar(c.d, 5) * 2; }");
  const auto* assign = std::get_if<AssignStmt>(&af.ir.statements[0].node);
  REQUIRE(assign != nullptr);
  const auto& reads = assign->rhs.reads;
  auto has = [&](const char* n) {
    return std::find(reads.begin(), reads.end(), n) != reads.end();
  };
  CHECK(has("a"));
  CHECK(has("i"));
  CHECK(has("c"));
  CHECK(has("bar"));
  CHECK(!has("x"));
}

TEST_CASE("builtin roots read as dotted identifiers") {
  auto af = test_util::analyze_first("function f() { t = block.timestamp; s = msg.sender; }");
  const auto* a0 = std::get_if<AssignStmt>(&af.ir.statements[0].node);
  REQUIRE(a0 != nullptr);
  CHECK(a0->rhs.reads == std::vector<std::string>{"block.timestamp"});
  const auto* a1 = std::get_if<AssignStmt>(&af.ir.statements[1].node);
  CHECK(a1->rhs.reads == std::vector<std::string>{"msg.sender"});
}
