#pragma once

#include <array>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "ame/symbols.hpp"

namespace ame {

inline constexpr const char* kTimestampSeed = "block.timestamp";
inline constexpr const char* kBlockNumberSeed = "block.number";

/// The three vulnerability-specific expert-pattern flags plus their
/// network-ready encodings: per pattern a one-hot identity over the three
/// pattern slots with the 0/1 presence digit appended.
struct PatternVector {
  Vuln vuln = Vuln::Reentrancy;
  std::array<bool, 3> flags{};
  std::array<std::array<double, 4>, 3> encodings{};
};

inline std::array<std::array<double, 4>, 3> encode_patterns(const std::array<bool, 3>& flags) {
  std::array<std::array<double, 4>, 3> enc{};
  for (int i = 0; i < 3; ++i) {
    enc[i][i] = 1.0;
    enc[i][3] = flags[i] ? 1.0 : 0.0;
  }
  return enc;
}

/// Result of flow- and path-insensitive taint propagation.
struct TaintState {
  std::set<std::string> tainted;
  std::set<std::string> seeds;
  bool sink_hit = false;
  std::set<std::string> sink_vars;  // tainted non-seed identifiers read by sink conditions
};

namespace detail {

inline bool reads_any(const std::vector<std::string>& reads, const std::set<std::string>& set) {
  for (const auto& r : reads)
    if (set.count(r)) return true;
  return false;
}

/// True when any statement in the block (recursively) satisfies the
/// predicate.
template <typename Pred>
bool block_any(const std::vector<Statement>& block, const Pred& pred) {
  for (const auto& s : block) {
    if (pred(s)) return true;
    bool hit = false;
    if (const auto* iff = std::get_if<IfStmt>(&s.node))
      hit = block_any(iff->then_block, pred) || block_any(iff->else_block, pred);
    else if (const auto* loop = std::get_if<LoopStmt>(&s.node))
      hit = block_any(loop->init, pred) || block_any(loop->updates, pred) ||
            block_any(loop->body, pred);
    if (hit) return true;
  }
  return false;
}

inline bool is_critical_statement(const Statement& s, const SymbolTable& syms,
                                  const std::set<std::string>& tainted) {
  for (const auto& cs : s.call_sites)
    if (cs.kind == CallKind::CallValue || cs.kind == CallKind::TransferLike) return true;
  if (std::get_if<AssignStmt>(&s.node)) {
    if (auto w = statement_write(s))
      if (syms.is_state(*w)) return true;
  }
  if (const auto* r = std::get_if<ReturnStmt>(&s.node))
    if (r->value && reads_any(r->value->reads, tainted)) return true;
  return false;
}

}  // namespace detail

/// Fixed-point taint propagation over assignments, ignoring branch
/// feasibility. A sink is a condition that both reads taint and guards a
/// critical operation: a money-transfer call, a state-variable write, or a
/// return of a tainted value. If/loop conditions guard their blocks;
/// require/assert conditions guard everything after them.
inline TaintState taint_propagate(const AnalyzedFunction& af, std::set<std::string> seeds) {
  TaintState st;
  st.seeds = seeds;
  st.tainted = std::move(seeds);

  bool changed = true;
  while (changed) {
    changed = false;
    walk_statements(af.ir, [&](const Statement& s, const WalkContext&) {
      const auto* a = std::get_if<AssignStmt>(&s.node);
      if (!a) return;
      if (!detail::reads_any(a->rhs.reads, st.tainted)) return;
      if (auto w = statement_write(s)) {
        if (!st.tainted.count(*w)) {
          st.tainted.insert(*w);
          changed = true;
        }
      }
    });
  }

  auto is_critical = [&](const Statement& s) {
    return detail::is_critical_statement(s, af.symbols, st.tainted);
  };

  // Require conditions guard all later statements: collect critical orders.
  std::vector<int> critical_orders;
  walk_statements(af.ir, [&](const Statement& s, const WalkContext&) {
    if (is_critical(s)) critical_orders.push_back(s.order);
  });

  auto note_sink = [&](const Expr& cond) {
    st.sink_hit = true;
    for (const auto& r : cond.reads)
      if (st.tainted.count(r) && !st.seeds.count(r)) st.sink_vars.insert(r);
  };

  walk_statements(af.ir, [&](const Statement& s, const WalkContext&) {
    if (const auto* iff = std::get_if<IfStmt>(&s.node)) {
      if (detail::reads_any(iff->cond.reads, st.tainted) &&
          (detail::block_any(iff->then_block, is_critical) ||
           detail::block_any(iff->else_block, is_critical)))
        note_sink(iff->cond);
    } else if (const auto* loop = std::get_if<LoopStmt>(&s.node)) {
      if (loop->cond && detail::reads_any(loop->cond->reads, st.tainted) &&
          detail::block_any(loop->body, is_critical))
        note_sink(*loop->cond);
    } else if (const auto* req = std::get_if<RequireStmt>(&s.node)) {
      if (detail::reads_any(req->cond.reads, st.tainted)) {
        for (int c : critical_orders)
          if (c > s.order) {
            note_sink(req->cond);
            break;
          }
      }
    }
  });
  return st;
}

// ---------------------------------------------------------------------------
// Extractors
// ---------------------------------------------------------------------------

/// Reentrancy: [enoughBalance, callValueInvocation, balanceDeduction].
inline PatternVector extract_reentrancy(const AnalyzedFunction& af) {
  PatternVector pv;
  pv.vuln = Vuln::Reentrancy;

  constexpr int kNone = std::numeric_limits<int>::max();
  int first_transfer = kNone;   // first callValue or transferLike call
  int first_callvalue = kNone;  // first direct callValue call
  bool any_transfer_call = false;

  walk_statements(af.ir, [&](const Statement& s, const WalkContext&) {
    for (const auto& cs : s.call_sites) {
      if (cs.kind == CallKind::CallValue) {
        any_transfer_call = true;
        first_transfer = std::min(first_transfer, s.order);
        first_callvalue = std::min(first_callvalue, s.order);
      } else if (cs.kind == CallKind::TransferLike) {
        any_transfer_call = true;
        first_transfer = std::min(first_transfer, s.order);
      }
    }
  });

  auto reads_balance = [&](const Expr& cond) {
    for (const auto& r : cond.reads)
      if (af.symbols.is_balance_like(r)) return true;
    return false;
  };

  bool enough_balance = false;
  walk_statements(af.ir, [&](const Statement& s, const WalkContext&) {
    if (s.order >= first_transfer) return;
    if (const auto* req = std::get_if<RequireStmt>(&s.node)) {
      if (reads_balance(req->cond)) enough_balance = true;
    } else if (const auto* iff = std::get_if<IfStmt>(&s.node)) {
      if (reads_balance(iff->cond)) enough_balance = true;
    }
  });

  bool deduction_after = false;
  if (first_callvalue != kNone) {
    walk_statements(af.ir, [&](const Statement& s, const WalkContext&) {
      if (s.order <= first_callvalue) return;
      const auto* a = std::get_if<AssignStmt>(&s.node);
      if (!a || !is_subtraction_write(*a)) return;
      if (auto w = statement_write(s))
        if (af.symbols.is_balance_like(*w)) deduction_after = true;
    });
  }

  pv.flags = {enough_balance, any_transfer_call, deduction_after};
  pv.encodings = encode_patterns(pv.flags);
  return pv;
}

/// Timestamp dependence: [timestampInvocation, timestampAssign,
/// timestampContaminate]. block.number seeds the taint and counts for the
/// assign/pass pattern but not for the invocation pattern.
inline PatternVector extract_timestamp(const AnalyzedFunction& af) {
  PatternVector pv;
  pv.vuln = Vuln::Timestamp;

  bool invocation = false;
  bool assigned = false;
  const std::set<std::string> seeds = {kTimestampSeed, kBlockNumberSeed};

  walk_statements(af.ir, [&](const Statement& s, const WalkContext&) {
    for (const auto& r : statement_reads(s))
      if (r == kTimestampSeed) invocation = true;
    if (const auto* a = std::get_if<AssignStmt>(&s.node)) {
      if (detail::reads_any(a->rhs.reads, seeds)) assigned = true;
    }
    for (const auto& cs : s.call_sites)
      if (detail::reads_any(cs.reads, seeds)) assigned = true;
  });

  TaintState taint = taint_propagate(af, seeds);

  pv.flags = {invocation, assigned, taint.sink_hit};
  pv.encodings = encode_patterns(pv.flags);
  return pv;
}

namespace detail {

/// Identifiers written anywhere in the block, recursively.
inline void collect_writes(const std::vector<Statement>& block, std::set<std::string>& out) {
  for (const auto& s : block) {
    if (auto w = statement_write(s)) out.insert(*w);
    if (const auto* iff = std::get_if<IfStmt>(&s.node)) {
      collect_writes(iff->then_block, out);
      collect_writes(iff->else_block, out);
    } else if (const auto* loop = std::get_if<LoopStmt>(&s.node)) {
      collect_writes(loop->init, out);
      collect_writes(loop->updates, out);
      collect_writes(loop->body, out);
    }
  }
}

/// A loop is suspicious when its exit cannot be reached: missing or
/// constant-true condition, or no statement in the body/updates writes any
/// variable the condition reads.
inline bool loop_exit_unreachable(const LoopStmt& loop) {
  if (!loop.cond) return true;
  if (loop.cond->is_literal_true()) return true;
  const auto& reads = loop.cond->reads;
  if (reads.empty()) return false;
  std::set<std::string> writes;
  collect_writes(loop.body, writes);
  collect_writes(loop.updates, writes);
  for (const auto& r : reads)
    if (writes.count(r)) return false;
  return true;
}

}  // namespace detail

/// Infinite loop: [loopStatement, loopCondition, selfInvocation].
/// loopCondition records the suspicious case (exit unreachable);
/// selfInvocation fires only for self-calls not shielded by any if.
inline PatternVector extract_infinite_loop(const AnalyzedFunction& af) {
  PatternVector pv;
  pv.vuln = Vuln::InfiniteLoop;

  bool has_loop = false, unreachable = false, self_call = false;
  walk_statements(af.ir, [&](const Statement& s, const WalkContext& ctx) {
    if (const auto* loop = std::get_if<LoopStmt>(&s.node)) {
      has_loop = true;
      if (detail::loop_exit_unreachable(*loop)) unreachable = true;
    }
    if (ctx.if_depth == 0) {
      for (const auto& cs : s.call_sites)
        if (cs.kind == CallKind::SelfCall) self_call = true;
    }
  });

  pv.flags = {has_loop, unreachable, self_call};
  pv.encodings = encode_patterns(pv.flags);
  return pv;
}

inline PatternVector extract_patterns(const AnalyzedFunction& af, Vuln vuln) {
  switch (vuln) {
    case Vuln::Reentrancy: return extract_reentrancy(af);
    case Vuln::Timestamp: return extract_timestamp(af);
    case Vuln::InfiniteLoop: return extract_infinite_loop(af);
  }
  throw Error("unreachable vulnerability kind");
}

}  // namespace ame
