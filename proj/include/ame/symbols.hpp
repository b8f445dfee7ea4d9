#pragma once

#include <cctype>
#include <map>
#include <string>
#include <vector>

#include "ame/parser.hpp"

namespace ame {

enum class SymKind { Param, Local, State, External };

struct SymbolInfo {
  SymKind kind = SymKind::External;
  bool balance_like = false;
};

struct SymbolTable {
  std::map<std::string, SymbolInfo> syms;

  SymbolInfo classify(const std::string& name) const {
    auto it = syms.find(name);
    return it == syms.end() ? SymbolInfo{} : it->second;
  }
  bool is_balance_like(const std::string& name) const { return classify(name).balance_like; }
  bool is_state(const std::string& name) const { return classify(name).kind == SymKind::State; }
};

/// Classifies every identifier used by the function as param/local/state/
/// external and tags balance-like state variables.
///
/// A state variable is balance-like when its lowercase name contains
/// "balance", or when it is a mapping(address => uint...) that is both read
/// in a require/assert condition and written by subtraction in this function.
inline SymbolTable resolve_symbols(const FunctionIR& ir, const ContractIndex& index) {
  SymbolTable table;
  for (const auto& p : ir.params)
    if (!p.name.empty()) table.syms[p.name] = {SymKind::Param, false};
  for (const auto& l : ir.locals) table.syms[l] = {SymKind::Local, false};
  for (const auto& v : index.state_vars) {
    auto it = table.syms.find(v.name);
    if (it == table.syms.end())  // params/locals shadow state variables
      table.syms[v.name] = {SymKind::State, false};
  }

  // Signals for the two-part balance lexicon.
  std::map<std::string, bool> read_in_require, written_by_sub;
  walk_statements(ir, [&](const Statement& s, const WalkContext&) {
    if (const auto* r = std::get_if<RequireStmt>(&s.node)) {
      for (const auto& id : r->cond.reads) read_in_require[id] = true;
    } else if (const auto* a = std::get_if<AssignStmt>(&s.node)) {
      if (is_subtraction_write(*a)) {
        if (auto w = statement_write(s)) written_by_sub[*w] = true;
      }
    }
  });

  for (auto& [name, info] : table.syms) {
    if (info.kind != SymKind::State) continue;
    std::string lower;
    for (char c : name) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (lower.find("balance") != std::string::npos) {
      info.balance_like = true;
      continue;
    }
    const StateVar* v = index.state_var(name);
    if (v && v->mapping_addr_uint && read_in_require[name] && written_by_sub[name])
      info.balance_like = true;
  }

  // Remaining identifiers seen in the body become external.
  walk_statements(ir, [&](const Statement& s, const WalkContext&) {
    for (const auto& id : statement_reads(s))
      table.syms.emplace(id, SymbolInfo{SymKind::External, false});
    if (auto w = statement_write(s)) table.syms.emplace(*w, SymbolInfo{SymKind::External, false});
  });
  return table;
}

/// One function plus everything later stages need about it.
struct AnalyzedFunction {
  FunctionIR ir;
  SymbolTable symbols;
  ContractIndex index;
  std::string file;
};

/// Full frontend pipeline over a source text: parse, index the contract,
/// re-kind transfer-wrapper calls and resolve symbols for every function.
inline std::vector<AnalyzedFunction> analyze_source(const std::string& text,
                                                    const std::string& file = "") {
  SourceUnit unit = Parser::parse_source(text);
  std::vector<AnalyzedFunction> out;
  for (auto& c : unit.contracts) {
    ContractIndex idx = Parser::index_contract(c);
    for (auto& f : c.functions) {
      AnalyzedFunction af;
      af.ir = std::move(f);
      af.symbols = resolve_symbols(af.ir, idx);
      af.index = idx;
      af.file = file;
      out.push_back(std::move(af));
    }
  }
  return out;
}

}  // namespace ame
