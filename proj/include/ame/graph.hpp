#pragma once

#include <algorithm>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "ame/patterns.hpp"

namespace ame {

inline constexpr int kNodeFeatureDim = 15;  // 3 kind + 8 category + 2 degree + 2 flags

enum class NodeKind { Core, Normal, Fallback };

enum class EdgeType {
  Assert,
  Require,
  If,
  IfElse,
  IfRevert,
  IfThrow,
  IfThen,
  WhileDo,
  ForDo,
  Sequential,
  Assign,
  Access,
  FallbackTrigger,
  FallbackReturn,
};

enum class EdgeClass { ControlFlow, DataFlow, Fallback };

inline EdgeClass edge_class(EdgeType t) {
  switch (t) {
    case EdgeType::Assign:
    case EdgeType::Access: return EdgeClass::DataFlow;
    case EdgeType::FallbackTrigger:
    case EdgeType::FallbackReturn: return EdgeClass::Fallback;
    default: return EdgeClass::ControlFlow;
  }
}

inline const char* to_string(EdgeType t) {
  switch (t) {
    case EdgeType::Assert: return "assert";
    case EdgeType::Require: return "require";
    case EdgeType::If: return "if";
    case EdgeType::IfElse: return "if-else";
    case EdgeType::IfRevert: return "if-revert";
    case EdgeType::IfThrow: return "if-throw";
    case EdgeType::IfThen: return "if-then";
    case EdgeType::WhileDo: return "while-do";
    case EdgeType::ForDo: return "for-do";
    case EdgeType::Sequential: return "sequential";
    case EdgeType::Assign: return "assign";
    case EdgeType::Access: return "access";
    case EdgeType::FallbackTrigger: return "fallback-trigger";
    case EdgeType::FallbackReturn: return "fallback-return";
  }
  return "?";
}

inline const char* to_string(EdgeClass c) {
  switch (c) {
    case EdgeClass::ControlFlow: return "control-flow";
    case EdgeClass::DataFlow: return "data-flow";
    case EdgeClass::Fallback: return "fallback";
  }
  return "?";
}

inline constexpr int kEdgeTypeCount = 14;

struct GraphNode {
  int id = 0;
  NodeKind kind = NodeKind::Normal;
  int category_slot = -1;  // 0..2 within the vulnerability's core-node table row
  std::string label;
  std::vector<double> init_feature;  // length kNodeFeatureDim, filled at build end
};

struct GraphEdge {
  int start = 0;
  int end = 0;
  EdgeType etype = EdgeType::Sequential;
  EdgeClass eclass = EdgeClass::ControlFlow;
  int temporal = 0;      // 1..E, contiguous
  int anchor_order = 0;  // pre-order index of the owning statement
};

struct ContractGraph {
  std::vector<GraphNode> nodes;
  std::vector<GraphEdge> edges;
  int fallback_id = -1;

  bool empty() const { return nodes.empty(); }
  bool has_fallback() const { return fallback_id >= 0; }
};

/// Core-only graph with merged init features. `assignment` maps every
/// original node id to the core node that absorbed it (cores map to
/// themselves).
struct NormalizedGraph {
  std::vector<GraphNode> nodes;
  std::vector<GraphEdge> edges;
  std::map<int, int> assignment;
};

inline const char* category_name(Vuln v, int slot) {
  static const char* names[3][3] = {
      {"call.value invocation", "transfer-wrapper call", "balance variable"},
      {"block.timestamp invocation", "block.number invocation", "affects critical condition"},
      {"for loop", "while loop", "self-call"}};
  if (slot < 0 || slot > 2) return "";
  return names[static_cast<int>(v)][slot];
}

namespace detail {

/// Assembles the code semantic graph for one function. Nodes are created on
/// first reference; edges are pushed in emission order, which follows the
/// source order of their owning statements.
class GraphBuilder {
 public:
  GraphBuilder(const AnalyzedFunction& af, Vuln vuln) : af_(af), vuln_(vuln) {
    if (vuln_ == Vuln::Timestamp)
      taint_ = taint_propagate(af_, {kTimestampSeed, kBlockNumberSeed});
  }

  ContractGraph build() {
    walk_block(af_.ir.statements, 0, std::nullopt);
    for (std::size_t i = 0; i < g_.edges.size(); ++i)
      g_.edges[i].temporal = static_cast<int>(i) + 1;
    fill_features();
    return std::move(g_);
  }

 private:
  struct Entry {
    int from;
    EdgeType etype;
  };

  const AnalyzedFunction& af_;
  Vuln vuln_;
  ContractGraph g_;
  TaintState taint_;
  std::map<std::string, int> var_ids_;
  std::map<std::pair<int, std::string>, int> occ_ids_;  // per-statement seed occurrences
  std::map<std::pair<int, int>, int> site_ids_;         // (stmt order, site index)
  std::map<int, int> loop_ids_, stmt_ids_;
  std::vector<bool> in_loop_, in_cond_;
  int entry_anchor_ = -1;

  int push_node(NodeKind kind, int slot, std::string label) {
    GraphNode n;
    n.id = static_cast<int>(g_.nodes.size());
    n.kind = kind;
    n.category_slot = slot;
    n.label = std::move(label);
    g_.nodes.push_back(std::move(n));
    in_loop_.push_back(false);
    in_cond_.push_back(false);
    return g_.nodes.back().id;
  }

  void touch(int id, int loop_depth, bool in_cond = false) {
    if (loop_depth > 0) in_loop_[id] = true;
    if (in_cond) in_cond_[id] = true;
  }

  int var_node(const std::string& name, const Statement& s, int loop_depth,
               bool in_cond = false) {
    int id;
    if (name == kTimestampSeed || name == kBlockNumberSeed) {
      auto key = std::make_pair(s.order, name);
      auto it = occ_ids_.find(key);
      if (it != occ_ids_.end()) {
        id = it->second;
      } else {
        NodeKind kind = NodeKind::Normal;
        int slot = -1;
        if (vuln_ == Vuln::Timestamp) {
          kind = NodeKind::Core;
          slot = name == kTimestampSeed ? 0 : 1;
        }
        id = push_node(kind, slot, name + "@" + std::to_string(s.order));
        occ_ids_[key] = id;
      }
    } else {
      auto it = var_ids_.find(name);
      if (it != var_ids_.end()) {
        id = it->second;
      } else {
        NodeKind kind = NodeKind::Normal;
        int slot = -1;
        if (vuln_ == Vuln::Reentrancy && af_.symbols.is_balance_like(name)) {
          kind = NodeKind::Core;
          slot = 2;
        } else if (vuln_ == Vuln::Timestamp && taint_.sink_vars.count(name)) {
          kind = NodeKind::Core;
          slot = 2;
        }
        id = push_node(kind, slot, name);
        var_ids_[name] = id;
      }
    }
    touch(id, loop_depth, in_cond);
    return id;
  }

  int site_node(const Statement& s, int site_idx, const CallSite& cs, int loop_depth) {
    auto key = std::make_pair(s.order, site_idx);
    auto it = site_ids_.find(key);
    if (it != site_ids_.end()) {
      touch(it->second, loop_depth);
      return it->second;
    }
    NodeKind kind = NodeKind::Normal;
    int slot = -1;
    if (vuln_ == Vuln::Reentrancy && cs.kind == CallKind::CallValue) {
      kind = NodeKind::Core;
      slot = 0;
    } else if (vuln_ == Vuln::Reentrancy && cs.kind == CallKind::TransferLike) {
      kind = NodeKind::Core;
      slot = 1;
    } else if (vuln_ == Vuln::InfiniteLoop && cs.kind == CallKind::SelfCall) {
      kind = NodeKind::Core;
      slot = 2;
    }
    int id = push_node(kind, slot, cs.path + "@" + std::to_string(s.order));
    site_ids_[key] = id;
    touch(id, loop_depth);
    return id;
  }

  int loop_node(const Statement& s, const LoopStmt& loop, int loop_depth) {
    auto it = loop_ids_.find(s.order);
    if (it != loop_ids_.end()) return it->second;
    NodeKind kind = NodeKind::Normal;
    int slot = -1;
    if (vuln_ == Vuln::InfiniteLoop) {
      kind = NodeKind::Core;
      slot = loop.kind == LoopKind::For ? 0 : 1;
    }
    int id = push_node(kind, slot,
                       std::string(loop.kind == LoopKind::For ? "for" : "while") + "@" +
                           std::to_string(s.order));
    loop_ids_[s.order] = id;
    touch(id, loop_depth);
    return id;
  }

  int stmt_node(const Statement& s, const char* what, int loop_depth) {
    auto it = stmt_ids_.find(s.order);
    if (it != stmt_ids_.end()) return it->second;
    int id = push_node(NodeKind::Normal, -1, std::string(what) + "@" + std::to_string(s.order));
    stmt_ids_[s.order] = id;
    touch(id, loop_depth);
    return id;
  }

  int fallback_node() {
    if (g_.fallback_id < 0) g_.fallback_id = push_node(NodeKind::Fallback, -1, "fallback");
    return g_.fallback_id;
  }

  using Dedupe = std::set<std::tuple<int, int, EdgeType>>;

  void add_edge(int start, int end, EdgeType etype, int anchor_order, Dedupe* dd = nullptr) {
    if (start < 0 || end < 0 || start == end) return;
    if (dd && !dd->insert({start, end, etype}).second) return;
    GraphEdge e;
    e.start = start;
    e.end = end;
    e.etype = etype;
    e.eclass = edge_class(etype);
    e.anchor_order = anchor_order;
    g_.edges.push_back(e);
  }

  static const Expr* lhs_base(const AssignStmt& a) {
    const Expr* base = &a.lhs;
    while ((base->kind == ExprKind::Index || base->kind == ExprKind::Member) &&
           !base->children.empty())
      base = &base->children[0];
    return base;
  }

  static bool is_special(CallKind k) { return k != CallKind::Plain; }

  static int first_special_site(const Statement& s) {
    for (std::size_t i = 0; i < s.call_sites.size(); ++i)
      if (is_special(s.call_sites[i].kind)) return static_cast<int>(i);
    return -1;
  }

  /// Anchor node of a statement; creates it if needed but emits no edges.
  int anchor_of(const Statement& s, int loop_depth) {
    return std::visit(
        [&](const auto& n) -> int {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, AssignStmt>) {
            const Expr* base = lhs_base(n);
            if (base->kind == ExprKind::Ident) return var_node(base->text, s, loop_depth);
            return stmt_node(s, "assign", loop_depth);
          } else if constexpr (std::is_same_v<T, CallStmt>) {
            if (!s.call_sites.empty())
              return site_node(s, 0, s.call_sites.front(), loop_depth);
            return stmt_node(s, "call", loop_depth);
          } else if constexpr (std::is_same_v<T, RequireStmt>) {
            return cond_anchor(s, n.cond, loop_depth);
          } else if constexpr (std::is_same_v<T, IfStmt>) {
            return cond_anchor(s, n.cond, loop_depth);
          } else if constexpr (std::is_same_v<T, LoopStmt>) {
            return loop_node(s, n, loop_depth);
          } else if constexpr (std::is_same_v<T, ReturnStmt>) {
            return stmt_node(s, "return", loop_depth);
          } else if constexpr (std::is_same_v<T, RevertStmt>) {
            return stmt_node(s, "revert", loop_depth);
          } else if constexpr (std::is_same_v<T, ThrowStmt>) {
            return stmt_node(s, "throw", loop_depth);
          } else {
            const auto* o = std::get_if<OpaqueStmt>(&s.node);
            if (o && !o->reads.empty()) return var_node(o->reads.front(), s, loop_depth);
            return stmt_node(s, "stmt", loop_depth);
          }
        },
        s.node);
  }

  int cond_anchor(const Statement& s, const Expr& cond, int loop_depth) {
    int special = first_special_site(s);
    if (special >= 0) return site_node(s, special, s.call_sites[special], loop_depth);
    if (!cond.reads.empty()) return var_node(cond.reads.front(), s, loop_depth, true);
    return stmt_node(s, "cond", loop_depth);
  }

  void fallback_edges(int site, const Statement& s) {
    int fb = fallback_node();
    add_edge(site, fb, EdgeType::FallbackTrigger, s.order);
    if (entry_anchor_ >= 0)
      add_edge(fb, entry_anchor_, EdgeType::FallbackReturn, s.order);
  }

  /// Emits nodes and access edges for the special call sites of a statement.
  /// `result_sink` receives an edge from each site (Assign for assignment
  /// right-hand sides, Access otherwise); pass the anchor itself to skip.
  void process_sites(const Statement& s, int anchor, int anchor_site, EdgeType sink_etype,
                     int loop_depth, Dedupe& dd) {
    for (std::size_t i = 0; i < s.call_sites.size(); ++i) {
      const CallSite& cs = s.call_sites[i];
      bool is_anchor = static_cast<int>(i) == anchor_site;
      if (!is_special(cs.kind) && !is_anchor) continue;
      int node = site_node(s, static_cast<int>(i), cs, loop_depth);
      for (const auto& r : cs.reads)
        add_edge(var_node(r, s, loop_depth), node, EdgeType::Access, s.order, &dd);
      if (!is_anchor) add_edge(node, anchor, sink_etype, s.order, &dd);
      if (cs.kind == CallKind::CallValue) fallback_edges(node, s);
    }
  }

  static EdgeType flow_etype(const Statement& prev) {
    if (const auto* r = std::get_if<RequireStmt>(&prev.node))
      return r->is_assert ? EdgeType::Assert : EdgeType::Require;
    if (std::get_if<IfStmt>(&prev.node)) return EdgeType::If;
    return EdgeType::Sequential;
  }

  static EdgeType entry_etype(const std::vector<Statement>& block, EdgeType normal) {
    if (block.empty()) return normal;
    if (std::get_if<RevertStmt>(&block.front().node)) return EdgeType::IfRevert;
    if (std::get_if<ThrowStmt>(&block.front().node)) return EdgeType::IfThrow;
    return normal;
  }

  void walk_block(const std::vector<Statement>& block, int loop_depth,
                  std::optional<Entry> entry) {
    const Statement* prev = nullptr;
    int prev_anchor = -1;
    for (const auto& s : block) {
      int anchor = anchor_of(s, loop_depth);
      if (entry_anchor_ < 0) entry_anchor_ = anchor;
      if (!prev && entry) {
        add_edge(entry->from, anchor, entry->etype, s.order);
      } else if (prev) {
        add_edge(prev_anchor, anchor, flow_etype(*prev), s.order);
      }
      process(s, anchor, loop_depth);
      prev = &s;
      prev_anchor = anchor;
    }
  }

  void process(const Statement& s, int anchor, int loop_depth) {
    Dedupe dd;
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, AssignStmt>) {
            const Expr* base = lhs_base(n);
            // Left-hand-side subscripts are accesses into the target.
            for (const auto& r : n.lhs.reads)
              if (base->kind != ExprKind::Ident || r != base->text)
                add_edge(var_node(r, s, loop_depth), anchor, EdgeType::Access, s.order, &dd);
            for (const auto& r : n.rhs.reads)
              add_edge(var_node(r, s, loop_depth), anchor, EdgeType::Assign, s.order, &dd);
            process_sites(s, anchor, -1, EdgeType::Assign, loop_depth, dd);
          } else if constexpr (std::is_same_v<T, CallStmt>) {
            process_sites(s, anchor, s.call_sites.empty() ? -1 : 0, EdgeType::Access,
                          loop_depth, dd);
          } else if constexpr (std::is_same_v<T, RequireStmt>) {
            cond_edges(s, n.cond, anchor, loop_depth, dd);
          } else if constexpr (std::is_same_v<T, IfStmt>) {
            cond_edges(s, n.cond, anchor, loop_depth, dd);
            if (!n.then_block.empty())
              walk_block(n.then_block, loop_depth,
                         Entry{anchor, entry_etype(n.then_block, EdgeType::IfThen)});
            if (!n.else_block.empty())
              walk_block(n.else_block, loop_depth,
                         Entry{anchor, entry_etype(n.else_block, EdgeType::IfElse)});
          } else if constexpr (std::is_same_v<T, LoopStmt>) {
            if (n.cond) cond_edges(s, *n.cond, anchor, loop_depth, dd);
            for (const auto& init : n.init) {
              int ia = anchor_of(init, loop_depth);
              process(init, ia, loop_depth);
            }
            for (const auto& upd : n.updates) {
              int ua = anchor_of(upd, loop_depth + 1);
              process(upd, ua, loop_depth + 1);
            }
            if (!n.body.empty())
              walk_block(n.body, loop_depth + 1,
                         Entry{anchor, n.kind == LoopKind::For ? EdgeType::ForDo
                                                               : EdgeType::WhileDo});
          } else if constexpr (std::is_same_v<T, ReturnStmt>) {
            if (n.value)
              for (const auto& r : n.value->reads)
                add_edge(var_node(r, s, loop_depth), anchor, EdgeType::Access, s.order, &dd);
            process_sites(s, anchor, -1, EdgeType::Access, loop_depth, dd);
          } else if constexpr (std::is_same_v<T, OpaqueStmt>) {
            for (const auto& r : n.reads) {
              int v = var_node(r, s, loop_depth);
              if (v != anchor) add_edge(v, anchor, EdgeType::Access, s.order, &dd);
            }
          }
        },
        s.node);
  }

  void cond_edges(const Statement& s, const Expr& cond, int anchor, int loop_depth,
                  Dedupe& dd) {
    for (const auto& r : cond.reads) {
      int v = var_node(r, s, loop_depth, /*in_cond=*/true);
      if (v != anchor) add_edge(v, anchor, EdgeType::Access, s.order, &dd);
    }
    int anchor_site = first_special_site(s);
    process_sites(s, anchor, anchor_site, EdgeType::Access, loop_depth, dd);
  }

  void fill_features() {
    std::vector<int> in_deg(g_.nodes.size(), 0), out_deg(g_.nodes.size(), 0);
    for (const auto& e : g_.edges) {
      out_deg[e.start]++;
      in_deg[e.end]++;
    }
    for (auto& n : g_.nodes) {
      std::vector<double> f(kNodeFeatureDim, 0.0);
      f[static_cast<int>(n.kind)] = 1.0;
      if (n.category_slot >= 0) f[3 + n.category_slot] = 1.0;
      f[11] = static_cast<double>(in_deg[n.id]);
      f[12] = static_cast<double>(out_deg[n.id]);
      f[13] = in_loop_[n.id] ? 1.0 : 0.0;
      f[14] = in_cond_[n.id] ? 1.0 : 0.0;
      n.init_feature = std::move(f);
    }
  }
};

}  // namespace detail

/// Builds the code semantic graph for one function under the given
/// vulnerability. An empty graph (no nodes) is the EmptyGraph signal; the
/// caller substitutes the zero-graph-feature path.
inline ContractGraph build_graph(const AnalyzedFunction& af, Vuln vuln) {
  return detail::GraphBuilder(af, vuln).build();
}

/// Core nodes the vulnerability's table row selects for this function.
inline std::vector<GraphNode> identify_core_nodes(const AnalyzedFunction& af, Vuln vuln) {
  ContractGraph g = build_graph(af, vuln);
  std::vector<GraphNode> cores;
  for (auto& n : g.nodes)
    if (n.kind == NodeKind::Core) cores.push_back(std::move(n));
  return cores;
}

/// Removes all normal and fallback nodes, adding each one's init feature
/// into its nearest core node. Nearest means fewest hops over undirected
/// edges; ties break first by the smallest temporal index among the node's
/// incident edges that lie on a shortest path to the candidate core, then by
/// the smallest core id. Edges re-anchor to the absorbing cores; self edges
/// drop; duplicate (start, end, etype) edges collapse to the earliest
/// temporal index, and temporal indices re-compact to 1..E'.
inline NormalizedGraph normalize_graph(const ContractGraph& g) {
  std::vector<int> cores;
  for (const auto& n : g.nodes)
    if (n.kind == NodeKind::Core) cores.push_back(n.id);
  if (cores.empty()) throw NoCoreNodesError("graph has no core nodes");

  const int n = static_cast<int>(g.nodes.size());
  const int inf = std::numeric_limits<int>::max() / 2;

  // Undirected adjacency, remembering the smallest temporal index per pair.
  std::vector<std::vector<std::pair<int, int>>> adj(n);  // (neighbor, min temporal)
  for (const auto& e : g.edges) {
    adj[e.start].push_back({e.end, e.temporal});
    adj[e.end].push_back({e.start, e.temporal});
  }

  // BFS from every core.
  std::map<int, std::vector<int>> dist_from_core;
  for (int c : cores) {
    std::vector<int> dist(n, inf);
    std::queue<int> q;
    dist[c] = 0;
    q.push(c);
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (auto [v, t] : adj[u]) {
        if (dist[v] > dist[u] + 1) {
          dist[v] = dist[u] + 1;
          q.push(v);
        }
      }
    }
    dist_from_core[c] = std::move(dist);
  }

  NormalizedGraph out;
  for (const auto& node : g.nodes) {
    out.assignment[node.id] =
        node.kind == NodeKind::Core ? node.id : -1;  // filled below for non-cores
  }

  for (const auto& node : g.nodes) {
    if (node.kind == NodeKind::Core) continue;
    int best_core = -1;
    std::tuple<int, int, int> best_key{inf, inf, inf};
    for (int c : cores) {
      int d = dist_from_core[c][node.id];
      int tkey = inf;
      if (d < inf) {
        for (auto [v, t] : adj[node.id])
          if (dist_from_core[c][v] == d - 1) tkey = std::min(tkey, t);
      }
      std::tuple<int, int, int> key{d, tkey, c};
      if (best_core < 0 || key < best_key) {
        best_key = key;
        best_core = c;
      }
    }
    out.assignment[node.id] = best_core;  // disconnected nodes fall to the smallest core id
  }

  // Copy cores and merge absorbed features.
  std::map<int, std::size_t> core_pos;
  for (int c : cores) {
    core_pos[c] = out.nodes.size();
    out.nodes.push_back(g.nodes[c]);
  }
  for (const auto& node : g.nodes) {
    if (node.kind == NodeKind::Core) continue;
    auto& target = out.nodes[core_pos[out.assignment.at(node.id)]];
    for (std::size_t i = 0; i < target.init_feature.size() && i < node.init_feature.size(); ++i)
      target.init_feature[i] += node.init_feature[i];
  }

  // Re-anchor edges, dropping self edges and late duplicates.
  std::set<std::tuple<int, int, EdgeType>> seen;
  for (const auto& e : g.edges) {  // ascending temporal order
    int s = out.assignment.at(e.start), t = out.assignment.at(e.end);
    if (s == t) continue;
    if (!seen.insert({s, t, e.etype}).second) continue;
    GraphEdge ne = e;
    ne.start = s;
    ne.end = t;
    out.edges.push_back(ne);
  }
  for (std::size_t i = 0; i < out.edges.size(); ++i)
    out.edges[i].temporal = static_cast<int>(i) + 1;
  return out;
}

inline std::optional<NormalizedGraph> try_normalize(const ContractGraph& g) {
  bool any_core = false;
  for (const auto& n : g.nodes) any_core = any_core || n.kind == NodeKind::Core;
  if (!any_core) return std::nullopt;
  return normalize_graph(g);
}

}  // namespace ame
