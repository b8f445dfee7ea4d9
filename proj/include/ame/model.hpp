#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "ame/checkpoint.hpp"
#include "ame/graph.hpp"
#include "ame/optim.hpp"
#include "ame/tensor.hpp"

namespace ame {

struct ModelConfig {
  int d = 200;                         // fused feature width
  int self_attn_hidden = 200;          // hidden size of the attention blocks
  int encoder_hidden = 100;            // hidden size of encoders / MLPs
  int feature_dim = kNodeFeatureDim;   // F, the node init-feature width
  int etype_embed = 8;                 // learned edge-type embedding width
  Vuln vuln = Vuln::Reentrancy;
  nn::Variant variant = nn::Variant::AME;
  static constexpr int k = 3;          // patterns per vulnerability

  bool has_graph_branch() const { return variant != nn::Variant::AME_RG; }
  bool has_pattern_branch() const { return variant != nn::Variant::AME_RP; }
  int fused_features() const {
    return (has_graph_branch() ? 1 : 0) + (has_pattern_branch() ? k : 0);
  }
};

/// Inputs for one function: the three pattern encodings and the normalized
/// graph (nullptr or an empty graph selects the zero-graph-feature path).
struct ModelInput {
  std::array<std::array<double, 4>, 3> encodings{};
  const NormalizedGraph* graph = nullptr;
};

/// Tape handles produced by one forward pass; used for training.
struct Forward {
  nn::Val logit;    // scalar, pre-sigmoid
  nn::Val weights;  // softmax over surviving features (Eqs. 7-8)
  nn::Val fused;    // v
  std::vector<nn::Val> inner_products;
  int n_features = 0;
};

/// Numeric snapshot of a forward pass for reports and statistics.
struct ForwardTrace {
  std::vector<double> g, g_attn, g_enc;
  std::array<std::vector<double>, 3> p, p_attn, p_enc;
  std::vector<double> v;
  std::vector<double> weights;
  std::vector<double> inner_products;
  double logit = 0.0;
  double confidence = 0.0;  // sigmoid(logit)
  int yhat = 0;
};

/// The attentive multi-encoder network: per-pattern MLP encoders, temporal
/// message propagation with gated aggregation over the code graph, a
/// self-attention pass that rescales each feature elementwise, and a
/// cross-attention fusion whose softmax of feature-fused inner products
/// yields the interpretable weights.
class AmeModel {
 public:
  ModelConfig cfg;
  nn::ParameterStore params;

  explicit AmeModel(ModelConfig config) : cfg(config) { create_parameters(); }

  /// Glorot-uniform weight matrices, zero biases; deterministic per seed.
  void init(std::uint64_t seed) {
    Rng rng(seed);
    for (std::size_t i = 0; i < params.size(); ++i) {
      nn::Tensor& t = params.at(i);
      if (t.shape.size() == 2)
        nn::glorot_init(t, rng);
      else
        std::fill(t.data.begin(), t.data.end(), 0.0);
    }
  }

  nn::CheckpointHeader header() const {
    nn::CheckpointHeader h;
    h.d = static_cast<std::uint32_t>(cfg.d);
    h.feature_dim = static_cast<std::uint32_t>(cfg.feature_dim);
    h.self_attn_hidden = static_cast<std::uint32_t>(cfg.self_attn_hidden);
    h.encoder_hidden = static_cast<std::uint32_t>(cfg.encoder_hidden);
    h.vuln = cfg.vuln;
    h.variant = cfg.variant;
    return h;
  }

  void save(const std::string& path) const { nn::save_checkpoint(path, header(), params); }

  /// Loads a checkpoint whose header must match this model's configuration.
  void load(const std::string& path) {
    nn::ParameterStore fresh;
    nn::CheckpointHeader h = nn::load_checkpoint(path, fresh);
    if (h.d != static_cast<std::uint32_t>(cfg.d) ||
        h.feature_dim != static_cast<std::uint32_t>(cfg.feature_dim) ||
        h.self_attn_hidden != static_cast<std::uint32_t>(cfg.self_attn_hidden) ||
        h.encoder_hidden != static_cast<std::uint32_t>(cfg.encoder_hidden) ||
        h.vuln != cfg.vuln || h.variant != cfg.variant)
      throw CheckpointMismatchError("checkpoint header does not match model config");
    for (std::size_t i = 0; i < params.size(); ++i) {
      const std::string& name = params.names()[i];
      if (!fresh.has(name)) throw CheckpointMismatchError("checkpoint missing " + name);
      params.at(i).data = fresh.get(name).data;
    }
  }

  /// Opens a checkpoint and constructs a model matching its header.
  static AmeModel from_checkpoint(const std::string& path) {
    nn::ParameterStore probe;
    nn::CheckpointHeader h = nn::load_checkpoint(path, probe);
    ModelConfig cfg;
    cfg.d = static_cast<int>(h.d);
    cfg.feature_dim = static_cast<int>(h.feature_dim);
    cfg.self_attn_hidden = static_cast<int>(h.self_attn_hidden);
    cfg.encoder_hidden = static_cast<int>(h.encoder_hidden);
    cfg.vuln = h.vuln;
    cfg.variant = h.variant;
    AmeModel m(cfg);
    m.load(path);
    return m;
  }

  // ----- network pieces (public for focused tests) -----

  /// Pattern i's dedicated two-layer MLP: 4 -> encoder_hidden -> d.
  nn::Val encode_pattern(nn::Tape& tape, int i, const std::array<double, 4>& x) {
    const std::string p = "pat" + std::to_string(i);
    nn::Val in = tape.input({x.begin(), x.end()}, {4});
    nn::Val h = tape.relu(affine(tape, p + ".W1", p + ".b1", in));
    return affine(tape, p + ".W2", p + ".b2", h);
  }

  /// Temporal message propagation: edges fire one per step in temporal
  /// order, each updating only its end node through a gated recurrent mix of
  /// the current state and the message from the start node and edge type.
  std::pair<std::vector<nn::Val>, std::vector<nn::Val>> tmp_propagate(
      nn::Tape& tape, const NormalizedGraph& graph) {
    std::map<int, int> index;
    std::vector<nn::Val> h0;
    for (const auto& node : graph.nodes) {
      index[node.id] = static_cast<int>(h0.size());
      nn::Val f = tape.input(node.init_feature, {cfg.feature_dim});
      h0.push_back(affine(tape, "tmp.Win", "tmp.bin", f));
    }
    std::vector<nn::Val> h = h0;
    nn::Val emb = tape.param(params.get("tmp.etype_embed"));
    for (const auto& e : graph.edges) {  // already sorted by temporal index
      int s = index.at(e.start), t = index.at(e.end);
      nn::Val etype = tape.row(emb, static_cast<int>(e.etype));
      nn::Val m = tape.relu(
          affine(tape, "tmp.Wm", "tmp.bm", tape.concat({h[s], h[t], etype})));
      nn::Val z = tape.sigmoid(affine(tape, "tmp.Wz", "tmp.bz", tape.concat({h[t], m})));
      nn::Val cand = tape.tanh_(affine(tape, "tmp.Wh", "tmp.bh", tape.concat({h[t], m})));
      h[t] = tape.lerp_gate(z, h[t], cand);
    }
    return {h0, h};
  }

  /// Gated aggregation of initial and final node states into the global
  /// graph feature g; softmax is the activation over the feature dimension.
  nn::Val aggregate(nn::Tape& tape, const std::vector<nn::Val>& h0,
                    const std::vector<nn::Val>& hT) {
    if (h0.empty()) return tape.input_vec(std::vector<double>(cfg.d, 0.0));
    std::vector<nn::Val> gated;
    for (std::size_t i = 0; i < h0.size(); ++i) {
      nn::Val hi = tape.concat({h0[i], hT[i]});
      nn::Val gate = tape.softmax(affine(
          tape, "agg.M1", "agg.b2", tape.relu(affine(tape, "agg.M2", "agg.b1", hi))));
      nn::Val output = tape.softmax(affine(
          tape, "agg.M3", "agg.b4", tape.relu(affine(tape, "agg.M4", "agg.b3", hi))));
      gated.push_back(tape.mul(gate, output));
    }
    return affine(tape, "agg.Wfc", "agg.bfc", tape.sum(gated));
  }

  /// Self attention: a two-layer block with sigmoid output produces a
  /// coefficient vector in (0,1)^d that rescales the feature elementwise.
  nn::Val self_attend(nn::Tape& tape, const std::string& which, nn::Val x) {
    const std::string p = "sa." + which;
    nn::Val h = tape.relu(affine(tape, p + ".W1", p + ".b1", x));
    nn::Val coeff = tape.sigmoid(affine(tape, p + ".W2", p + ".b2", h));
    return tape.mul(coeff, x);
  }

  /// Per-feature three-layer encoder: d -> hidden -> hidden -> d.
  nn::Val encode_feature(nn::Tape& tape, const std::string& which, nn::Val x) {
    const std::string p = "enc." + which;
    nn::Val h1 = tape.relu(affine(tape, p + ".W1", p + ".b1", x));
    nn::Val h2 = tape.relu(affine(tape, p + ".W2", p + ".b2", h1));
    return affine(tape, p + ".W3", p + ".b3", h2);
  }

  /// Fusion MLP over the concatenated encoded features, the scalar output
  /// head, and the interpretable weights as softmax of inner products with v.
  Forward fuse_and_predict(nn::Tape& tape, const std::vector<nn::Val>& encoded) {
    Forward f;
    f.n_features = static_cast<int>(encoded.size());
    nn::Val cat = tape.concat(encoded);
    nn::Val h = tape.relu(affine(tape, "fuse.W1", "fuse.b1", cat));
    f.fused = affine(tape, "fuse.W2", "fuse.b2", h);
    f.logit = affine(tape, "out.W", "out.b", f.fused);
    for (nn::Val e : encoded) f.inner_products.push_back(tape.inner(e, f.fused));
    f.weights = tape.softmax(tape.concat(f.inner_products));
    return f;
  }

  /// Full forward pass on the given tape.
  Forward forward(nn::Tape& tape, const ModelInput& in) {
    std::vector<nn::Val> encoded;
    if (cfg.has_graph_branch()) {
      nn::Val g;
      if (in.graph && !in.graph->nodes.empty()) {
        auto [h0, hT] = tmp_propagate(tape, *in.graph);
        g = aggregate(tape, h0, hT);
      } else {
        g = tape.input_vec(std::vector<double>(cfg.d, 0.0));
      }
      encoded.push_back(encode_feature(tape, "g", self_attend(tape, "g", g)));
    }
    if (cfg.has_pattern_branch()) {
      for (int i = 0; i < ModelConfig::k; ++i) {
        nn::Val p = encode_pattern(tape, i, in.encodings[i]);
        std::string which = "p" + std::to_string(i);
        encoded.push_back(encode_feature(tape, which, self_attend(tape, which, p)));
      }
    }
    return fuse_and_predict(tape, encoded);
  }

  /// Forward pass with every intermediate captured numerically.
  ForwardTrace trace(const ModelInput& in) {
    nn::Tape tape;
    ForwardTrace tr;
    std::vector<nn::Val> encoded;
    if (cfg.has_graph_branch()) {
      nn::Val g;
      if (in.graph && !in.graph->nodes.empty()) {
        auto [h0, hT] = tmp_propagate(tape, *in.graph);
        g = aggregate(tape, h0, hT);
      } else {
        g = tape.input_vec(std::vector<double>(cfg.d, 0.0));
      }
      nn::Val ga = self_attend(tape, "g", g);
      nn::Val ge = encode_feature(tape, "g", ga);
      tr.g = tape.value(g);
      tr.g_attn = tape.value(ga);
      tr.g_enc = tape.value(ge);
      encoded.push_back(ge);
    }
    if (cfg.has_pattern_branch()) {
      for (int i = 0; i < ModelConfig::k; ++i) {
        nn::Val p = encode_pattern(tape, i, in.encodings[i]);
        std::string which = "p" + std::to_string(i);
        nn::Val pa = self_attend(tape, which, p);
        nn::Val pe = encode_feature(tape, which, pa);
        tr.p[i] = tape.value(p);
        tr.p_attn[i] = tape.value(pa);
        tr.p_enc[i] = tape.value(pe);
        encoded.push_back(pe);
      }
    }
    Forward f = fuse_and_predict(tape, encoded);
    tr.v = tape.value(f.fused);
    tr.weights = tape.value(f.weights);
    for (nn::Val ip : f.inner_products) tr.inner_products.push_back(tape.scalar_value(ip));
    tr.logit = tape.scalar_value(f.logit);
    tr.confidence = nn::detail::sigmoid_stable(tr.logit);
    tr.yhat = tr.logit >= 0.0 ? 1 : 0;  // round(sigmoid), half rounds up
    return tr;
  }

 private:
  nn::Val affine(nn::Tape& tape, const std::string& w, const std::string& b, nn::Val x) {
    return tape.add(tape.matmul(tape.param(params.get(w)), x), tape.param(params.get(b)));
  }

  void add_affine(const std::string& w, const std::string& b, int out, int in) {
    params.add(w, {out, in});
    params.add(b, {out});
  }

  void create_parameters() {
    const int d = cfg.d, hid = cfg.encoder_hidden, sa = cfg.self_attn_hidden;
    const int F = cfg.feature_dim, de = cfg.etype_embed;
    if (cfg.has_pattern_branch()) {
      for (int i = 0; i < ModelConfig::k; ++i) {
        std::string p = "pat" + std::to_string(i);
        add_affine(p + ".W1", p + ".b1", hid, 4);
        add_affine(p + ".W2", p + ".b2", d, hid);
      }
    }
    if (cfg.has_graph_branch()) {
      add_affine("tmp.Win", "tmp.bin", d, F);
      params.add("tmp.etype_embed", {kEdgeTypeCount, de});
      add_affine("tmp.Wm", "tmp.bm", d, 2 * d + de);
      add_affine("tmp.Wz", "tmp.bz", d, 2 * d);
      add_affine("tmp.Wh", "tmp.bh", d, 2 * d);
      add_affine("agg.M2", "agg.b1", hid, 2 * d);
      add_affine("agg.M1", "agg.b2", d, hid);
      add_affine("agg.M4", "agg.b3", hid, 2 * d);
      add_affine("agg.M3", "agg.b4", d, hid);
      add_affine("agg.Wfc", "agg.bfc", d, d);
    }
    std::vector<std::string> features;
    if (cfg.has_graph_branch()) features.push_back("g");
    if (cfg.has_pattern_branch())
      for (int i = 0; i < ModelConfig::k; ++i) features.push_back("p" + std::to_string(i));
    for (const auto& which : features) {
      add_affine("sa." + which + ".W1", "sa." + which + ".b1", sa, d);
      add_affine("sa." + which + ".W2", "sa." + which + ".b2", d, sa);
      add_affine("enc." + which + ".W1", "enc." + which + ".b1", hid, d);
      add_affine("enc." + which + ".W2", "enc." + which + ".b2", hid, hid);
      add_affine("enc." + which + ".W3", "enc." + which + ".b3", d, hid);
    }
    add_affine("fuse.W1", "fuse.b1", hid, cfg.fused_features() * d);
    add_affine("fuse.W2", "fuse.b2", d, hid);
    add_affine("out.W", "out.b", 1, d);
  }
};

}  // namespace ame
