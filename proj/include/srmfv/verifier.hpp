#pragma once

#include <array>
#include <cmath>
#include <set>
#include <utility>
#include <vector>

#include "srmfv/graph.hpp"
#include "srmfv/model.hpp"
#include "srmfv/ops.hpp"
#include "srmfv/retriever.hpp"

namespace srmfv {

/// Sentence-granularity node: a reserved CLS slot at position 0 followed by
/// the sentence's token ids.
struct SentenceNode {
  int source = kClaimSource;  // kClaimSource or evidence index
  std::vector<int> token_ids;  // without CLS

  std::vector<int> sequence_ids() const {
    std::vector<int> ids{kClsId};
    ids.insert(ids.end(), token_ids.begin(), token_ids.end());
    return ids;
  }
};

/// Per-pair counts of token-level coref and latent edges between the token
/// sets of two sentence nodes, capped at 3 when folded into the bias.
struct TopologyCounts {
  Eigen::MatrixXi coref;  // |V| x |V|
  Eigen::MatrixXi sem;
};

/// Count token-level edges of G between sentence sources. Sources are the
/// claim (kClaimSource) plus evidence indices 0..k-1, mapped to node rows
/// 0..k.
inline TopologyCounts lift_topology_counts(const ReasoningGraph& g) {
  const int n = static_cast<int>(g.num_sentences);
  TopologyCounts tc;
  tc.coref = Eigen::MatrixXi::Zero(n, n);
  tc.sem = Eigen::MatrixXi::Zero(n, n);
  auto row_of = [&](int source) { return source == kClaimSource ? 0 : source + 1; };
  auto accumulate = [&](const EdgeSet& es, Eigen::MatrixXi& acc) {
    for (const auto& [a, b] : es) {
      const int u = row_of(g.nodes[static_cast<std::size_t>(a)].source);
      const int v = row_of(g.nodes[static_cast<std::size_t>(b)].source);
      if (u == v) continue;
      ++acc(u, v);
      ++acc(v, u);
    }
  };
  accumulate(g.coref, tc.coref);
  accumulate(g.sem, tc.sem);
  return tc;
}

/// Assemble the learnable topology bias matrix B from the four scalars:
/// b_self on the diagonal, capped coref/sem counts off it, b_none where no
/// lifted edge exists. Symmetric by construction.
template <typename S>
Tensor<S> topology_bias(const TopologyCounts& tc, const VerifierParams<S>& vp) {
  const Eigen::Index n = tc.coref.rows();
  Mat<S> eye = Mat<S>::Identity(n, n);
  Mat<S> coref_cap = Mat<S>::Zero(n, n);
  Mat<S> sem_cap = Mat<S>::Zero(n, n);
  Mat<S> none = Mat<S>::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      coref_cap(i, j) = static_cast<S>(std::min(tc.coref(i, j), 3));
      sem_cap(i, j) = static_cast<S>(std::min(tc.sem(i, j), 3));
      if (tc.coref(i, j) == 0 && tc.sem(i, j) == 0) none(i, j) = S(1);
    }
  }
  auto b = mul_scalar(Tensor<S>::leaf(std::move(eye)), vp.b_self);
  b = add(b, mul_scalar(Tensor<S>::leaf(std::move(coref_cap)), vp.b_coref));
  b = add(b, mul_scalar(Tensor<S>::leaf(std::move(sem_cap)), vp.b_sem));
  b = add(b, mul_scalar(Tensor<S>::leaf(std::move(none)), vp.b_none));
  return b;
}

/// CLS summary of a node's hidden state: row 0.
template <typename S>
Tensor<S> node_summary(const Tensor<S>& h_node) {
  return slice_rows(h_node, 0, 1);
}

/// Biased multi-head attention over the stacked node summaries. Per head,
/// softmax((Q Kᵀ + B) / sqrt(d/h)); heads are concatenated. With one head
/// this is exactly the single-scale form.
template <typename S>
Tensor<S> graph_aggregate(const Tensor<S>& Z, const Tensor<S>& bias,
                          const EncoderLayerParams<S>& p, int heads) {
  const Eigen::Index d = Z.cols();
  if (d % heads != 0)
    throw ShapeError("graph_aggregate: d not divisible by head count");
  const Eigen::Index dh = d / heads;
  const S scale_factor = S(1) / std::sqrt(static_cast<S>(dh));
  auto Q = matmul(Z, p.mha_Wq);
  auto K = matmul(Z, p.mha_Wk);
  auto V = matmul(Z, p.mha_Wv);
  std::vector<Tensor<S>> outs;
  for (int j = 0; j < heads; ++j) {
    auto Qj = slice_cols(Q, j * dh, dh);
    auto Kj = slice_cols(K, j * dh, dh);
    auto Vj = slice_cols(V, j * dh, dh);
    auto scores = scale(add(matmul(Qj, transpose(Kj)), bias), scale_factor);
    outs.push_back(matmul(softmax_rows(scores), Vj));
  }
  return heads == 1 ? outs[0] : concat_cols(outs);
}

/// Asymmetric-mask for a (1+len)-row sequence: the CLS query (row 0) sees
/// every position; token queries see token positions only.
inline BoolMat asymmetric_mask(Eigen::Index n) {
  BoolMat m = BoolMat::Constant(n, n, true);
  for (Eigen::Index i = 1; i < n; ++i) m(i, 0) = false;
  return m;
}

/// Replace the CLS slot with the aggregated summary and run one
/// asymmetrically masked transformer sublayer (attention + 2-layer
/// feedforward, residual + layer normalization around each).
template <typename S>
Tensor<S> reinject_and_encode(const Tensor<S>& h_node, const Tensor<S>& z_hat,
                              const EncoderLayerParams<S>& p) {
  const Eigen::Index n = h_node.rows();
  const Eigen::Index d = h_node.cols();
  std::vector<Tensor<S>> parts{z_hat};
  if (n > 1) parts.push_back(slice_rows(h_node, 1, n - 1));
  auto seq = concat_rows(parts);

  const BoolMat mask = asymmetric_mask(n);
  const S scale_factor = S(1) / std::sqrt(static_cast<S>(d));
  auto Q = matmul(seq, p.attn_Wq);
  auto K = matmul(seq, p.attn_Wk);
  auto V = matmul(seq, p.attn_Wv);
  auto attn = matmul(
      softmax_rows(scale(matmul(Q, transpose(K)), scale_factor), &mask), V);
  auto x = layernorm_rows(add(seq, attn), p.ln1_g, p.ln1_b);
  auto ff = add_rowwise(
      matmul(relu(add_rowwise(matmul(x, p.ffn_W1), p.ffn_b1)), p.ffn_W2),
      p.ffn_b2);
  return layernorm_rows(add(x, ff), p.ln2_g, p.ln2_b);
}

/// Sentence nodes for a subgraph: claim + e_1..e_k in retrieval order.
inline std::vector<SentenceNode> sentence_nodes(const Sentence& claim,
                                                const std::vector<Sentence>& ev,
                                                std::size_t k) {
  std::vector<SentenceNode> nodes;
  nodes.push_back({kClaimSource, claim.token_ids});
  for (std::size_t i = 0; i < k; ++i)
    nodes.push_back({static_cast<int>(i), ev[i].token_ids});
  return nodes;
}

/// Strength of the exact-match channel in the subgraph token encoder: a
/// token incident to any cross-sentence co-occurrence or coreference edge
/// gains kMatchChannel on every coordinate. Entity tokens are random
/// embedding rows, so "does the evidence tail equal the claim tail" is not
/// decodable from embeddings of entities never seen in training; the
/// token-level graph already records equality exactly, and this channel
/// lifts it into the representation where the classifier can read it.
inline constexpr double kMatchChannel = 0.5;

/// Nested encoding of one progressive subgraph: per layer, read node
/// summaries, aggregate across the graph under the topology bias, re-inject
/// and re-encode each token sequence. The subgraph representation is the
/// mean of the final CLS summaries.
template <typename S>
Tensor<S> encode_subgraph(const ReasoningGraph& g, const Sentence& claim,
                          const std::vector<Sentence>& evidence, std::size_t k,
                          const Model<S>& m) {
  if (k < 1) throw DataError("encode_subgraph: needs at least one evidence");
  const std::vector<SentenceNode> nodes = sentence_nodes(claim, evidence, k);
  const TopologyCounts tc = lift_topology_counts(g);
  auto bias = topology_bias(tc, m.ver);

  // (source, within-sentence position) of every token that takes part in a
  // cross-sentence match edge.
  std::set<std::pair<int, int>> matched;
  for (const EdgeSet* es : {&g.cooc, &g.coref}) {
    for (const auto& [a, b] : *es) {
      for (int nid : {a, b}) {
        const TokenNode& tn = g.nodes[static_cast<std::size_t>(nid)];
        matched.insert({tn.source, tn.position});
      }
    }
  }
  const int d = m.cfg.d;
  std::vector<Tensor<S>> h;  // per-node (1+len) x d
  for (const auto& node : nodes) {
    std::vector<int> ids = node.sequence_ids();
    Mat<S> pos(static_cast<Eigen::Index>(ids.size()), d);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      pos.row(static_cast<Eigen::Index>(i)) =
          posenc_row<S>(static_cast<int>(i), d);
      if (i > 0 && matched.count({node.source, static_cast<int>(i) - 1}))
        pos.row(static_cast<Eigen::Index>(i)).array() += static_cast<S>(kMatchChannel);
    }
    h.push_back(add(scale(gather_rows(m.embed, std::move(ids)),
                          std::sqrt(static_cast<S>(d))),
                    Tensor<S>::leaf(std::move(pos))));
  }

  for (const auto& layer : m.ver.layers) {
    std::vector<Tensor<S>> summaries;
    for (const auto& hn : h) summaries.push_back(node_summary(hn));
    auto Z = concat_rows(summaries);
    auto Z_hat = graph_aggregate(Z, bias, layer, m.cfg.heads);
    for (std::size_t gidx = 0; gidx < h.size(); ++gidx) {
      auto z_hat = slice_rows(Z_hat, static_cast<Eigen::Index>(gidx), 1);
      h[gidx] = reinject_and_encode(h[gidx], z_hat, layer);
    }
  }

  std::vector<Tensor<S>> finals;
  for (const auto& hn : h) finals.push_back(node_summary(hn));
  return mean_rows(concat_rows(finals));  // 1 x d
}

/// GAT-encoder ablation: mean-pooled sentence vectors message-passed over
/// the lifted sentence graph (edges where any coref or latent token edge
/// exists).
template <typename S>
Tensor<S> encode_subgraph_gat(const ReasoningGraph& g, const Sentence& claim,
                              const std::vector<Sentence>& evidence,
                              std::size_t k, const Model<S>& m) {
  const std::vector<SentenceNode> nodes = sentence_nodes(claim, evidence, k);
  const TopologyCounts tc = lift_topology_counts(g);
  const Eigen::Index n = static_cast<Eigen::Index>(nodes.size());
  BoolMat mask = BoolMat::Constant(n, n, false);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j && (tc.coref(i, j) > 0 || tc.sem(i, j) > 0)) mask(i, j) = true;
  for (Eigen::Index i = 0; i < n; ++i)
    if (!mask.row(i).any()) mask(i, i) = true;

  std::vector<Tensor<S>> pooled;
  for (const auto& node : nodes)
    pooled.push_back(mean_rows(gather_rows(m.embed, node.token_ids)));
  Tensor<S> h = concat_rows(pooled);
  if (m.ver.gat_layers.empty())
    throw ConfigError("encode_subgraph_gat: model built without gat_encoder");
  for (const auto& layer : m.ver.gat_layers) h = gat_layer(h, mask, layer);
  return mean_rows(h);
}

/// Attention fusion of the subgraph representations (Hs are 1 x d rows).
/// Returns the fused representation and the weights.
template <typename S>
std::pair<Tensor<S>, Tensor<S>> fuse_subgraphs(const std::vector<Tensor<S>>& Hs,
                                               const Tensor<S>& W,
                                               const Tensor<S>& w) {
  if (Hs.empty()) throw DataError("fuse_subgraphs: empty sequence");
  auto stack = concat_rows(Hs);  // n x d
  auto scores = transpose(matmul(tanh_op(matmul(stack, W)), w));  // 1 x n
  auto alpha = softmax_rows(scores);
  return {matmul(alpha, stack), alpha};
}

struct VerificationResult {
  Label label = Label::NotEnoughInfo;
  std::array<double, 3> probs{};
  std::vector<double> fusion_weights;
  std::vector<int> retrieved;  // corpus indices of the chain
};

/// MLP head: probabilities via softmax; argmax label with ties resolved in
/// label order SUPPORTED < REFUTED < NOT_ENOUGH_INFO.
template <typename S>
Tensor<S> classify_probs(const Tensor<S>& H, const VerifierParams<S>& vp) {
  auto hidden = relu(add(matmul(H, vp.mlp_W1), vp.mlp_b1));
  auto logits = add(matmul(hidden, vp.mlp_W2), vp.mlp_b2);
  return softmax_rows(logits);
}

inline Label argmax_label(const std::array<double, 3>& probs) {
  int best = 0;
  for (int i = 1; i < 3; ++i)
    if (probs[static_cast<std::size_t>(i)] >
        probs[static_cast<std::size_t>(best)])
      best = i;
  return static_cast<Label>(best);
}

/// Full verification forward pass over a subgraph sequence. The
/// unified_graph ablation consumes only the final graph G_n; the
/// gat_encoder ablation swaps the nested encoder for sentence-level GAT.
template <typename S>
std::pair<Tensor<S>, Tensor<S>> verify_forward(const SubgraphSequence& seq,
                                               const Model<S>& m) {
  std::vector<Tensor<S>> Hs;
  const std::size_t n = seq.graphs.size();
  for (std::size_t k = 1; k <= n; ++k) {
    if (m.cfg.unified_graph && k != n) continue;
    const ReasoningGraph& g = seq.graphs[k - 1];
    Hs.push_back(m.cfg.gat_encoder
                     ? encode_subgraph_gat(g, seq.claim, seq.evidence, k, m)
                     : encode_subgraph(g, seq.claim, seq.evidence, k, m));
  }
  auto [H, alpha] = fuse_subgraphs(Hs, m.ver.fusion_W, m.ver.fusion_w);
  return {classify_probs(H, m.ver), alpha};
}

template <typename S>
VerificationResult verify(const SubgraphSequence& seq, const Model<S>& m) {
  NoGradGuard ng;
  auto [probs, alpha] = verify_forward(seq, m);
  VerificationResult r;
  for (int i = 0; i < 3; ++i)
    r.probs[static_cast<std::size_t>(i)] =
        static_cast<double>(probs.value()(0, i));
  r.label = argmax_label(r.probs);
  for (Eigen::Index i = 0; i < alpha.cols(); ++i)
    r.fusion_weights.push_back(static_cast<double>(alpha.value()(0, i)));
  return r;
}

}  // namespace srmfv
