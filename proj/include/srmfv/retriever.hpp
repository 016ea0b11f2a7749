#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "srmfv/graph.hpp"
#include "srmfv/model.hpp"
#include "srmfv/ops.hpp"

namespace srmfv {

/// Sinusoidal position encoding row (1 x d).
template <typename S>
Eigen::Matrix<S, 1, Eigen::Dynamic> posenc_row(int position, int d) {
  Eigen::Matrix<S, 1, Eigen::Dynamic> row(d);
  for (int j = 0; j < d; ++j) {
    const double rate =
        static_cast<double>(position) /
        std::pow(10000.0, static_cast<double>(2 * (j / 2)) / d);
    row(j) = static_cast<S>((j % 2 == 0) ? std::sin(rate) : std::cos(rate));
  }
  return row;
}

/// Inverse-frequency weight of a vocabulary id (1.0 when unknown).
inline double idf_weight(const std::vector<double>& token_weight, int id) {
  return (id >= 0 && static_cast<std::size_t>(id) < token_weight.size())
             ? token_weight[static_cast<std::size_t>(id)]
             : 1.0;
}

/// h^(0): inverse-frequency-scaled embedding row + sinusoidal encoding of
/// within-sentence position. The sqrt(d) factor keeps token identity from
/// being swamped by the O(1) position signal.
template <typename S>
Tensor<S> encode_tokens(const ReasoningGraph& g, const Tensor<S>& embed,
                        const std::vector<double>& token_weight) {
  if (g.nodes.empty()) throw DataError("encode_tokens: empty graph");
  std::vector<int> ids;
  ids.reserve(g.nodes.size());
  const int d = static_cast<int>(embed.cols());
  const Eigen::Index n = static_cast<Eigen::Index>(g.nodes.size());
  Mat<S> pos(n, d);
  Mat<S> w(n, d);
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    ids.push_back(g.nodes[i].token_id);
    const double idf = idf_weight(token_weight, g.nodes[i].token_id);
    pos.row(static_cast<Eigen::Index>(i)) =
        posenc_row<S>(g.nodes[i].position, d);
    w.row(static_cast<Eigen::Index>(i)).setConstant(static_cast<S>(
        std::sqrt(static_cast<double>(d)) * idf));
  }
  return add(mul(gather_rows(embed, std::move(ids)),
                 Tensor<S>::leaf(std::move(w))),
             Tensor<S>::leaf(std::move(pos)));
}

/// One layer of graph attention. Neighborhoods come from the union of all
/// edge sets; isolated nodes attend to themselves.
template <typename S>
Tensor<S> gat_layer(const Tensor<S>& h, const BoolMat& neighbor_mask,
                    const GatLayerParams<S>& p) {
  const Eigen::Index n = h.rows();
  if (neighbor_mask.rows() != n || neighbor_mask.cols() != n)
    throw ShapeError("gat_layer: mask size mismatch");
  auto wh = matmul(h, p.W);                    // n x d
  auto si = matmul(wh, p.a1);                  // n x 1, query-side term
  auto tj = matmul(wh, p.a2);                  // n x 1, key-side term
  auto ones_row = Tensor<S>::leaf(Mat<S>::Ones(1, n));
  auto ones_col = Tensor<S>::leaf(Mat<S>::Ones(n, 1));
  auto scores = add(matmul(si, ones_row), matmul(ones_col, transpose(tj)));
  auto alpha = softmax_rows(leaky_relu(scores), &neighbor_mask);
  return relu(matmul(alpha, wh));
}

/// Attention readout of the final node states into a query row (1 x d).
template <typename S>
Tensor<S> readout_query(const Tensor<S>& hL, const Tensor<S>& W_q,
                        const Tensor<S>& w) {
  auto scores = transpose(matmul(tanh_op(matmul(hL, W_q)), w));  // 1 x n
  auto beta = softmax_rows(scores);
  return matmul(beta, hL);  // 1 x d
}

/// Weight of the parameter-free lexical channel relative to the learned
/// channel in the two-channel retrieval score (see lexical_pool and the
/// encoder comments below).
inline constexpr double kLexicalChannel = 1.0;

/// Inverse-frequency-normalized mean of raw token embedding rows (1 x d):
/// the parameter-free lexical signature of a token bag. Rare tokens
/// (entities) dominate it, and because no learned map touches it, it
/// transfers exactly to entities never seen in training.
template <typename S>
Tensor<S> lexical_pool(const std::vector<int>& ids, const Tensor<S>& embed,
                       const std::vector<double>& token_weight) {
  if (ids.empty()) throw DataError("lexical_pool: empty token list");
  const Eigen::Index n = static_cast<Eigen::Index>(ids.size());
  Mat<S> w(1, n);
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double wi =
        idf_weight(token_weight, ids[static_cast<std::size_t>(i)]);
    w(0, i) = static_cast<S>(wi);
    total += wi;
  }
  w /= static_cast<S>(total);
  return matmul(Tensor<S>::leaf(std::move(w)), gather_rows(embed, ids));
}

/// Row rescaled to unit Euclidean norm (differentiable).
template <typename S>
Tensor<S> unit_row(const Tensor<S>& q) {
  auto norm = add_const(sqrt_op(sum_all(mul(q, q))), S(1e-12));  // 1 x 1
  auto ones = Tensor<S>::leaf(Mat<S>::Ones(1, q.cols()));
  return div(q, matmul(norm, ones));
}

/// Candidate encoder: a 1 x 2d two-channel row. The learned channel is the
/// inverse-frequency-weighted embedding mean through one feedforward with
/// tanh; the lexical channel is the raw pool itself. Both channels are
/// unit-normalized, so the dot product of a query and a candidate
/// decomposes into (learned match) + kLexicalChannel^2 * (lexical match):
/// the parameter-free half anchors retrieval on exact token overlap (which
/// generalizes to unseen entities), the learned half corrects it.
template <typename S>
Tensor<S> encode_candidate(const Sentence& s, const Tensor<S>& embed,
                           const Tensor<S>& cand_W, const Tensor<S>& cand_b,
                           const std::vector<double>& token_weight) {
  if (s.token_ids.empty()) throw DataError("encode_candidate: empty sentence");
  auto pooled = lexical_pool(s.token_ids, embed, token_weight);
  auto learned = tanh_op(add(matmul(pooled, cand_W), cand_b));
  return concat_cols(std::vector<Tensor<S>>{
      unit_row(learned),
      scale(unit_row(pooled),
            static_cast<S>(kLexicalChannel))});
}

/// Structure-enhanced query for a claim plus already retrieved evidence:
/// reasoning graph -> L GAT layers -> attention readout. The concat_query
/// ablation skips the graph and mean-pools the concatenated tokens instead.
template <typename S>
Tensor<S> build_query(const Sentence& claim,
                      const std::vector<Sentence>& retrieved,
                      const Model<S>& m, const Corpus& corpus) {
  std::vector<int> ids(claim.token_ids);
  for (const auto& s : retrieved)
    ids.insert(ids.end(), s.token_ids.begin(), s.token_ids.end());
  const S lam = static_cast<S>(kLexicalChannel);
  if (m.cfg.concat_query) {
    auto lex = unit_row(lexical_pool(ids, m.embed, corpus.token_weight));
    return concat_cols(std::vector<Tensor<S>>{lex, scale(lex, lam)});
  }
  // Lexical channel with structural refocusing: a token appearing in more
  // than one of {claim, retrieved...} has already served as a link and
  // only points the query back at evidence it came from; the next hop is
  // signposted by the tokens unique to one sentence (the claim's unresolved
  // entity and the newest bridge). Dropping the shared tokens is the
  // parameter-free counterpart of what the graph readout learns.
  if (!retrieved.empty()) {
    std::map<int, int> sent_count;
    auto count_unique = [&](const std::vector<int>& toks) {
      std::set<int> uniq(toks.begin(), toks.end());
      for (int id : uniq) ++sent_count[id];
    };
    count_unique(claim.token_ids);
    for (const auto& s : retrieved) count_unique(s.token_ids);
    std::vector<int> kept;
    for (int id : ids)
      if (sent_count[id] < 2) kept.push_back(id);
    if (!kept.empty()) ids = std::move(kept);
  }
  auto lex = unit_row(lexical_pool(ids, m.embed, corpus.token_weight));
  ReasoningGraph g = build_retrieval_graph(claim, retrieved, corpus.cooc_stop);
  const BoolMat mask = g.neighbor_mask();
  Tensor<S> h = encode_tokens(g, m.embed, corpus.token_weight);
  for (const auto& layer : m.ret.layers) h = gat_layer(h, mask, layer);
  return concat_cols(std::vector<Tensor<S>>{
      unit_row(readout_query(h, m.ret.readout_W, m.ret.readout_w)),
      scale(lex, lam)});
}

/// Precomputed candidate embeddings for a frozen parameter snapshot.
template <typename S>
struct CandidateIndex {
  Mat<S> embeddings;         // |D| x d
  std::vector<S> norms;      // row norms

  static CandidateIndex build(const Corpus& corpus, const Model<S>& m) {
    NoGradGuard ng;
    CandidateIndex idx;
    const Eigen::Index n = static_cast<Eigen::Index>(corpus.sentences.size());
    idx.norms.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
      auto enc = encode_candidate(corpus.sentences[static_cast<std::size_t>(i)],
                                  m.embed, m.ret.cand_W, m.ret.cand_b,
                                  corpus.token_weight);
      if (i == 0) idx.embeddings.resize(n, enc.cols());
      idx.embeddings.row(i) = enc.value().row(0);
      idx.norms[static_cast<std::size_t>(i)] = idx.embeddings.row(i).norm();
    }
    return idx;
  }
};

/// Cosine argmax over non-excluded candidates, ties broken by lowest
/// corpus index. Returns (index, per-candidate scores).
template <typename S>
std::pair<int, std::vector<S>> retrieve_next(
    const Eigen::Matrix<S, 1, Eigen::Dynamic>& query,
    const CandidateIndex<S>& index, const std::vector<bool>& excluded) {
  const Eigen::Index n = index.embeddings.rows();
  const S qn = query.norm();
  std::vector<S> scores(static_cast<std::size_t>(n));
  int best = -1;
  for (Eigen::Index i = 0; i < n; ++i) {
    const S denom = qn * index.norms[static_cast<std::size_t>(i)] + S(1e-12);
    const S s = query.dot(index.embeddings.row(i)) / denom;
    scores[static_cast<std::size_t>(i)] = s;
    if (!excluded.empty() && excluded[static_cast<std::size_t>(i)]) continue;
    if (best < 0 || s > scores[static_cast<std::size_t>(best)]) {
      best = static_cast<int>(i);
    }
  }
  if (best < 0)
    throw DataError("retrieve_next: all candidates excluded");
  return {best, std::move(scores)};
}

struct RetrievalResult {
  std::vector<int> picked;                 // corpus indices, retrieval order
  std::vector<std::vector<double>> queries;  // per-hop query vectors
  std::vector<double> picked_scores;       // per-hop score of the pick
};

/// Iterative multi-hop retrieval with exclusion of prior picks. The
/// single_hop ablation scores once against the claim-only query and takes
/// the top H candidates in one shot.
template <typename S>
RetrievalResult run_multihop(const Sentence& claim, const Corpus& corpus,
                             const Model<S>& m, int hops,
                             const CandidateIndex<S>& index) {
  if (hops < 1) throw ConfigError("run_multihop: hops must be >= 1");
  if (static_cast<int>(corpus.sentences.size()) < hops)
    throw DataError("run_multihop: corpus smaller than hop budget");
  NoGradGuard ng;
  RetrievalResult out;
  std::vector<bool> excluded(corpus.sentences.size(), false);
  std::vector<Sentence> chain;

  auto record_query = [&](const Tensor<S>& q) {
    std::vector<double> qv(static_cast<std::size_t>(q.cols()));
    for (Eigen::Index j = 0; j < q.cols(); ++j)
      qv[static_cast<std::size_t>(j)] = static_cast<double>(q.value()(0, j));
    out.queries.push_back(std::move(qv));
  };

  if (m.cfg.single_hop) {
    Tensor<S> q = build_query(claim, {}, m, corpus);
    Eigen::Matrix<S, 1, Eigen::Dynamic> qrow = q.value().row(0);
    for (int t = 0; t < hops; ++t) {
      auto [best, scores] = retrieve_next(qrow, index, excluded);
      excluded[static_cast<std::size_t>(best)] = true;
      out.picked.push_back(best);
      out.picked_scores.push_back(
          static_cast<double>(scores[static_cast<std::size_t>(best)]));
      record_query(q);
    }
    return out;
  }

  for (int t = 0; t < hops; ++t) {
    Tensor<S> q = build_query(claim, chain, m, corpus);
    Eigen::Matrix<S, 1, Eigen::Dynamic> qrow = q.value().row(0);
    auto [best, scores] = retrieve_next(qrow, index, excluded);
    excluded[static_cast<std::size_t>(best)] = true;
    out.picked.push_back(best);
    out.picked_scores.push_back(
        static_cast<double>(scores[static_cast<std::size_t>(best)]));
    record_query(q);
    chain.push_back(corpus.sentences[static_cast<std::size_t>(best)]);
  }
  return out;
}

}  // namespace srmfv
