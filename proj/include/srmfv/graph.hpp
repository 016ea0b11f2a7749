#pragma once

#include <functional>
#include <set>
#include <utility>
#include <vector>

#include "srmfv/tensor.hpp"
#include "srmfv/text.hpp"

namespace srmfv {

inline constexpr int kClaimSource = -1;

struct TokenNode {
  int node_id = 0;
  int source = kClaimSource;  // kClaimSource, or evidence index >= 0
  int position = 0;           // position within its sentence
  int token_id = kUnkId;
  std::string token;
  bool capitalized = false;
};

// Unordered node pair stored as (min, max). std::set keeps iteration
// deterministic.
using EdgeSet = std::set<std::pair<int, int>>;

inline std::pair<int, int> edge(int a, int b) {
  return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
}

/// Token-level graph over a claim and its retrieved evidence. Edge kinds
/// are stored disjointly; adjacency is intra-sentence, every other kind is
/// strictly cross-sentence.
struct ReasoningGraph {
  std::vector<TokenNode> nodes;
  EdgeSet adj, cooc, coref, sem;

  std::size_t num_sentences = 0;  // claim + evidence count

  /// Neighbor mask over the union of all edge sets, with a self-loop for
  /// nodes that would otherwise be isolated.
  BoolMat neighbor_mask() const;
};

/// Adjacency between consecutive tokens of each sentence; co-occurrence
/// between cross-sentence token pairs with equal ids, excluding the corpus
/// frequency stop-set.
ReasoningGraph build_retrieval_graph(
    const Sentence& claim, const std::vector<Sentence>& retrieved,
    const std::unordered_set<int>& cooc_stop);

/// Cross-sentence edges between maximal capitalized mentions with identical
/// normalized forms. One edge per mention pair, anchored at the mentions'
/// first tokens.
EdgeSet coref_edges(const ReasoningGraph& g);

/// Latent edges: symmetrized bilinear affinity, kept when sigmoid exceeds
/// tau. Restricted to cross-sentence pairs; no self-loops.
template <typename S>
EdgeSet learned_edges(const ReasoningGraph& g, const Mat<S>& node_embeddings,
                      const Mat<S>& w_sem, double tau) {
  if (!(tau > 0.0 && tau < 1.0))
    throw ConfigError("learned_edges: tau must lie in (0,1), got " +
                      std::to_string(tau));
  const Eigen::Index n = node_embeddings.rows();
  if (n != static_cast<Eigen::Index>(g.nodes.size()))
    throw ShapeError("learned_edges: embedding row count != node count");
  Mat<S> w = node_embeddings * w_sem * node_embeddings.transpose();
  EdgeSet out;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (g.nodes[static_cast<std::size_t>(i)].source ==
          g.nodes[static_cast<std::size_t>(j)].source)
        continue;
      const double a = 0.5 * (static_cast<double>(w(i, j)) +
                              static_cast<double>(w(j, i)));
      const double s = 1.0 / (1.0 + std::exp(-a));
      if (s > tau)
        out.insert(edge(static_cast<int>(i), static_cast<int>(j)));
    }
  }
  return out;
}

struct SubgraphSequence {
  Sentence claim;
  std::vector<Sentence> evidence;       // retrieval order
  std::vector<ReasoningGraph> graphs;   // G_1..G_n
};

/// Progressive subgraphs G_k over claim + e_1..e_k with adjacency,
/// co-occurrence, coreference, and latent edges. The embedding provider
/// supplies layer-0 contextual embeddings for a graph's nodes, used once
/// per subgraph to score latent edges.
template <typename S>
SubgraphSequence build_subgraph_sequence(
    const Sentence& claim, const std::vector<Sentence>& evidence,
    const std::function<Mat<S>(const ReasoningGraph&)>& embeddings,
    const Mat<S>& w_sem, double tau,
    const std::unordered_set<int>& cooc_stop) {
  if (evidence.empty())
    throw DataError("build_subgraph_sequence: need at least one evidence "
                    "sentence");
  SubgraphSequence seq;
  seq.claim = claim;
  seq.evidence = evidence;
  for (std::size_t k = 1; k <= evidence.size(); ++k) {
    std::vector<Sentence> prefix(evidence.begin(),
                                 evidence.begin() + static_cast<long>(k));
    ReasoningGraph g = build_retrieval_graph(claim, prefix, cooc_stop);
    g.coref = coref_edges(g);
    g.sem = learned_edges<S>(g, embeddings(g), w_sem, tau);
    seq.graphs.push_back(std::move(g));
  }
  return seq;
}

}  // namespace srmfv
