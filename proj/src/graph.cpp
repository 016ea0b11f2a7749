#include <map>
#include <string>

#include "srmfv/graph.hpp"

namespace srmfv {

BoolMat ReasoningGraph::neighbor_mask() const {
  const Eigen::Index n = static_cast<Eigen::Index>(nodes.size());
  BoolMat m = BoolMat::Constant(n, n, false);
  for (const EdgeSet* es : {&adj, &cooc, &coref, &sem}) {
    for (const auto& [a, b] : *es) {
      m(a, b) = true;
      m(b, a) = true;
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!m.row(i).any()) m(i, i) = true;  // isolate fallback
  }
  return m;
}

ReasoningGraph build_retrieval_graph(
    const Sentence& claim, const std::vector<Sentence>& retrieved,
    const std::unordered_set<int>& cooc_stop) {
  if (claim.tokens.empty())
    throw DataError("build_retrieval_graph: empty claim");
  ReasoningGraph g;
  g.num_sentences = 1 + retrieved.size();

  auto add_sentence = [&](const Sentence& s, int source) {
    const int base = static_cast<int>(g.nodes.size());
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      TokenNode n;
      n.node_id = base + static_cast<int>(i);
      n.source = source;
      n.position = static_cast<int>(i);
      n.token_id = s.token_ids.empty() ? kUnkId : s.token_ids[i];
      n.token = s.tokens[i];
      n.capitalized = i < s.capitalized.size() && s.capitalized[i];
      g.nodes.push_back(n);
      if (i > 0) g.adj.insert(edge(n.node_id - 1, n.node_id));
    }
  };

  add_sentence(claim, kClaimSource);
  for (std::size_t k = 0; k < retrieved.size(); ++k)
    add_sentence(retrieved[k], static_cast<int>(k));

  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const TokenNode& a = g.nodes[i];
    if (cooc_stop.count(a.token_id)) continue;
    for (std::size_t j = i + 1; j < g.nodes.size(); ++j) {
      const TokenNode& b = g.nodes[j];
      if (a.source == b.source) continue;
      if (a.token_id == b.token_id)
        g.cooc.insert(edge(a.node_id, b.node_id));
    }
  }
  return g;
}

EdgeSet coref_edges(const ReasoningGraph& g) {
  // A mention is a maximal run of capitalized tokens within one sentence,
  // keyed by the lowercased joined form.
  struct Mention {
    int source;
    int first_node;
    std::string form;
  };
  std::vector<Mention> mentions;
  std::size_t i = 0;
  while (i < g.nodes.size()) {
    if (!g.nodes[i].capitalized) {
      ++i;
      continue;
    }
    const int source = g.nodes[i].source;
    const int first = g.nodes[i].node_id;
    std::string form;
    while (i < g.nodes.size() && g.nodes[i].capitalized &&
           g.nodes[i].source == source &&
           (form.empty() ||
            g.nodes[i].position == g.nodes[i - 1].position + 1)) {
      if (!form.empty()) form += ' ';
      form += g.nodes[i].token;
      ++i;
    }
    mentions.push_back({source, first, form});
  }
  EdgeSet out;
  for (std::size_t a = 0; a < mentions.size(); ++a)
    for (std::size_t b = a + 1; b < mentions.size(); ++b)
      if (mentions[a].source != mentions[b].source &&
          mentions[a].form == mentions[b].form)
        out.insert(edge(mentions[a].first_node, mentions[b].first_node));
  return out;
}

}  // namespace srmfv
