#pragma once

#include <thread>

#include "srmfv/metrics.hpp"
#include "srmfv/retriever.hpp"
#include "srmfv/verifier.hpp"

namespace srmfv {

/// Progressive subgraph sequence for a claim and an evidence chain, using
/// the model's layer-0 contextual embeddings to score latent edges.
template <typename S>
SubgraphSequence make_sequence(const Sentence& claim,
                               const std::vector<Sentence>& chain,
                               const Model<S>& m, const Corpus& corpus) {
  std::function<Mat<S>(const ReasoningGraph&)> provider =
      [&m, &corpus](const ReasoningGraph& g) {
        NoGradGuard ng;
        return Mat<S>(encode_tokens(g, m.embed, corpus.token_weight).value());
      };
  return build_subgraph_sequence<S>(claim, chain, provider, m.sem_W.value(),
                                    m.cfg.tau, corpus.cooc_stop);
}

/// Full inference for one claim: multi-hop retrieval, progressive subgraph
/// verification.
template <typename S>
std::pair<RetrievalResult, VerificationResult> predict_claim(
    const Sentence& claim, const Corpus& corpus, const Model<S>& m,
    const CandidateIndex<S>& index) {
  RetrievalResult rr = run_multihop(claim, corpus, m, m.cfg.hops, index);
  std::vector<Sentence> chain;
  for (int idx : rr.picked)
    chain.push_back(corpus.sentences[static_cast<std::size_t>(idx)]);
  SubgraphSequence seq = make_sequence(claim, chain, m, corpus);
  VerificationResult vr = verify(seq, m);
  vr.retrieved = rr.picked;
  return {std::move(rr), std::move(vr)};
}

/// Predictions for a batch of claims against a frozen model snapshot.
/// `jobs` > 1 fans out over claims; results keep claim order.
template <typename S>
std::vector<Prediction> predict_all(const std::vector<Claim>& claims,
                                    const Corpus& corpus, const Model<S>& m,
                                    int jobs = 1) {
  const CandidateIndex<S> index = CandidateIndex<S>::build(corpus, m);
  std::vector<Prediction> out(claims.size());
  auto work = [&](std::size_t begin, std::size_t stride) {
    NoGradGuard ng;
    for (std::size_t i = begin; i < claims.size(); i += stride) {
      const Claim& c = claims[i];
      Sentence claim = corpus.make_sentence("claim:" + c.claim_id, 0, c.text);
      auto [rr, vr] = predict_claim(claim, corpus, m, index);
      Prediction p;
      p.claim_id = c.claim_id;
      p.label = vr.label;
      for (int idx : rr.picked) {
        const Sentence& s = corpus.sentences[static_cast<std::size_t>(idx)];
        p.retrieved.emplace_back(s.doc_id, s.sent_id);
      }
      out[i] = std::move(p);
    }
  };
  if (jobs <= 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t)
      pool.emplace_back(work, static_cast<std::size_t>(t),
                        static_cast<std::size_t>(jobs));
    for (auto& th : pool) th.join();
  }
  return out;
}

}  // namespace srmfv
