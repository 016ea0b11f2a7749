#pragma once

#include <iostream>
#include <map>
#include <set>

#include "srmfv/adam.hpp"
#include "srmfv/checkpoint.hpp"
#include "srmfv/losses.hpp"
#include "srmfv/pipeline.hpp"

namespace srmfv {

struct EpochMetric {
  std::string phase;
  int epoch = 0;
  double loss = 0.0;
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<EpochMetric> metrics;
};

namespace detail {

/// Map gold (doc_id, sent_id) refs to corpus indices.
inline std::vector<int> resolve_chain(
    const Claim& claim,
    const std::map<std::pair<std::string, int>, int>& index) {
  std::vector<int> out;
  for (const auto& ref : claim.gold_chain) {
    auto it = index.find(ref);
    if (it == index.end())
      throw DataError("train: claim " + claim.claim_id +
                      " references missing sentence " + ref.first + "#" +
                      std::to_string(ref.second));
    out.push_back(it->second);
  }
  return out;
}

template <typename S>
std::vector<int> sample_negatives(Rng& rng, int corpus_size, int gold_idx,
                                  int count) {
  std::vector<int> out;
  while (static_cast<int>(out.size()) < count) {
    const int c = static_cast<int>(
        rng.below(static_cast<std::uint64_t>(corpus_size)));
    if (c != gold_idx) out.push_back(c);
  }
  return out;
}

}  // namespace detail

/// Highest-scoring non-gold candidates for a query under the current
/// parameter snapshot; these are the negatives random sampling misses.
template <typename S>
std::vector<int> mine_hard_negatives(
    const Eigen::Matrix<S, 1, Eigen::Dynamic>& query,
    const CandidateIndex<S>& index, int gold_idx, int count) {
  std::vector<bool> excluded(static_cast<std::size_t>(index.embeddings.rows()),
                             false);
  excluded[static_cast<std::size_t>(gold_idx)] = true;
  std::vector<int> out;
  for (int i = 0; i < count; ++i) {
    auto [best, scores] = retrieve_next(query, index, excluded);
    (void)scores;
    excluded[static_cast<std::size_t>(best)] = true;
    out.push_back(best);
  }
  return out;
}

/// Teacher-forced retrieval loss for one claim: at each hop t the query is
/// built from the gold prefix and contrasted against sampled negatives plus
/// pre-mined hard negatives (hard[t], may be empty).
template <typename S>
Tensor<S> claim_retrieval_loss(const Sentence& claim,
                               const std::vector<Sentence>& gold_chain,
                               const std::vector<int>& gold_idx,
                               const Corpus& corpus, const Model<S>& m,
                               Rng& rng,
                               const std::vector<std::vector<int>>& hard = {}) {
  Tensor<S> total = Tensor<S>::scalar(S(0));
  const int hops = static_cast<int>(gold_chain.size());
  for (int t = 0; t < hops; ++t) {
    std::vector<Sentence> prefix(gold_chain.begin(), gold_chain.begin() + t);
    Tensor<S> q = m.cfg.single_hop ? build_query(claim, {}, m, corpus)
                                   : build_query(claim, prefix, m, corpus);
    auto gold_enc = encode_candidate(gold_chain[static_cast<std::size_t>(t)],
                                     m.embed, m.ret.cand_W, m.ret.cand_b,
                                     corpus.token_weight);
    std::vector<int> neg_idx = detail::sample_negatives<S>(
        rng, static_cast<int>(corpus.sentences.size()),
        gold_idx[static_cast<std::size_t>(t)], m.cfg.neg_samples);
    if (static_cast<std::size_t>(t) < hard.size())
      for (int idx : hard[static_cast<std::size_t>(t)])
        if (idx != gold_idx[static_cast<std::size_t>(t)])
          neg_idx.push_back(idx);
    std::vector<Tensor<S>> negs;
    for (int idx : neg_idx)
      negs.push_back(encode_candidate(
          corpus.sentences[static_cast<std::size_t>(idx)], m.embed,
          m.ret.cand_W, m.ret.cand_b, corpus.token_weight));
    total = add(total, retrieval_loss(q, gold_enc, negs,
                                      static_cast<S>(m.cfg.gamma)));
  }
  return scale(total, S(1) / static_cast<S>(hops));
}

/// Verification loss for one claim given an evidence chain.
template <typename S>
Tensor<S> claim_verification_loss(const Sentence& claim,
                                  const std::vector<Sentence>& chain,
                                  Label gold, const Corpus& corpus,
                                  const Model<S>& m) {
  SubgraphSequence seq = make_sequence(claim, chain, m, corpus);
  auto [probs, alpha] = verify_forward(seq, m);
  (void)alpha;
  return verification_loss(probs, gold);
}

/// Staged (default) or joint training. Staged: phase 1 trains the
/// retriever with teacher forcing on gold chains; phase 2 freezes it,
/// retrieves chains for every claim once, and trains the verifier on them.
/// Joint: both losses per epoch, verifier on gold chains where available.
template <typename S>
TrainResult train(const Corpus& corpus, const std::vector<Claim>& claims,
                  const TrainConfig& cfg, std::ostream& log = std::cerr) {
  cfg.validate();
  if (claims.empty()) throw DataError("train: empty claim set");
  Rng rng(cfg.seed);
  Model<S> model =
      Model<S>::init(cfg, static_cast<int>(corpus.vocab_tokens.size()), rng);

  std::map<std::pair<std::string, int>, int> sent_index;
  for (std::size_t i = 0; i < corpus.sentences.size(); ++i)
    sent_index[{corpus.sentences[i].doc_id, corpus.sentences[i].sent_id}] =
        static_cast<int>(i);

  struct Item {
    Sentence claim;
    Label label;
    std::vector<int> gold_idx;
    std::vector<Sentence> gold_chain;
  };
  std::vector<Item> items;
  for (const auto& c : claims) {
    Item it;
    it.claim = corpus.make_sentence("claim:" + c.claim_id, 0, c.text);
    it.label = c.label;
    it.gold_idx = detail::resolve_chain(c, sent_index);
    for (int idx : it.gold_idx)
      it.gold_chain.push_back(corpus.sentences[static_cast<std::size_t>(idx)]);
    items.push_back(std::move(it));
  }

  TrainResult result;
  const bool joint = cfg.schedule == "joint";

  // hard_negs[item][hop] = mined negative corpus indices, refreshed per
  // epoch by the phases that train the retriever.
  std::vector<std::vector<std::vector<int>>> hard_negs(items.size());
  auto mine_all = [&]() {
    if (cfg.hard_negatives == 0 || cfg.single_hop) return;
    NoGradGuard ng;
    const CandidateIndex<S> index = CandidateIndex<S>::build(corpus, model);
    long gold_top1 = 0, queries = 0;
    for (std::size_t i = 0; i < items.size(); ++i) {
      const Item& it = items[i];
      hard_negs[i].assign(it.gold_chain.size(), {});
      for (std::size_t t = 0; t < it.gold_chain.size(); ++t) {
        std::vector<Sentence> prefix(it.gold_chain.begin(),
                                     it.gold_chain.begin() +
                                         static_cast<std::ptrdiff_t>(t));
        Tensor<S> q = build_query(it.claim, prefix, model, corpus);
        Eigen::Matrix<S, 1, Eigen::Dynamic> qrow = q.value().row(0);
        hard_negs[i][t] = mine_hard_negatives(qrow, index, it.gold_idx[t],
                                              cfg.hard_negatives);
        auto [best, scores] = retrieve_next(qrow, index, {});
        ++queries;
        if (best == it.gold_idx[t]) ++gold_top1;
      }
    }
    if (queries)
      log << "  teacher-forced top1 " << gold_top1 << "/" << queries << "\n";
  };

  auto run_phase = [&](const std::string& phase, int epochs,
                       const std::vector<Tensor<S>>& params,
                       auto&& loss_of_item, auto&& item_filter,
                       auto&& epoch_begin) {
    Adam<S> opt(params, static_cast<S>(cfg.lr));
    std::vector<int> order;
    for (std::size_t i = 0; i < items.size(); ++i)
      if (item_filter(items[i])) order.push_back(static_cast<int>(i));
    if (order.empty()) return;
    for (int epoch = 0; epoch < epochs; ++epoch) {
      epoch_begin();
      rng.shuffle(order);
      double epoch_loss = 0.0;
      int in_batch = 0;
      opt.zero_grad();
      for (std::size_t pos = 0; pos < order.size(); ++pos) {
        const int item_idx = order[pos];
        Tensor<S> loss = loss_of_item(item_idx);
        const double lv = static_cast<double>(loss.item());
        if (!std::isfinite(lv))
          throw NumericError("train: non-finite loss in phase " + phase +
                             ", epoch " + std::to_string(epoch));
        epoch_loss += lv;
        backward(loss);
        if (++in_batch == cfg.batch_size || pos + 1 == order.size()) {
          opt.step();
          opt.zero_grad();
          in_batch = 0;
        }
      }
      const double avg = epoch_loss / static_cast<double>(order.size());
      result.metrics.push_back({phase, epoch, avg});
      log << "[" << phase << "] epoch " << epoch << " loss " << avg << "\n";
    }
  };

  auto has_chain = [](const Item& it) { return !it.gold_chain.empty(); };
  auto any_item = [](const Item&) { return true; };

  if (joint) {
    // NEI claims have no gold chain; retrieve theirs once up front.
    const CandidateIndex<S> index = CandidateIndex<S>::build(corpus, model);
    std::vector<std::vector<Sentence>> chains(items.size());
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (!items[i].gold_chain.empty()) {
        chains[i] = items[i].gold_chain;
      } else {
        auto rr = run_multihop(items[i].claim, corpus, model, cfg.hops, index);
        for (int idx : rr.picked)
          chains[i].push_back(corpus.sentences[static_cast<std::size_t>(idx)]);
      }
    }
    // Union of retriever and verifier parameters (the embedding table is
    // shared; keep one handle per node).
    std::vector<Tensor<S>> joint_params = model.retriever_param_list();
    {
      std::set<const void*> seen;
      for (const auto& t : joint_params) seen.insert(t.node().get());
      for (const auto& t : model.verifier_param_list())
        if (seen.insert(t.node().get()).second) joint_params.push_back(t);
    }
    run_phase(
        "joint", cfg.epochs, joint_params,
        [&](int idx) {
          const Item& it = items[static_cast<std::size_t>(idx)];
          Tensor<S> loss = claim_verification_loss(
              it.claim, chains[static_cast<std::size_t>(idx)], it.label,
              corpus, model);
          if (!it.gold_chain.empty())
            loss = add(loss, claim_retrieval_loss(
                                 it.claim, it.gold_chain, it.gold_idx, corpus,
                                 model, rng,
                                 hard_negs[static_cast<std::size_t>(idx)]));
          return loss;
        },
        any_item, mine_all);
  } else {
    run_phase(
        "retriever", cfg.epochs, model.retriever_param_list(),
        [&](int idx) {
          const Item& it = items[static_cast<std::size_t>(idx)];
          return claim_retrieval_loss(
              it.claim, it.gold_chain, it.gold_idx, corpus, model, rng,
              hard_negs[static_cast<std::size_t>(idx)]);
        },
        has_chain, mine_all);

    // Retrieval is frozen from here on; fetch each claim's chain once.
    const CandidateIndex<S> index = CandidateIndex<S>::build(corpus, model);
    std::vector<std::vector<Sentence>> chains(items.size());
    for (std::size_t i = 0; i < items.size(); ++i) {
      auto rr = run_multihop(items[i].claim, corpus, model, cfg.hops, index);
      for (int idx : rr.picked)
        chains[i].push_back(corpus.sentences[static_cast<std::size_t>(idx)]);
    }
    run_phase(
        "verifier",
        cfg.verifier_epochs == -1 ? cfg.epochs : cfg.verifier_epochs,
        model.verifier_param_list(),
        [&](int idx) {
          const Item& it = items[static_cast<std::size_t>(idx)];
          return claim_verification_loss(
              it.claim, chains[static_cast<std::size_t>(idx)], it.label,
              corpus, model);
        },
        any_item, [] {});
  }

  result.checkpoint = make_checkpoint(model, rng);
  return result;
}

}  // namespace srmfv
