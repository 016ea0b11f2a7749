#include <cstdio>
#include <set>

#include "srmfv/rng.hpp"
#include "srmfv/synthbench.hpp"

namespace srmfv {

namespace {

std::string fmt_id(const char* prefix, int n) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%06d", prefix, n);
  return buf;
}

std::string entity_name(int n) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "Ent%03d", n);
  return buf;
}

std::string relation_name(int n) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "rel%02d", n);
  return buf;
}

}  // namespace

void ChainSpec::validate() const {
  if (hops < 1) throw ConfigError("chain spec: hops must be >= 1");
  if (entity_vocab < 2)
    throw ConfigError("chain spec: entity vocabulary must hold >= 2 entities");
  if (relation_vocab < 1)
    throw ConfigError("chain spec: relation vocabulary must be >= 1");
  if (num_claims < 3) throw ConfigError("chain spec: need >= 3 claims");
  if (dev_fraction < 0.0 || dev_fraction >= 1.0)
    throw ConfigError("chain spec: dev_fraction must lie in [0,1)");
  if (distractor_ratio < 0.0)
    throw ConfigError("chain spec: distractor ratio must be >= 0");
}

GeneratedData generate(const ChainSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);

  // Exact-thirds label assignment, shuffled.
  std::vector<Label> labels;
  for (int i = 0; i < spec.num_claims; ++i)
    labels.push_back(static_cast<Label>(i % 3));
  rng.shuffle(labels);

  GeneratedData out;
  std::vector<Claim> claims;
  int bridge_counter = 0;
  const int k = spec.hops;

  for (int i = 0; i < spec.num_claims; ++i) {
    const Label label = labels[static_cast<std::size_t>(i)];
    const std::string doc = fmt_id("c", i);

    // Entity path: unique head, unique bridges, vocabulary tail.
    std::vector<std::string> path;
    path.push_back(fmt_id("Hd", i));
    for (int b = 0; b < k - 1; ++b)
      path.push_back(fmt_id("Br", bridge_counter++));
    const int tail_ent = static_cast<int>(rng.below(
        static_cast<std::uint64_t>(spec.entity_vocab)));
    path.push_back(entity_name(tail_ent));

    std::vector<int> rels;
    for (int j = 0; j < k; ++j)
      rels.push_back(static_cast<int>(
          rng.below(static_cast<std::uint64_t>(spec.relation_vocab))));

    // The claim asserts the final fact: head, last-link relation, tail.
    // REFUTED corrupts the claimed tail entity.
    std::string claim_tail = path.back();
    if (label == Label::Refuted) {
      int corrupt = (tail_ent + 1 +
                     static_cast<int>(rng.below(static_cast<std::uint64_t>(
                         spec.entity_vocab - 1)))) %
                    spec.entity_vocab;
      claim_tail = entity_name(corrupt);
    }
    const int withheld =
        label == Label::NotEnoughInfo
            ? static_cast<int>(rng.below(static_cast<std::uint64_t>(k)))
            : -1;

    Claim c;
    c.claim_id = fmt_id("q", i);
    c.text = path.front() + " " + relation_name(rels.back()) + " " +
             claim_tail + ".";
    c.label = label;
    for (int j = 0; j < k; ++j) {
      const std::string text = path[static_cast<std::size_t>(j)] + " " +
                               relation_name(rels[static_cast<std::size_t>(j)]) +
                               " " + path[static_cast<std::size_t>(j + 1)] + ".";
      if (j != withheld) out.corpus.push_back({doc, j, text});
      if (label != Label::NotEnoughInfo) c.gold_chain.emplace_back(doc, j);
    }
    claims.push_back(std::move(c));
  }

  // Distractors reuse the relation vocabulary and ordinary entities, never
  // minted heads or bridges.
  const int chain_sentences = static_cast<int>(out.corpus.size());
  int distractors;
  if (spec.corpus_size > 0) {
    if (spec.corpus_size < chain_sentences)
      throw ConfigError("chain spec: corpus_size " +
                        std::to_string(spec.corpus_size) +
                        " cannot hold the " +
                        std::to_string(chain_sentences) + " chain sentences");
    distractors = spec.corpus_size - chain_sentences;
  } else {
    distractors = static_cast<int>(spec.distractor_ratio * chain_sentences);
  }
  for (int i = 0; i < distractors; ++i) {
    const int a = static_cast<int>(
        rng.below(static_cast<std::uint64_t>(spec.entity_vocab)));
    int b = static_cast<int>(
        rng.below(static_cast<std::uint64_t>(spec.entity_vocab - 1)));
    if (b >= a) ++b;
    const int r = static_cast<int>(
        rng.below(static_cast<std::uint64_t>(spec.relation_vocab)));
    out.corpus.push_back(
        {"dx", i, entity_name(a) + " " + relation_name(r) + " " +
                      entity_name(b) + "."});
  }
  rng.shuffle(out.corpus);

  const int dev_count =
      static_cast<int>(spec.dev_fraction * spec.num_claims + 0.5);
  for (std::size_t i = 0; i < claims.size(); ++i) {
    if (static_cast<int>(i) < spec.num_claims - dev_count)
      out.train_claims.push_back(std::move(claims[i]));
    else
      out.dev_claims.push_back(std::move(claims[i]));
  }
  return out;
}

}  // namespace srmfv
