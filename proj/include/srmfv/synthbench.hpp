#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "srmfv/text.hpp"

namespace srmfv {

/// Generator parameters for planted reasoning chains. Bridge entities (and
/// chain heads) are minted uniquely per chain so every planted chain has a
/// unique lexical path; tails and distractor arguments come from the shared
/// entity vocabulary.
struct ChainSpec {
  int hops = 2;  // chain length k (2..4)
  int entity_vocab = 200;
  int relation_vocab = 30;
  int num_claims = 600;
  double dev_fraction = 0.2;
  // Total corpus sentence budget. When 0, the distractor ratio decides the
  // distractor count instead.
  int corpus_size = 0;
  double distractor_ratio = 1.0;
  std::uint64_t seed = 1;

  void validate() const;
};

struct GeneratedData {
  std::vector<CorpusRecord> corpus;
  std::vector<Claim> train_claims;
  std::vector<Claim> dev_claims;
};

/// Deterministic given the seed. Labels are assigned in exact thirds.
/// SUPPORTED and REFUTED claims have complete in-corpus chains; NEI claims
/// have exactly one link withheld and an empty gold chain.
GeneratedData generate(const ChainSpec& spec);

}  // namespace srmfv
