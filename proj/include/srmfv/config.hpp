#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "srmfv/error.hpp"

namespace srmfv {

struct TrainConfig {
  std::uint64_t seed = 1;
  int d = 32;
  int L_retriever = 2;
  int L_verifier = 2;
  int heads = 2;
  int hops = 2;
  double tau = 0.7;
  double gamma = 0.07;
  double lr = 1e-3;
  int epochs = 10;
  // Verifier-phase epoch count under the staged schedule; -1 reuses
  // `epochs`. The two phases converge at different rates: retrieval keeps
  // improving long after the verifier starts overfitting.
  int verifier_epochs = -1;
  int batch_size = 8;
  int neg_samples = 16;
  // Per-hop count of highest-scoring non-gold candidates re-mined at each
  // epoch start and added to the contrastive negatives.
  int hard_negatives = 8;
  // Ablations (each switches off exactly one pipeline stage).
  bool concat_query = false;
  bool single_hop = false;
  bool unified_graph = false;
  bool gat_encoder = false;
  std::string schedule = "staged";  // staged | joint

  void validate() const {
    if (d < 2 || d % heads != 0)
      throw ConfigError("config: d must be >= 2 and divisible by heads");
    if (L_retriever < 1 || L_verifier < 1)
      throw ConfigError("config: layer counts must be >= 1");
    if (hops < 1) throw ConfigError("config: hops must be >= 1");
    if (!(tau > 0.0 && tau < 1.0))
      throw ConfigError("config: tau must lie in (0,1)");
    if (schedule != "staged" && schedule != "joint")
      throw ConfigError("config: schedule must be 'staged' or 'joint'");
    if (batch_size < 1 || epochs < 1 || neg_samples < 1)
      throw ConfigError("config: batch_size, epochs, neg_samples must be >= 1");
    if (hard_negatives < 0)
      throw ConfigError("config: hard_negatives must be >= 0");
    if (verifier_epochs != -1 && verifier_epochs < 1)
      throw ConfigError("config: verifier_epochs must be -1 or >= 1");
  }
};

inline nlohmann::json to_json(const TrainConfig& c) {
  return {
      {"seed", c.seed},
      {"d", c.d},
      {"L_retriever", c.L_retriever},
      {"L_verifier", c.L_verifier},
      {"heads", c.heads},
      {"hops", c.hops},
      {"tau", c.tau},
      {"gamma", c.gamma},
      {"lr", c.lr},
      {"epochs", c.epochs},
      {"verifier_epochs", c.verifier_epochs},
      {"batch_size", c.batch_size},
      {"neg_samples", c.neg_samples},
      {"hard_negatives", c.hard_negatives},
      {"concat_query", c.concat_query},
      {"single_hop", c.single_hop},
      {"unified_graph", c.unified_graph},
      {"gat_encoder", c.gat_encoder},
      {"schedule", c.schedule},
  };
}

/// Strict parse: unknown keys are rejected so configs stay diffable.
inline TrainConfig config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "seed") c.seed = value.get<std::uint64_t>();
    else if (key == "d") c.d = value.get<int>();
    else if (key == "L_retriever") c.L_retriever = value.get<int>();
    else if (key == "L_verifier") c.L_verifier = value.get<int>();
    else if (key == "heads") c.heads = value.get<int>();
    else if (key == "hops") c.hops = value.get<int>();
    else if (key == "tau") c.tau = value.get<double>();
    else if (key == "gamma") c.gamma = value.get<double>();
    else if (key == "lr") c.lr = value.get<double>();
    else if (key == "epochs") c.epochs = value.get<int>();
    else if (key == "verifier_epochs") c.verifier_epochs = value.get<int>();
    else if (key == "batch_size") c.batch_size = value.get<int>();
    else if (key == "neg_samples") c.neg_samples = value.get<int>();
    else if (key == "hard_negatives") c.hard_negatives = value.get<int>();
    else if (key == "concat_query") c.concat_query = value.get<bool>();
    else if (key == "single_hop") c.single_hop = value.get<bool>();
    else if (key == "unified_graph") c.unified_graph = value.get<bool>();
    else if (key == "gat_encoder") c.gat_encoder = value.get<bool>();
    else if (key == "schedule") c.schedule = value.get<std::string>();
    else throw ConfigError("config: unknown key '" + key + "'");
  }
  c.validate();
  return c;
}

}  // namespace srmfv
