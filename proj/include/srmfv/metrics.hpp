#pragma once

#include <string>
#include <utility>
#include <vector>

#include "srmfv/text.hpp"

namespace srmfv {

struct Prediction {
  std::string claim_id;
  Label label = Label::NotEnoughInfo;
  std::vector<std::pair<std::string, int>> retrieved;  // retrieval order
};

struct MetricsRecord {
  double la = 0.0;            // label accuracy
  double strict_score = 0.0;  // correct label AND gold chain retrieved
  double precision = 0.0;     // micro, retrieved vs gold sentence sets
  double recall = 0.0;
  double f1 = 0.0;
  // per_hop[t] = micro recall of gold chains at retrieval depth t+1.
  std::vector<double> per_hop;
};

/// Predictions must cover exactly the gold claims (matched by claim_id).
/// NEI claims are exempt from the strict-score chain requirement; their
/// (empty) gold sets still enter the micro precision denominator.
MetricsRecord evaluate(const std::vector<Prediction>& predictions,
                       const std::vector<Claim>& gold);

std::string metrics_to_json(const MetricsRecord& m);
std::string metrics_to_csv(const MetricsRecord& m);

}  // namespace srmfv
