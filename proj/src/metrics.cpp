#include <algorithm>
#include <set>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "srmfv/metrics.hpp"

namespace srmfv {

MetricsRecord evaluate(const std::vector<Prediction>& predictions,
                       const std::vector<Claim>& gold) {
  if (predictions.size() != gold.size())
    throw DataError("evaluate: prediction count " +
                    std::to_string(predictions.size()) + " != claim count " +
                    std::to_string(gold.size()));
  std::unordered_map<std::string, const Prediction*> by_id;
  for (const auto& p : predictions) by_id[p.claim_id] = &p;

  std::size_t max_depth = 0;
  for (const auto& p : predictions)
    max_depth = std::max(max_depth, p.retrieved.size());

  long correct = 0, strict = 0;
  long inter = 0, retrieved_total = 0, gold_total = 0;
  std::vector<long> hop_hits(max_depth, 0);

  for (const auto& g : gold) {
    auto it = by_id.find(g.claim_id);
    if (it == by_id.end())
      throw DataError("evaluate: no prediction for claim " + g.claim_id);
    const Prediction& p = *it->second;

    const bool label_ok = p.label == g.label;
    if (label_ok) ++correct;

    std::set<std::pair<std::string, int>> gold_set(g.gold_chain.begin(),
                                                   g.gold_chain.end());
    std::set<std::pair<std::string, int>> retr_set(p.retrieved.begin(),
                                                   p.retrieved.end());
    long hit = 0;
    for (const auto& ref : gold_set) hit += retr_set.count(ref) ? 1 : 0;
    inter += hit;
    retrieved_total += static_cast<long>(retr_set.size());
    gold_total += static_cast<long>(gold_set.size());

    const bool chain_ok =
        g.label == Label::NotEnoughInfo ||  // NEI exempt
        hit == static_cast<long>(gold_set.size());
    if (label_ok && chain_ok) ++strict;

    // recall by retrieval depth
    std::set<std::pair<std::string, int>> prefix;
    for (std::size_t t = 0; t < max_depth; ++t) {
      if (t < p.retrieved.size()) prefix.insert(p.retrieved[t]);
      long h = 0;
      for (const auto& ref : gold_set) h += prefix.count(ref) ? 1 : 0;
      hop_hits[t] += h;
    }
  }

  MetricsRecord m;
  const double n = static_cast<double>(gold.size());
  m.la = static_cast<double>(correct) / n;
  m.strict_score = static_cast<double>(strict) / n;
  m.precision = retrieved_total
                    ? static_cast<double>(inter) / static_cast<double>(retrieved_total)
                    : 0.0;
  m.recall = gold_total
                 ? static_cast<double>(inter) / static_cast<double>(gold_total)
                 : 0.0;
  m.f1 = (m.precision + m.recall) > 0.0
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;
  for (long h : hop_hits)
    m.per_hop.push_back(gold_total ? static_cast<double>(h) /
                                         static_cast<double>(gold_total)
                                   : 0.0);
  return m;
}

std::string metrics_to_json(const MetricsRecord& m) {
  nlohmann::json j{{"la", m.la},
                   {"strict_score", m.strict_score},
                   {"precision", m.precision},
                   {"recall", m.recall},
                   {"f1", m.f1},
                   {"per_hop", m.per_hop}};
  return j.dump(2);
}

std::string metrics_to_csv(const MetricsRecord& m) {
  std::ostringstream out;
  out << "metric,value\n";
  out << "la," << m.la << "\n";
  out << "strict_score," << m.strict_score << "\n";
  out << "precision," << m.precision << "\n";
  out << "recall," << m.recall << "\n";
  out << "f1," << m.f1 << "\n";
  for (std::size_t t = 0; t < m.per_hop.size(); ++t)
    out << "recall_at_" << (t + 1) << "," << m.per_hop[t] << "\n";
  return out.str();
}

}  // namespace srmfv
