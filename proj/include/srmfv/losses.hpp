#pragma once

#include <vector>

#include "srmfv/ops.hpp"
#include "srmfv/text.hpp"

namespace srmfv {

/// Cross-entropy over the three labels: -log p[gold].
template <typename S>
Tensor<S> verification_loss(const Tensor<S>& probs, Label gold) {
  if (probs.rows() != 1 || probs.cols() != 3)
    throw ShapeError("verification_loss: expected a 1x3 probability row");
  const int g = static_cast<int>(gold);
  if (g < 0 || g > 2) throw DataError("verification_loss: gold out of range");
  return scale(log_op(pick(probs, 0, g)), S(-1));
}

/// Temperature-scaled softmax cross-entropy over cosine scores, with the
/// gold candidate as the positive. Gradients flow through the query and
/// every candidate encoding.
template <typename S>
Tensor<S> retrieval_loss(const Tensor<S>& query, const Tensor<S>& gold_enc,
                         const std::vector<Tensor<S>>& negative_encs,
                         S gamma) {
  if (negative_encs.empty())
    throw DataError("retrieval_loss: need at least one negative");
  for (const auto& neg : negative_encs)
    if (neg.node() == gold_enc.node())
      throw DataError("retrieval_loss: gold appears among the negatives");
  std::vector<Tensor<S>> scores;
  scores.push_back(scale(cosine_sim(query, gold_enc), S(1) / gamma));
  for (const auto& neg : negative_encs)
    scores.push_back(scale(cosine_sim(query, neg), S(1) / gamma));
  auto probs = softmax_rows(concat_cols(scores));
  return scale(log_op(pick(probs, 0, 0)), S(-1));
}

}  // namespace srmfv
