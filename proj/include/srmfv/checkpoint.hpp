#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "srmfv/config.hpp"
#include "srmfv/model.hpp"
#include "srmfv/rng.hpp"

namespace srmfv {

/// Bit-exact model snapshot. Values are stored as 32-bit little-endian
/// floats regardless of the in-memory scalar type.
struct Checkpoint {
  static constexpr std::uint32_t kVersion = 1;
  std::vector<std::pair<std::string, Mat<float>>> tensors;
  TrainConfig config;
  std::array<std::uint64_t, 4> rng_state{};
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

template <typename S>
Checkpoint make_checkpoint(const Model<S>& m, const Rng& rng) {
  Checkpoint c;
  c.config = m.cfg;
  c.rng_state = rng.state();
  for (const auto& [name, t] : m.named_params())
    c.tensors.emplace_back(name, t.value().template cast<float>());
  return c;
}

/// Rebuild a model from a checkpoint. Tensor names must match the layout
/// implied by the stored config exactly.
template <typename S>
Model<S> model_from_checkpoint(const Checkpoint& c) {
  Rng scratch(c.config.seed);
  Model<S> m = Model<S>::init(c.config, 1, scratch);
  auto named = m.named_params();
  if (named.size() != c.tensors.size())
    throw FormatError("checkpoint: tensor count does not match config");
  for (std::size_t i = 0; i < named.size(); ++i) {
    if (named[i].first != c.tensors[i].first)
      throw FormatError("checkpoint: unexpected tensor '" +
                        c.tensors[i].first + "', expected '" +
                        named[i].first + "'");
    named[i].second.value() = c.tensors[i].second.cast<S>();
    named[i].second.zero_grad();
  }
  return m;
}

}  // namespace srmfv
