#pragma once

#include <cmath>

#include "srmfv/rng.hpp"
#include "srmfv/tensor.hpp"

namespace srmfv {

/// Uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) initialization. Values are
/// drawn in double and narrowed, so float and double instantiations of the
/// same seed see the same underlying stream.
template <typename S>
Mat<S> init_uniform(Rng& rng, Eigen::Index rows, Eigen::Index cols,
                    Eigen::Index fan_in) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  Mat<S> m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j)
      m(i, j) = static_cast<S>(rng.uniform(-bound, bound));
  return m;
}

template <typename S>
Tensor<S> init_param(Rng& rng, Eigen::Index rows, Eigen::Index cols,
                     Eigen::Index fan_in) {
  return Tensor<S>::leaf(init_uniform<S>(rng, rows, cols, fan_in), true);
}

}  // namespace srmfv
