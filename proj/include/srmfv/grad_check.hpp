#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "srmfv/tensor.hpp"

namespace srmfv {

/// Central finite-difference check of reverse-mode gradients.
///
/// `f` must be a deterministic scalar-valued computation reading the given
/// parameter tensors by reference (so perturbations of their values are
/// visible on re-evaluation). Returns the maximum over all parameter
/// elements of |analytic - central_diff| / max(1, |central_diff|).
template <typename S>
S grad_check(const std::function<Tensor<S>()>& f, std::vector<Tensor<S>> params,
             S eps = S(1e-4)) {
  for (auto& p : params) p.zero_grad();
  Tensor<S> out = f();
  if (out.size() != 1) throw NumericError("grad_check: f must return a scalar");
  if (!std::isfinite(out.item()))
    throw NumericError("grad_check: f returned a non-finite value");
  backward(out);

  std::vector<Mat<S>> analytic;
  for (auto& p : params)
    analytic.push_back(p.grad().size() ? p.grad()
                                       : Mat<S>::Zero(p.rows(), p.cols()));

  NoGradGuard ng;  // finite-difference evaluations need values only
  S worst = S(0);
  for (std::size_t k = 0; k < params.size(); ++k) {
    Mat<S>& val = params[k].value();
    for (Eigen::Index i = 0; i < val.rows(); ++i) {
      for (Eigen::Index j = 0; j < val.cols(); ++j) {
        const S orig = val(i, j);
        val(i, j) = orig + eps;
        const S fp = f().item();
        val(i, j) = orig - eps;
        const S fm = f().item();
        val(i, j) = orig;
        if (!std::isfinite(fp) || !std::isfinite(fm))
          throw NumericError("grad_check: non-finite value under perturbation");
        const S fd = (fp - fm) / (S(2) * eps);
        const S err = std::abs(analytic[k](i, j) - fd) /
                      std::max(S(1), std::abs(fd));
        worst = std::max(worst, err);
      }
    }
  }
  return worst;
}

}  // namespace srmfv
