#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "srmfv/tensor.hpp"

namespace srmfv {

/// Standard bias-corrected Adam over a fixed list of leaf tensors.
/// Moment buffers are positional: the parameter list must not change
/// between steps.
template <typename S>
class Adam {
 public:
  Adam(std::vector<Tensor<S>> params, S lr, S beta1 = S(0.9),
       S beta2 = S(0.999), S eps = S(1e-8))
      : params_(std::move(params)), lr_(lr), b1_(beta1), b2_(beta2), eps_(eps) {
    for (const auto& p : params_) {
      m_.push_back(Mat<S>::Zero(p.rows(), p.cols()));
      v_.push_back(Mat<S>::Zero(p.rows(), p.cols()));
    }
  }

  /// One update from the gradients currently on the parameters. Parameters
  /// with no accumulated gradient are treated as zero-gradient and left
  /// unchanged. Non-finite gradients abort with the parameter index.
  void step() {
    ++t_;
    const S c1 = S(1) - std::pow(b1_, static_cast<S>(t_));
    const S c2 = S(1) - std::pow(b2_, static_cast<S>(t_));
    for (std::size_t i = 0; i < params_.size(); ++i) {
      auto& p = params_[i];
      if (p.grad().size() == 0) continue;
      if (!p.grad().allFinite())
        throw NumericError("adam_step: non-finite gradient on parameter " +
                           std::to_string(i) + " at step " + std::to_string(t_));
      m_[i] = b1_ * m_[i] + (S(1) - b1_) * p.grad();
      v_[i] = b2_ * v_[i] +
              (S(1) - b2_) * p.grad().cwiseProduct(p.grad());
      const Mat<S> mhat = m_[i] / c1;
      const Mat<S> vhat = v_[i] / c2;
      p.value() -=
          lr_ * mhat.cwiseQuotient((vhat.cwiseSqrt().array() + eps_).matrix());
    }
  }

  void zero_grad() {
    for (auto& p : params_) p.zero_grad();
  }

  long t() const { return t_; }

 private:
  std::vector<Tensor<S>> params_;
  std::vector<Mat<S>> m_, v_;
  S lr_, b1_, b2_, eps_;
  long t_ = 0;
};

/// Single free-standing update, matching Adam::step for one parameter.
template <typename S>
void adam_step(Mat<S>& param, const Mat<S>& grad, Mat<S>& m, Mat<S>& v, S lr,
               long t, S beta1 = S(0.9), S beta2 = S(0.999), S eps = S(1e-8)) {
  if (!grad.allFinite()) throw NumericError("adam_step: non-finite gradient");
  m = beta1 * m + (S(1) - beta1) * grad;
  v = beta2 * v + (S(1) - beta2) * grad.cwiseProduct(grad);
  const S c1 = S(1) - std::pow(beta1, static_cast<S>(t));
  const S c2 = S(1) - std::pow(beta2, static_cast<S>(t));
  const Mat<S> mhat = m / c1;
  const Mat<S> vhat = v / c2;
  param -= lr * mhat.cwiseQuotient((vhat.cwiseSqrt().array() + eps).matrix());
}

}  // namespace srmfv
