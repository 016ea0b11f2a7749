#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "srmfv/tensor.hpp"

namespace srmfv {

namespace detail {
template <typename S>
std::string shape_str(const Mat<S>& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}
}  // namespace detail

template <typename S>
Tensor<S> matmul(const Tensor<S>& a, const Tensor<S>& b) {
  if (a.cols() != b.rows())
    throw ShapeError("matmul: inner dimensions differ, " +
                     detail::shape_str(a.value()) + " * " +
                     detail::shape_str(b.value()));
  auto an = a.node(), bn = b.node();
  return detail::make_op<S>(
      an->value * bn->value, "matmul", {an, bn}, [an, bn](Node<S>& n) {
        if (an->requires_grad) {
          an->ensure_grad();
          an->grad.noalias() += n.grad * bn->value.transpose();
        }
        if (bn->requires_grad) {
          bn->ensure_grad();
          bn->grad.noalias() += an->value.transpose() * n.grad;
        }
      });
}

template <typename S>
Tensor<S> transpose(const Tensor<S>& a) {
  auto an = a.node();
  return detail::make_op<S>(an->value.transpose(), "transpose", {an},
                            [an](Node<S>& n) {
                              if (!an->requires_grad) return;
                              an->ensure_grad();
                              an->grad += n.grad.transpose();
                            });
}

template <typename S>
Tensor<S> add(const Tensor<S>& a, const Tensor<S>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeError("add: shapes differ, " + detail::shape_str(a.value()) +
                     " vs " + detail::shape_str(b.value()));
  auto an = a.node(), bn = b.node();
  return detail::make_op<S>(an->value + bn->value, "add", {an, bn},
                            [an, bn](Node<S>& n) {
                              for (auto* p : {an.get(), bn.get()}) {
                                if (!p->requires_grad) continue;
                                p->ensure_grad();
                                p->grad += n.grad;
                              }
                            });
}

template <typename S>
Tensor<S> sub(const Tensor<S>& a, const Tensor<S>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeError("sub: shapes differ, " + detail::shape_str(a.value()) +
                     " vs " + detail::shape_str(b.value()));
  auto an = a.node(), bn = b.node();
  return detail::make_op<S>(an->value - bn->value, "sub", {an, bn},
                            [an, bn](Node<S>& n) {
                              if (an->requires_grad) {
                                an->ensure_grad();
                                an->grad += n.grad;
                              }
                              if (bn->requires_grad) {
                                bn->ensure_grad();
                                bn->grad -= n.grad;
                              }
                            });
}

/// Elementwise product.
template <typename S>
Tensor<S> mul(const Tensor<S>& a, const Tensor<S>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeError("mul: shapes differ, " + detail::shape_str(a.value()) +
                     " vs " + detail::shape_str(b.value()));
  auto an = a.node(), bn = b.node();
  return detail::make_op<S>(
      an->value.cwiseProduct(bn->value), "mul", {an, bn}, [an, bn](Node<S>& n) {
        if (an->requires_grad) {
          an->ensure_grad();
          an->grad += n.grad.cwiseProduct(bn->value);
        }
        if (bn->requires_grad) {
          bn->ensure_grad();
          bn->grad += n.grad.cwiseProduct(an->value);
        }
      });
}

/// Elementwise quotient.
template <typename S>
Tensor<S> div(const Tensor<S>& a, const Tensor<S>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeError("div: shapes differ, " + detail::shape_str(a.value()) +
                     " vs " + detail::shape_str(b.value()));
  auto an = a.node(), bn = b.node();
  return detail::make_op<S>(
      an->value.cwiseQuotient(bn->value), "div", {an, bn},
      [an, bn](Node<S>& n) {
        if (an->requires_grad) {
          an->ensure_grad();
          an->grad += n.grad.cwiseQuotient(bn->value);
        }
        if (bn->requires_grad) {
          bn->ensure_grad();
          bn->grad -= n.grad.cwiseProduct(an->value)
                          .cwiseQuotient(bn->value.cwiseProduct(bn->value));
        }
      });
}

template <typename S>
Tensor<S> scale(const Tensor<S>& a, S c) {
  auto an = a.node();
  return detail::make_op<S>(an->value * c, "scale", {an}, [an, c](Node<S>& n) {
    if (!an->requires_grad) return;
    an->ensure_grad();
    an->grad += n.grad * c;
  });
}

template <typename S>
Tensor<S> add_const(const Tensor<S>& a, S c) {
  auto an = a.node();
  return detail::make_op<S>((an->value.array() + c).matrix(), "add_const",
                            {an}, [an](Node<S>& n) {
                              if (!an->requires_grad) return;
                              an->ensure_grad();
                              an->grad += n.grad;
                            });
}

/// Broadcast product of a 1x1 scalar tensor with an arbitrary tensor.
template <typename S>
Tensor<S> mul_scalar(const Tensor<S>& a, const Tensor<S>& s) {
  if (s.size() != 1) throw ShapeError("mul_scalar: second argument not 1x1");
  auto an = a.node(), sn = s.node();
  return detail::make_op<S>(
      an->value * sn->value(0, 0), "mul_scalar", {an, sn}, [an, sn](Node<S>& n) {
        if (an->requires_grad) {
          an->ensure_grad();
          an->grad += n.grad * sn->value(0, 0);
        }
        if (sn->requires_grad) {
          sn->ensure_grad();
          sn->grad(0, 0) += n.grad.cwiseProduct(an->value).sum();
        }
      });
}

/// Add a 1xC row to every row of an NxC tensor.
template <typename S>
Tensor<S> add_rowwise(const Tensor<S>& a, const Tensor<S>& row) {
  if (row.rows() != 1 || row.cols() != a.cols())
    throw ShapeError("add_rowwise: expected 1x" + std::to_string(a.cols()) +
                     ", got " + detail::shape_str(row.value()));
  auto an = a.node(), rn = row.node();
  Mat<S> out = an->value;
  out.rowwise() += rn->value.row(0);
  return detail::make_op<S>(std::move(out), "add_rowwise", {an, rn},
                            [an, rn](Node<S>& n) {
                              if (an->requires_grad) {
                                an->ensure_grad();
                                an->grad += n.grad;
                              }
                              if (rn->requires_grad) {
                                rn->ensure_grad();
                                rn->grad.row(0) += n.grad.colwise().sum();
                              }
                            });
}

namespace detail {
template <typename S, typename FwdFn, typename DerivFn>
Tensor<S> unary_ew(const Tensor<S>& a, const char* name, FwdFn fwd,
                   DerivFn deriv_from_inout) {
  auto an = a.node();
  Mat<S> out = an->value.unaryExpr(fwd);
  auto out_copy = out;  // captured for derivatives expressed via the output
  return detail::make_op<S>(
      std::move(out), name, {an},
      [an, deriv_from_inout, out_copy](Node<S>& n) {
        if (!an->requires_grad) return;
        an->ensure_grad();
        for (Eigen::Index i = 0; i < n.grad.rows(); ++i)
          for (Eigen::Index j = 0; j < n.grad.cols(); ++j)
            an->grad(i, j) +=
                n.grad(i, j) * deriv_from_inout(an->value(i, j), out_copy(i, j));
      });
}
}  // namespace detail

template <typename S>
Tensor<S> relu(const Tensor<S>& a) {
  return detail::unary_ew<S>(
      a, "relu", [](S x) { return x > S(0) ? x : S(0); },
      [](S x, S) { return x > S(0) ? S(1) : S(0); });
}

/// Slope fixed at 0.2; the subgradient at 0 equals the slope.
template <typename S>
Tensor<S> leaky_relu(const Tensor<S>& a, S slope = S(0.2)) {
  return detail::unary_ew<S>(
      a, "leaky_relu", [slope](S x) { return x > S(0) ? x : slope * x; },
      [slope](S x, S) { return x > S(0) ? S(1) : slope; });
}

template <typename S>
Tensor<S> tanh_op(const Tensor<S>& a) {
  return detail::unary_ew<S>(
      a, "tanh", [](S x) { return std::tanh(x); },
      [](S, S y) { return S(1) - y * y; });
}

template <typename S>
Tensor<S> sigmoid(const Tensor<S>& a) {
  return detail::unary_ew<S>(
      a, "sigmoid",
      [](S x) {
        return x >= S(0) ? S(1) / (S(1) + std::exp(-x))
                         : std::exp(x) / (S(1) + std::exp(x));
      },
      [](S, S y) { return y * (S(1) - y); });
}

template <typename S>
Tensor<S> log_op(const Tensor<S>& a) {
  return detail::unary_ew<S>(
      a, "log", [](S x) { return std::log(x); },
      [](S x, S) { return S(1) / x; });
}

template <typename S>
Tensor<S> sqrt_op(const Tensor<S>& a) {
  return detail::unary_ew<S>(
      a, "sqrt", [](S x) { return std::sqrt(x); },
      [](S, S y) { return S(1) / (S(2) * y); });
}

enum class Activation { Tanh, Sigmoid, Relu, LeakyRelu };

template <typename S>
Tensor<S> activation(const Tensor<S>& a, Activation kind) {
  switch (kind) {
    case Activation::Tanh: return tanh_op(a);
    case Activation::Sigmoid: return sigmoid(a);
    case Activation::Relu: return relu(a);
    case Activation::LeakyRelu: return leaky_relu(a);
  }
  throw ConfigError("activation: unknown kind");
}

/// Row-wise softmax with optional boolean mask. Masked entries are exactly
/// zero in the output; a fully masked row is a domain error. Max-subtraction
/// keeps the computation stable for arbitrary finite inputs.
template <typename S>
Tensor<S> softmax_rows(const Tensor<S>& a, const BoolMat* mask = nullptr) {
  if (mask && (mask->rows() != a.rows() || mask->cols() != a.cols()))
    throw ShapeError("softmax_rows: mask shape differs from input");
  auto an = a.node();
  const Mat<S>& x = an->value;
  Mat<S> y(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    S mx = -std::numeric_limits<S>::infinity();
    for (Eigen::Index j = 0; j < x.cols(); ++j)
      if (!mask || (*mask)(i, j)) mx = std::max(mx, x(i, j));
    if (!std::isfinite(mx))
      throw NumericError("softmax_rows: fully masked row " + std::to_string(i));
    S denom = S(0);
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      if (!mask || (*mask)(i, j)) {
        y(i, j) = std::exp(x(i, j) - mx);
        denom += y(i, j);
      } else {
        y(i, j) = S(0);
      }
    }
    y.row(i) /= denom;
  }
  Mat<S> y_copy = y;
  return detail::make_op<S>(std::move(y), "softmax_rows", {an},
                            [an, y_copy](Node<S>& n) {
                              if (!an->requires_grad) return;
                              an->ensure_grad();
                              for (Eigen::Index i = 0; i < y_copy.rows(); ++i) {
                                const S dot = n.grad.row(i).dot(y_copy.row(i));
                                an->grad.row(i) +=
                                    (n.grad.row(i).array() - dot).matrix()
                                        .cwiseProduct(y_copy.row(i));
                              }
                            });
}

/// Gather rows of a table by index; gradients scatter-add back.
template <typename S>
Tensor<S> gather_rows(const Tensor<S>& table, std::vector<int> idx) {
  auto tn = table.node();
  Mat<S> out(static_cast<Eigen::Index>(idx.size()), tn->value.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0 || idx[i] >= tn->value.rows())
      throw ShapeError("gather_rows: index " + std::to_string(idx[i]) +
                       " out of range");
    out.row(static_cast<Eigen::Index>(i)) = tn->value.row(idx[i]);
  }
  return detail::make_op<S>(std::move(out), "gather_rows", {tn},
                            [tn, idx = std::move(idx)](Node<S>& n) {
                              if (!tn->requires_grad) return;
                              tn->ensure_grad();
                              for (std::size_t i = 0; i < idx.size(); ++i)
                                tn->grad.row(idx[i]) +=
                                    n.grad.row(static_cast<Eigen::Index>(i));
                            });
}

template <typename S>
Tensor<S> concat_rows(const std::vector<Tensor<S>>& parts) {
  if (parts.empty()) throw ShapeError("concat_rows: empty input");
  Eigen::Index total = 0;
  const Eigen::Index c = parts[0].cols();
  std::vector<std::shared_ptr<Node<S>>> parents;
  for (const auto& p : parts) {
    if (p.cols() != c) throw ShapeError("concat_rows: column counts differ");
    total += p.rows();
    parents.push_back(p.node());
  }
  Mat<S> out(total, c);
  Eigen::Index r = 0;
  for (const auto& p : parts) {
    out.middleRows(r, p.rows()) = p.value();
    r += p.rows();
  }
  return detail::make_op<S>(std::move(out), "concat_rows", std::move(parents),
                            [](Node<S>& n) {
                              Eigen::Index r = 0;
                              for (auto& p : n.parents) {
                                if (p->requires_grad) {
                                  p->ensure_grad();
                                  p->grad += n.grad.middleRows(r, p->value.rows());
                                }
                                r += p->value.rows();
                              }
                            });
}

template <typename S>
Tensor<S> slice_rows(const Tensor<S>& a, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count < 1 || start + count > a.rows())
    throw ShapeError("slice_rows: range out of bounds");
  auto an = a.node();
  return detail::make_op<S>(
      Mat<S>(an->value.middleRows(start, count)), "slice_rows", {an},
      [an, start, count](Node<S>& n) {
        if (!an->requires_grad) return;
        an->ensure_grad();
        an->grad.middleRows(start, count) += n.grad;
      });
}

template <typename S>
Tensor<S> concat_cols(const std::vector<Tensor<S>>& parts) {
  if (parts.empty()) throw ShapeError("concat_cols: empty input");
  Eigen::Index total = 0;
  const Eigen::Index r = parts[0].rows();
  std::vector<std::shared_ptr<Node<S>>> parents;
  for (const auto& p : parts) {
    if (p.rows() != r) throw ShapeError("concat_cols: row counts differ");
    total += p.cols();
    parents.push_back(p.node());
  }
  Mat<S> out(r, total);
  Eigen::Index c = 0;
  for (const auto& p : parts) {
    out.middleCols(c, p.cols()) = p.value();
    c += p.cols();
  }
  return detail::make_op<S>(std::move(out), "concat_cols", std::move(parents),
                            [](Node<S>& n) {
                              Eigen::Index c = 0;
                              for (auto& p : n.parents) {
                                if (p->requires_grad) {
                                  p->ensure_grad();
                                  p->grad += n.grad.middleCols(c, p->value.cols());
                                }
                                c += p->value.cols();
                              }
                            });
}

template <typename S>
Tensor<S> slice_cols(const Tensor<S>& a, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count < 1 || start + count > a.cols())
    throw ShapeError("slice_cols: range out of bounds");
  auto an = a.node();
  return detail::make_op<S>(
      Mat<S>(an->value.middleCols(start, count)), "slice_cols", {an},
      [an, start, count](Node<S>& n) {
        if (!an->requires_grad) return;
        an->ensure_grad();
        an->grad.middleCols(start, count) += n.grad;
      });
}

template <typename S>
Tensor<S> sum_all(const Tensor<S>& a) {
  auto an = a.node();
  Mat<S> out(1, 1);
  out(0, 0) = an->value.sum();
  return detail::make_op<S>(std::move(out), "sum_all", {an}, [an](Node<S>& n) {
    if (!an->requires_grad) return;
    an->ensure_grad();
    an->grad.array() += n.grad(0, 0);
  });
}

/// Mean of the rows of an NxC tensor, as a 1xC row.
template <typename S>
Tensor<S> mean_rows(const Tensor<S>& a) {
  auto an = a.node();
  const S inv = S(1) / static_cast<S>(an->value.rows());
  Mat<S> out = an->value.colwise().sum() * inv;
  return detail::make_op<S>(std::move(out), "mean_rows", {an},
                            [an, inv](Node<S>& n) {
                              if (!an->requires_grad) return;
                              an->ensure_grad();
                              an->grad.rowwise() += (n.grad.row(0) * inv);
                            });
}

/// Select a single element as a 1x1 tensor.
template <typename S>
Tensor<S> pick(const Tensor<S>& a, Eigen::Index r, Eigen::Index c) {
  if (r < 0 || r >= a.rows() || c < 0 || c >= a.cols())
    throw ShapeError("pick: index out of range");
  auto an = a.node();
  Mat<S> out(1, 1);
  out(0, 0) = an->value(r, c);
  return detail::make_op<S>(std::move(out), "pick", {an}, [an, r, c](Node<S>& n) {
    if (!an->requires_grad) return;
    an->ensure_grad();
    an->grad(r, c) += n.grad(0, 0);
  });
}

/// Per-row layer normalization with learnable gain and bias (both 1xC).
template <typename S>
Tensor<S> layernorm_rows(const Tensor<S>& a, const Tensor<S>& gain,
                         const Tensor<S>& bias, S eps = S(1e-5)) {
  if (gain.rows() != 1 || gain.cols() != a.cols() || bias.rows() != 1 ||
      bias.cols() != a.cols())
    throw ShapeError("layernorm_rows: gain/bias must be 1x" +
                     std::to_string(a.cols()));
  auto an = a.node(), gn = gain.node(), bn = bias.node();
  const Eigen::Index R = an->value.rows(), C = an->value.cols();
  Mat<S> xhat(R, C);
  std::vector<S> inv_std(static_cast<std::size_t>(R));
  for (Eigen::Index i = 0; i < R; ++i) {
    const S mu = an->value.row(i).mean();
    const S var = (an->value.row(i).array() - mu).square().mean();
    const S is = S(1) / std::sqrt(var + eps);
    inv_std[static_cast<std::size_t>(i)] = is;
    xhat.row(i) = (an->value.row(i).array() - mu).matrix() * is;
  }
  Mat<S> out(R, C);
  for (Eigen::Index i = 0; i < R; ++i)
    out.row(i) = xhat.row(i).cwiseProduct(gn->value.row(0)) + bn->value.row(0);
  return detail::make_op<S>(
      std::move(out), "layernorm_rows", {an, gn, bn},
      [an, gn, bn, xhat, inv_std](Node<S>& n) {
        const Eigen::Index R = xhat.rows(), C = xhat.cols();
        if (gn->requires_grad) {
          gn->ensure_grad();
          for (Eigen::Index i = 0; i < R; ++i)
            gn->grad.row(0) += n.grad.row(i).cwiseProduct(xhat.row(i));
        }
        if (bn->requires_grad) {
          bn->ensure_grad();
          bn->grad.row(0) += n.grad.colwise().sum();
        }
        if (an->requires_grad) {
          an->ensure_grad();
          for (Eigen::Index i = 0; i < R; ++i) {
            // d/dx of (x - mu)/sigma, composed with the gain
            Eigen::Matrix<S, 1, Eigen::Dynamic> dxhat =
                n.grad.row(i).cwiseProduct(gn->value.row(0));
            const S m1 = dxhat.mean();
            const S m2 = dxhat.cwiseProduct(xhat.row(i)).mean();
            an->grad.row(i) +=
                ((dxhat.array() - m1 - xhat.row(i).array() * m2) *
                 inv_std[static_cast<std::size_t>(i)])
                    .matrix();
          }
        }
      });
}

/// Cosine similarity between two 1xD rows, as a 1x1 tensor. Built from
/// primitive ops so gradients flow through both arguments.
template <typename S>
Tensor<S> cosine_sim(const Tensor<S>& a, const Tensor<S>& b) {
  if (a.rows() != 1 || b.rows() != 1 || a.cols() != b.cols())
    throw ShapeError("cosine_sim: expected matching 1xD rows");
  auto dot = matmul(a, transpose(b));
  auto na = sqrt_op(matmul(a, transpose(a)));
  auto nb = sqrt_op(matmul(b, transpose(b)));
  return div(dot, add_const(mul(na, nb), S(1e-12)));
}

}  // namespace srmfv
