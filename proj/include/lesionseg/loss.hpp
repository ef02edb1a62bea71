#pragma once

#include <cmath>

#include "lesionseg/errors.hpp"
#include "lesionseg/tensor.hpp"

namespace lesionseg {

template <typename T>
struct LossResult {
  double loss = 0.0;
  Tensor<T> grad;
};

// Mean binary cross-entropy with predictions clamped to [1e-7, 1-1e-7].
// The clamp is flat, so elements outside it carry zero gradient.
template <typename T>
LossResult<T> bce_loss(const Tensor<T>& pred, const Tensor<T>& target) {
  if (!pred.same_shape(target))
    throw DataError("bce_loss: prediction and target shapes differ");
  constexpr double kEps = 1e-7;
  const size_t m = pred.size();
  if (m == 0) throw DataError("bce_loss: empty tensors");
  LossResult<T> out;
  out.grad = Tensor<T>(pred.n, pred.c, pred.h, pred.w);
  double acc = 0.0;
  for (size_t i = 0; i < m; ++i) {
    const double raw = static_cast<double>(pred.v[i]);
    const double y = static_cast<double>(target.v[i]);
    double p = raw;
    const bool clamped = p < kEps || p > 1.0 - kEps;
    if (p < kEps) p = kEps;
    if (p > 1.0 - kEps) p = 1.0 - kEps;
    acc += -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
    out.grad.v[i] = clamped
                        ? T(0)
                        : static_cast<T>((-y / p + (1.0 - y) / (1.0 - p)) /
                                         static_cast<double>(m));
  }
  out.loss = acc / static_cast<double>(m);
  return out;
}

// Smoothed Jaccard distance over the whole batch:
//   L = 1 - (sum(p*y) + eps) / (sum(p) + sum(y) - sum(p*y) + eps)
template <typename T>
LossResult<T> soft_jaccard_loss(const Tensor<T>& pred, const Tensor<T>& target,
                                double smooth = 1.0) {
  if (!pred.same_shape(target))
    throw DataError("soft_jaccard_loss: prediction and target shapes differ");
  if (pred.size() == 0) throw DataError("soft_jaccard_loss: empty tensors");
  double sp = 0.0, sy = 0.0, spy = 0.0;
  for (size_t i = 0; i < pred.size(); ++i) {
    const double p = static_cast<double>(pred.v[i]);
    const double y = static_cast<double>(target.v[i]);
    sp += p;
    sy += y;
    spy += p * y;
  }
  const double num = spy + smooth;
  const double den = sp + sy - spy + smooth;
  LossResult<T> out;
  out.loss = 1.0 - num / den;
  out.grad = Tensor<T>(pred.n, pred.c, pred.h, pred.w);
  const double den2 = den * den;
  for (size_t i = 0; i < pred.size(); ++i) {
    const double y = static_cast<double>(target.v[i]);
    // d/dp_i of -(num/den): num' = y, den' = 1 - y
    out.grad.v[i] = static_cast<T>(-(y * den - num * (1.0 - y)) / den2);
  }
  return out;
}

} // namespace lesionseg
