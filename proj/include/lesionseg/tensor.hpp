#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "lesionseg/errors.hpp"

namespace lesionseg {

// N x C x H x W dense array, N-major row-major. float in production;
// gradient checking instantiates the same code with double.
template <typename T>
struct Tensor {
  int n = 0, c = 0, h = 0, w = 0;
  std::vector<T> v;

  Tensor() = default;
  Tensor(int n_, int c_, int h_, int w_, T fill = T(0))
      : n(n_), c(c_), h(h_), w(w_),
        v(static_cast<size_t>(n_) * c_ * h_ * w_, fill) {
    if (n_ < 0 || c_ < 0 || h_ < 0 || w_ < 0)
      throw DataError("tensor: negative dimension");
  }

  size_t size() const { return v.size(); }
  size_t plane_size() const { return static_cast<size_t>(h) * w; }

  T* data() { return v.data(); }
  const T* data() const { return v.data(); }

  T* plane(int i, int j) {
    return v.data() + (static_cast<size_t>(i) * c + j) * plane_size();
  }
  const T* plane(int i, int j) const {
    return v.data() + (static_cast<size_t>(i) * c + j) * plane_size();
  }

  T& at(int i, int j, int y, int x) { return plane(i, j)[static_cast<size_t>(y) * w + x]; }
  T at(int i, int j, int y, int x) const {
    return plane(i, j)[static_cast<size_t>(y) * w + x];
  }

  bool same_shape(const Tensor& o) const {
    return n == o.n && c == o.c && h == o.h && w == o.w;
  }

  std::string shape_str() const {
    return std::to_string(n) + "x" + std::to_string(c) + "x" +
           std::to_string(h) + "x" + std::to_string(w);
  }

  void zero() { std::fill(v.begin(), v.end(), T(0)); }
};

using Tensor4 = Tensor<float>;

template <typename T>
inline bool all_finite(const Tensor<T>& t) {
  for (const T& x : t.v)
    if (!std::isfinite(static_cast<double>(x))) return false;
  return true;
}

} // namespace lesionseg
