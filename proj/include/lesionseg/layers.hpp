#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "lesionseg/errors.hpp"
#include "lesionseg/kernels.hpp"
#include "lesionseg/parallel.hpp"
#include "lesionseg/rng.hpp"
#include "lesionseg/tensor.hpp"

namespace lesionseg {

enum class Mode { train, eval };

// Trainable value + its gradient, surfaced by name for the optimizer and the
// checkpoint writer.
template <typename T>
struct ParamRef {
  std::string name;
  Tensor<T>* value;
  Tensor<T>* grad;
};

template <typename T>
struct BufferRef {
  std::string name;
  Tensor<T>* value;
};

// ---------------------------------------------------------------------------
// Conv2d: 3x3 (zero-pad 1) or 1x1, stride 1, H x W preserved.
// ---------------------------------------------------------------------------

template <typename T>
class Conv2d {
public:
  Conv2d(int in_ch, int out_ch, int ksize)
      : weight(1, out_ch, in_ch, ksize * ksize), bias(1, out_ch, 1, 1),
        wgrad(1, out_ch, in_ch, ksize * ksize), bgrad(1, out_ch, 1, 1),
        in_ch_(in_ch), out_ch_(out_ch), k_(ksize), pad_(ksize == 3 ? 1 : 0) {
    if (ksize != 1 && ksize != 3)
      throw ConfigError("conv2d: kernel must be 1x1 or 3x3");
    if (in_ch < 1 || out_ch < 1)
      throw ConfigError("conv2d: channel counts must be >= 1");
  }

  void init_he_uniform(RngState& rng) {
    const double limit = std::sqrt(6.0 / (in_ch_ * k_ * k_));
    for (auto& x : weight.v) x = static_cast<T>(rng.uniform(-limit, limit));
    bias.zero();
  }

  Tensor<T> forward(const Tensor<T>& x) {
    if (x.c != in_ch_)
      throw DataError("conv2d: input has " + std::to_string(x.c) +
                      " channels, expected " + std::to_string(in_ch_));
    x_shape_ = {x.n, x.c, x.h, x.w};
    xp_ = pad_zero(x, pad_);
    Tensor<T> y(x.n, out_ch_, x.h, x.w);
    const int H = x.h, W = x.w;
    parallel_for(static_cast<size_t>(x.n) * out_ch_, [&](size_t t) {
      const int i = static_cast<int>(t) / out_ch_;
      const int co = static_cast<int>(t) % out_ch_;
      const T* wrow = weight.plane(0, co);
      for (int y0 = 0; y0 < H; ++y0) {
        T* acc = y.plane(i, co) + static_cast<size_t>(y0) * W;
        for (int x0 = 0; x0 < W; ++x0) acc[x0] = bias.v[co];
        for (int ci = 0; ci < in_ch_; ++ci) {
          if (k_ == 3) {
            const T* base = xp_.plane(i, ci) + static_cast<size_t>(y0) * xp_.w;
            kernels::conv3x3_row(acc, base, base + xp_.w, base + 2 * xp_.w,
                                 wrow + static_cast<size_t>(ci) * 9, W);
          } else {
            kernels::axpy(acc, xp_.plane(i, ci) + static_cast<size_t>(y0) * W,
                          wrow[ci], static_cast<size_t>(W));
          }
        }
      }
    });
    return y;
  }

  Tensor<T> backward(const Tensor<T>& gout) {
    const int N = x_shape_[0], H = x_shape_[2], W = x_shape_[3];
    if (gout.n != N || gout.c != out_ch_ || gout.h != H || gout.w != W)
      throw DataError("conv2d backward: gradient shape mismatch");

    // bias: sum of gout per output channel, sequential over n then rows
    parallel_for(static_cast<size_t>(out_ch_), [&](size_t co) {
      T s = T(0);
      for (int i = 0; i < N; ++i)
        s = s + kernels::sum8(gout.plane(i, static_cast<int>(co)),
                              gout.plane_size());
      bgrad.v[co] = s;
    });

    // weights: per-tap dot products against the cached padded input
    parallel_for(static_cast<size_t>(out_ch_), [&](size_t co) {
      T* wg = wgrad.plane(0, static_cast<int>(co));
      for (int ci = 0; ci < in_ch_; ++ci) {
        for (int ky = 0; ky < k_; ++ky) {
          for (int kx = 0; kx < k_; ++kx) {
            T s = T(0);
            for (int i = 0; i < N; ++i) {
              const T* gp = gout.plane(i, static_cast<int>(co));
              const T* xp = xp_.plane(i, ci);
              for (int y0 = 0; y0 < H; ++y0) {
                s = s + kernels::dot8(gp + static_cast<size_t>(y0) * W,
                                      xp + static_cast<size_t>(y0 + ky) * xp_.w + kx,
                                      static_cast<size_t>(W));
              }
            }
            wg[(static_cast<size_t>(ci) * k_ + ky) * k_ + kx] = s;
          }
        }
      }
    });

    // input: correlation of the padded gout with flipped, transposed weights
    Tensor<T> gin(N, in_ch_, H, W);
    const Tensor<T> gp = pad_zero(gout, k_ - 1 - pad_);
    std::vector<T> wft(static_cast<size_t>(in_ch_) * out_ch_ * k_ * k_);
    for (int co = 0; co < out_ch_; ++co)
      for (int ci = 0; ci < in_ch_; ++ci)
        for (int t = 0; t < k_ * k_; ++t)
          wft[(static_cast<size_t>(ci) * out_ch_ + co) * k_ * k_ + t] =
              weight.plane(0, co)[static_cast<size_t>(ci) * k_ * k_ +
                                  (k_ * k_ - 1 - t)];
    parallel_for(static_cast<size_t>(N) * in_ch_, [&](size_t t) {
      const int i = static_cast<int>(t) / in_ch_;
      const int ci = static_cast<int>(t) % in_ch_;
      for (int y0 = 0; y0 < H; ++y0) {
        T* acc = gin.plane(i, ci) + static_cast<size_t>(y0) * W;
        for (int co = 0; co < out_ch_; ++co) {
          const T* wr = wft.data() +
                        (static_cast<size_t>(ci) * out_ch_ + co) * k_ * k_;
          if (k_ == 3) {
            const T* base = gp.plane(i, co) + static_cast<size_t>(y0) * gp.w;
            kernels::conv3x3_row(acc, base, base + gp.w, base + 2 * gp.w, wr,
                                 W);
          } else {
            kernels::axpy(acc, gp.plane(i, co) + static_cast<size_t>(y0) * W,
                          wr[0], static_cast<size_t>(W));
          }
        }
      }
    });
    return gin;
  }

  int in_channels() const { return in_ch_; }
  int out_channels() const { return out_ch_; }
  int ksize() const { return k_; }

  Tensor<T> weight, bias, wgrad, bgrad;

private:
  static Tensor<T> pad_zero(const Tensor<T>& x, int p) {
    if (p == 0) return x;
    Tensor<T> out(x.n, x.c, x.h + 2 * p, x.w + 2 * p);
    for (int i = 0; i < x.n; ++i)
      for (int j = 0; j < x.c; ++j)
        for (int y = 0; y < x.h; ++y)
          std::copy_n(x.plane(i, j) + static_cast<size_t>(y) * x.w, x.w,
                      out.plane(i, j) + static_cast<size_t>(y + p) * out.w + p);
    return out;
  }

  int in_ch_, out_ch_, k_, pad_;
  std::array<int, 4> x_shape_{};
  Tensor<T> xp_;
};

// ---------------------------------------------------------------------------
// BatchNorm2d: per-channel normalization, eps 1e-5, running-stat momentum 0.9.
// ---------------------------------------------------------------------------

template <typename T>
class BatchNorm2d {
public:
  explicit BatchNorm2d(int channels, double eps = 1e-5, double momentum = 0.9)
      : gamma(1, channels, 1, 1, T(1)), beta(1, channels, 1, 1),
        running_mean(1, channels, 1, 1), running_var(1, channels, 1, 1, T(1)),
        ggrad(1, channels, 1, 1), bgrad(1, channels, 1, 1), c_(channels),
        eps_(eps), momentum_(momentum) {}

  Tensor<T> forward(const Tensor<T>& x, Mode mode) {
    if (x.c != c_) throw DataError("batchnorm: channel mismatch");
    mode_ = mode;
    Tensor<T> y(x.n, x.c, x.h, x.w);
    if (mode == Mode::train) {
      xhat_ = Tensor<T>(x.n, x.c, x.h, x.w);
      inv_std_.assign(c_, T(0));
      const size_t plane = x.plane_size();
      const T m = static_cast<T>(static_cast<double>(x.n) * plane);
      std::vector<T> means(c_), vars(c_);
      parallel_for(static_cast<size_t>(c_), [&](size_t jc) {
        const int j = static_cast<int>(jc);
        T s = T(0), s2 = T(0);
        for (int i = 0; i < x.n; ++i) {
          T bs, bs2;
          kernels::sum_sumsq8(x.plane(i, j), plane, &bs, &bs2);
          s = s + bs;
          s2 = s2 + bs2;
        }
        const T mean = s / m;
        T var = s2 / m - mean * mean;
        if (var < T(0)) var = T(0);
        const T inv = T(1) / std::sqrt(var + static_cast<T>(eps_));
        means[j] = mean;
        vars[j] = var;
        inv_std_[j] = inv;
        for (int i = 0; i < x.n; ++i) {
          kernels::scale_shift(xhat_.plane(i, j), x.plane(i, j), inv,
                               -mean * inv, plane);
          kernels::scale_shift(y.plane(i, j), xhat_.plane(i, j), gamma.v[j],
                               beta.v[j], plane);
        }
      });
      for (int j = 0; j < c_; ++j) {
        running_mean.v[j] = static_cast<T>(momentum_) * running_mean.v[j] +
                            static_cast<T>(1.0 - momentum_) * means[j];
        running_var.v[j] = static_cast<T>(momentum_) * running_var.v[j] +
                           static_cast<T>(1.0 - momentum_) * vars[j];
      }
    } else {
      x_eval_ = x;
      const size_t plane = x.plane_size();
      parallel_for(static_cast<size_t>(c_), [&](size_t jc) {
        const int j = static_cast<int>(jc);
        const T inv =
            T(1) / std::sqrt(running_var.v[j] + static_cast<T>(eps_));
        const T a = gamma.v[j] * inv;
        const T b = beta.v[j] - a * running_mean.v[j];
        for (int i = 0; i < x.n; ++i)
          kernels::scale_shift(y.plane(i, j), x.plane(i, j), a, b, plane);
      });
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& gout) {
    Tensor<T> gin(gout.n, gout.c, gout.h, gout.w);
    const size_t plane = gout.plane_size();
    if (mode_ == Mode::train) {
      const T m = static_cast<T>(static_cast<double>(gout.n) * plane);
      parallel_for(static_cast<size_t>(c_), [&](size_t jc) {
        const int j = static_cast<int>(jc);
        T s1 = T(0), s2 = T(0);
        for (int i = 0; i < gout.n; ++i) {
          s1 = s1 + kernels::sum8(gout.plane(i, j), plane);
          s2 = s2 + kernels::dot8(gout.plane(i, j), xhat_.plane(i, j), plane);
        }
        gbeta_set(j, s1);
        ggamma_set(j, s2);
        const T c1 = s1 / m, c2 = s2 / m;
        const T gscale = gamma.v[j] * inv_std_[j];
        for (int i = 0; i < gout.n; ++i) {
          const T* g = gout.plane(i, j);
          const T* xh = xhat_.plane(i, j);
          T* gi = gin.plane(i, j);
          for (size_t p = 0; p < plane; ++p)
            gi[p] = gscale * ((g[p] - c1) - xh[p] * c2);
        }
      });
    } else {
      parallel_for(static_cast<size_t>(c_), [&](size_t jc) {
        const int j = static_cast<int>(jc);
        const T inv =
            T(1) / std::sqrt(running_var.v[j] + static_cast<T>(eps_));
        T s1 = T(0), s2 = T(0);
        for (int i = 0; i < gout.n; ++i) {
          const T* g = gout.plane(i, j);
          const T* xv = x_eval_.plane(i, j);
          for (size_t p = 0; p < plane; ++p) {
            s1 = s1 + g[p];
            s2 = s2 + g[p] * ((xv[p] - running_mean.v[j]) * inv);
          }
          kernels::scale_shift(gin.plane(i, j), g, gamma.v[j] * inv, T(0),
                               plane);
        }
        gbeta_set(j, s1);
        ggamma_set(j, s2);
      });
    }
    return gin;
  }

  int channels() const { return c_; }

  Tensor<T> gamma, beta, running_mean, running_var, ggrad, bgrad;

private:
  void ggamma_set(int j, T v) { ggrad.v[j] = v; }
  void gbeta_set(int j, T v) { bgrad.v[j] = v; }

  int c_;
  double eps_, momentum_;
  Mode mode_ = Mode::train;
  Tensor<T> xhat_, x_eval_;
  std::vector<T> inv_std_;
};

// ---------------------------------------------------------------------------
// Elementwise nonlinearities.
// ---------------------------------------------------------------------------

template <typename T>
class ReLU {
public:
  Tensor<T> forward(const Tensor<T>& x) {
    x_ = x;
    Tensor<T> y(x.n, x.c, x.h, x.w);
    kernels::relu_fwd(y.data(), x.data(), x.size());
    return y;
  }
  Tensor<T> backward(const Tensor<T>& gout) {
    Tensor<T> gin(gout.n, gout.c, gout.h, gout.w);
    kernels::relu_bwd(gin.data(), gout.data(), x_.data(), gout.size());
    return gin;
  }

private:
  Tensor<T> x_;
};

template <typename T>
class Sigmoid {
public:
  Tensor<T> forward(const Tensor<T>& x) {
    Tensor<T> y(x.n, x.c, x.h, x.w);
    for (size_t i = 0; i < x.size(); ++i)
      y.v[i] = T(1) / (T(1) + std::exp(-x.v[i]));
    y_ = y;
    return y;
  }
  Tensor<T> backward(const Tensor<T>& gout) {
    Tensor<T> gin(gout.n, gout.c, gout.h, gout.w);
    for (size_t i = 0; i < gout.size(); ++i)
      gin.v[i] = gout.v[i] * y_.v[i] * (T(1) - y_.v[i]);
    return gin;
  }

private:
  Tensor<T> y_;
};

// ---------------------------------------------------------------------------
// MaxPool2: 2x2 stride 2, ties to the first row-major maximum.
// ---------------------------------------------------------------------------

template <typename T>
class MaxPool2 {
public:
  Tensor<T> forward(const Tensor<T>& x) {
    if (x.h % 2 != 0 || x.w % 2 != 0)
      throw DataError("maxpool2: H and W must be even, got " + x.shape_str());
    in_shape_ = {x.n, x.c, x.h, x.w};
    Tensor<T> y(x.n, x.c, x.h / 2, x.w / 2);
    argmax_.assign(y.size(), 0);
    size_t oi = 0;
    for (int i = 0; i < x.n; ++i) {
      for (int j = 0; j < x.c; ++j) {
        const T* p = x.plane(i, j);
        for (int yy = 0; yy < y.h; ++yy) {
          for (int xx = 0; xx < y.w; ++xx, ++oi) {
            const size_t base = (static_cast<size_t>(2 * yy) * x.w + 2 * xx);
            size_t best = base;
            T bv = p[base];
            const size_t cand[3] = {base + 1, base + x.w, base + x.w + 1};
            for (size_t kidx = 0; kidx < 3; ++kidx)
              if (p[cand[kidx]] > bv) {
                bv = p[cand[kidx]];
                best = cand[kidx];
              }
            y.v[oi] = bv;
            argmax_[oi] =
                (static_cast<size_t>(i) * x.c + j) * x.plane_size() + best;
          }
        }
      }
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& gout) {
    Tensor<T> gin(in_shape_[0], in_shape_[1], in_shape_[2], in_shape_[3]);
    for (size_t i = 0; i < gout.size(); ++i) gin.v[argmax_[i]] = gout.v[i];
    return gin;
  }

private:
  std::array<int, 4> in_shape_{};
  std::vector<size_t> argmax_;
};

// ---------------------------------------------------------------------------
// UpsampleNearest2: 2x replication; backward sums each 2x2 fan-out.
// ---------------------------------------------------------------------------

template <typename T>
class UpsampleNearest2 {
public:
  Tensor<T> forward(const Tensor<T>& x) {
    Tensor<T> y(x.n, x.c, x.h * 2, x.w * 2);
    for (int i = 0; i < x.n; ++i)
      for (int j = 0; j < x.c; ++j) {
        const T* p = x.plane(i, j);
        T* q = y.plane(i, j);
        for (int yy = 0; yy < x.h; ++yy)
          for (int xx = 0; xx < x.w; ++xx) {
            const T v = p[static_cast<size_t>(yy) * x.w + xx];
            T* row0 = q + static_cast<size_t>(2 * yy) * y.w + 2 * xx;
            row0[0] = v;
            row0[1] = v;
            row0[y.w] = v;
            row0[y.w + 1] = v;
          }
      }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& gout) {
    Tensor<T> gin(gout.n, gout.c, gout.h / 2, gout.w / 2);
    for (int i = 0; i < gout.n; ++i)
      for (int j = 0; j < gout.c; ++j) {
        const T* g = gout.plane(i, j);
        T* q = gin.plane(i, j);
        for (int yy = 0; yy < gin.h; ++yy)
          for (int xx = 0; xx < gin.w; ++xx) {
            const T* row0 = g + static_cast<size_t>(2 * yy) * gout.w + 2 * xx;
            q[static_cast<size_t>(yy) * gin.w + xx] =
                (row0[0] + row0[1]) + (row0[gout.w] + row0[gout.w + 1]);
          }
      }
    return gin;
  }
};

// ---------------------------------------------------------------------------
// Dropout: inverted scaling in train mode, identity in eval. The mask can be
// frozen so finite-difference probes re-use the same draw.
// ---------------------------------------------------------------------------

template <typename T>
class Dropout {
public:
  explicit Dropout(double prob) : prob_(prob) {
    if (prob < 0.0 || prob >= 1.0)
      throw ConfigError("dropout: probability must be in [0,1)");
  }

  Tensor<T> forward(const Tensor<T>& x, Mode mode, RngState* rng) {
    mode_ = mode;
    if (mode == Mode::eval || prob_ == 0.0) return x;
    if (!(frozen_ && mask_.size() == x.size())) {
      if (rng == nullptr)
        throw ConfigError("dropout: train mode requires an RNG");
      mask_.resize(x.size());
      for (size_t i = 0; i < x.size(); ++i)
        mask_[i] = rng->uniform() < prob_ ? 0 : 1;
    }
    const T scale = static_cast<T>(1.0 / (1.0 - prob_));
    Tensor<T> y(x.n, x.c, x.h, x.w);
    for (size_t i = 0; i < x.size(); ++i)
      y.v[i] = mask_[i] ? x.v[i] * scale : T(0);
    return y;
  }

  Tensor<T> backward(const Tensor<T>& gout) {
    if (mode_ == Mode::eval || prob_ == 0.0) return gout;
    const T scale = static_cast<T>(1.0 / (1.0 - prob_));
    Tensor<T> gin(gout.n, gout.c, gout.h, gout.w);
    for (size_t i = 0; i < gout.size(); ++i)
      gin.v[i] = mask_[i] ? gout.v[i] * scale : T(0);
    return gin;
  }

  void freeze_mask(bool frozen) { frozen_ = frozen; }
  double prob() const { return prob_; }

private:
  double prob_;
  Mode mode_ = Mode::train;
  bool frozen_ = false;
  std::vector<uint8_t> mask_;
};

} // namespace lesionseg
