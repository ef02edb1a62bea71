#pragma once

#include <cstddef>
#include <cstdint>

namespace lesionseg::kernels {

// Hot numeric loops live here, with a scalar reference implementation and an
// AVX2 variant selected at runtime. Both paths perform the same IEEE ops per
// element in the same order (reductions use a fixed 8-lane partial-sum scheme,
// no FMA anywhere), so results are bit-identical and everything downstream
// stays deterministic regardless of the selected backend.

enum class Backend { scalar, avx2 };

Backend active_backend();
const char* backend_name();
bool avx2_supported();
// Throws ConfigError when the requested backend is unavailable on this CPU.
void set_backend(Backend b);

// ---- dispatched float32 kernels ----

// dst[i] += a * src[i]
void axpy(float* dst, const float* src, float a, size_t n);
// One output row of a 3x3 correlation: for each i,
//   acc[i] += r0[i]*w[0] + r0[i+1]*w[1] + r0[i+2]*w[2]
//           + r1[i]*w[3] + ...          + r2[i+2]*w[8]
// accumulated strictly in w order. r0..r2 must have n+2 readable elements.
void conv3x3_row(float* acc, const float* r0, const float* r1, const float* r2,
                 const float* w, size_t n);
// Dot product with 8 fixed partial lanes combined pairwise, then a sequential
// tail. The lane order is part of the contract.
float dot8(const float* a, const float* b, size_t n);
float sum8(const float* x, size_t n);
void sum_sumsq8(const float* x, size_t n, float* sum_out, float* sumsq_out);
void relu_fwd(float* dst, const float* src, size_t n);
// dst[i] = x[i] > 0 ? gout[i] : 0
void relu_bwd(float* dst, const float* gout, const float* x, size_t n);
// dst[i] = a * src[i] + b
void scale_shift(float* dst, const float* src, float a, float b, size_t n);
// v[i] = momentum*v[i] - lr*(g[i] + weight_decay*w[i]); w[i] += v[i]
void sgd_update(float* w, float* v, const float* g, float lr, float momentum,
                float weight_decay, size_t n);
// Intersection/union pixel counts over 0/1 byte masks.
void mask_counts(const uint8_t* a, const uint8_t* b, size_t n, uint64_t* inter,
                 uint64_t* uni);

// ---- scalar reference (also the generic path for double shadow tensors) ----

namespace ref {

template <typename T>
inline void axpy(T* dst, const T* src, T a, size_t n) {
  for (size_t i = 0; i < n; ++i) dst[i] = dst[i] + a * src[i];
}

template <typename T>
inline void conv3x3_row(T* acc, const T* r0, const T* r1, const T* r2,
                        const T* w, size_t n) {
  for (size_t i = 0; i < n; ++i) {
    T s = acc[i];
    s = s + r0[i] * w[0];
    s = s + r0[i + 1] * w[1];
    s = s + r0[i + 2] * w[2];
    s = s + r1[i] * w[3];
    s = s + r1[i + 1] * w[4];
    s = s + r1[i + 2] * w[5];
    s = s + r2[i] * w[6];
    s = s + r2[i + 1] * w[7];
    s = s + r2[i + 2] * w[8];
    acc[i] = s;
  }
}

template <typename T>
inline T combine8(const T lane[8]) {
  return ((lane[0] + lane[1]) + (lane[2] + lane[3])) +
         ((lane[4] + lane[5]) + (lane[6] + lane[7]));
}

template <typename T>
inline T dot8(const T* a, const T* b, size_t n) {
  T lane[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  size_t i = 0;
  for (; i + 8 <= n; i += 8)
    for (size_t j = 0; j < 8; ++j) lane[j] = lane[j] + a[i + j] * b[i + j];
  T s = combine8(lane);
  for (; i < n; ++i) s = s + a[i] * b[i];
  return s;
}

template <typename T>
inline T sum8(const T* x, size_t n) {
  T lane[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  size_t i = 0;
  for (; i + 8 <= n; i += 8)
    for (size_t j = 0; j < 8; ++j) lane[j] = lane[j] + x[i + j];
  T s = combine8(lane);
  for (; i < n; ++i) s = s + x[i];
  return s;
}

template <typename T>
inline void sum_sumsq8(const T* x, size_t n, T* sum_out, T* sumsq_out) {
  T lane[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  T lane2[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    for (size_t j = 0; j < 8; ++j) {
      lane[j] = lane[j] + x[i + j];
      lane2[j] = lane2[j] + x[i + j] * x[i + j];
    }
  }
  T s = combine8(lane);
  T s2 = combine8(lane2);
  for (; i < n; ++i) {
    s = s + x[i];
    s2 = s2 + x[i] * x[i];
  }
  *sum_out = s;
  *sumsq_out = s2;
}

template <typename T>
inline void relu_fwd(T* dst, const T* src, size_t n) {
  for (size_t i = 0; i < n; ++i) dst[i] = src[i] > T(0) ? src[i] : T(0);
}

template <typename T>
inline void relu_bwd(T* dst, const T* gout, const T* x, size_t n) {
  for (size_t i = 0; i < n; ++i) dst[i] = x[i] > T(0) ? gout[i] : T(0);
}

template <typename T>
inline void scale_shift(T* dst, const T* src, T a, T b, size_t n) {
  for (size_t i = 0; i < n; ++i) dst[i] = a * src[i] + b;
}

template <typename T>
inline void sgd_update(T* w, T* v, const T* g, T lr, T momentum,
                       T weight_decay, size_t n) {
  for (size_t i = 0; i < n; ++i) {
    const T adj = g[i] + weight_decay * w[i];
    v[i] = momentum * v[i] - lr * adj;
    w[i] = w[i] + v[i];
  }
}

inline void mask_counts(const uint8_t* a, const uint8_t* b, size_t n,
                        uint64_t* inter, uint64_t* uni) {
  uint64_t in = 0, un = 0;
  for (size_t i = 0; i < n; ++i) {
    in += static_cast<uint64_t>(a[i] & b[i]);
    un += static_cast<uint64_t>(a[i] | b[i]);
  }
  *inter = in;
  *uni = un;
}

} // namespace ref

// Generic overloads: non-float scalar types (the double shadow path used by
// gradient checking) always take the reference implementation.

template <typename T>
inline void axpy(T* dst, const T* src, T a, size_t n) {
  ref::axpy(dst, src, a, n);
}
template <typename T>
inline void conv3x3_row(T* acc, const T* r0, const T* r1, const T* r2,
                        const T* w, size_t n) {
  ref::conv3x3_row(acc, r0, r1, r2, w, n);
}
template <typename T>
inline T dot8(const T* a, const T* b, size_t n) {
  return ref::dot8(a, b, n);
}
template <typename T>
inline T sum8(const T* x, size_t n) {
  return ref::sum8(x, n);
}
template <typename T>
inline void sum_sumsq8(const T* x, size_t n, T* sum_out, T* sumsq_out) {
  ref::sum_sumsq8(x, n, sum_out, sumsq_out);
}
template <typename T>
inline void relu_fwd(T* dst, const T* src, size_t n) {
  ref::relu_fwd(dst, src, n);
}
template <typename T>
inline void relu_bwd(T* dst, const T* gout, const T* x, size_t n) {
  ref::relu_bwd(dst, gout, x, n);
}
template <typename T>
inline void scale_shift(T* dst, const T* src, T a, T b, size_t n) {
  ref::scale_shift(dst, src, a, b, n);
}
template <typename T>
inline void sgd_update(T* w, T* v, const T* g, T lr, T momentum,
                       T weight_decay, size_t n) {
  ref::sgd_update(w, v, g, lr, momentum, weight_decay, n);
}

} // namespace lesionseg::kernels
