// AVX2 kernel variants. Compiled with -mavx2 in this TU only; selection
// happens at runtime in kernels_dispatch.cpp. Every loop mirrors the scalar
// reference op-for-op (mul then add, no FMA, same lane assignment), so the
// two backends agree bitwise. Tails reuse the reference code.

#if defined(__AVX2__)

#include <immintrin.h>

#include "kernels_impl.hpp"
#include "lesionseg/kernels.hpp"

namespace lesionseg::kernels::avx2 {

void axpy(float* dst, const float* src, float a, size_t n) {
  const __m256 av = _mm256_set1_ps(a);
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 d = _mm256_loadu_ps(dst + i);
    const __m256 s = _mm256_loadu_ps(src + i);
    _mm256_storeu_ps(dst + i, _mm256_add_ps(d, _mm256_mul_ps(av, s)));
  }
  // scalar reference computes dst + a*src in the same order
  for (; i < n; ++i) dst[i] = dst[i] + a * src[i];
}

void conv3x3_row(float* acc, const float* r0, const float* r1, const float* r2,
                 const float* w, size_t n) {
  const __m256 w0 = _mm256_set1_ps(w[0]), w1 = _mm256_set1_ps(w[1]),
               w2 = _mm256_set1_ps(w[2]), w3 = _mm256_set1_ps(w[3]),
               w4 = _mm256_set1_ps(w[4]), w5 = _mm256_set1_ps(w[5]),
               w6 = _mm256_set1_ps(w[6]), w7 = _mm256_set1_ps(w[7]),
               w8 = _mm256_set1_ps(w[8]);
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 s = _mm256_loadu_ps(acc + i);
    s = _mm256_add_ps(s, _mm256_mul_ps(_mm256_loadu_ps(r0 + i), w0));
    s = _mm256_add_ps(s, _mm256_mul_ps(_mm256_loadu_ps(r0 + i + 1), w1));
    s = _mm256_add_ps(s, _mm256_mul_ps(_mm256_loadu_ps(r0 + i + 2), w2));
    s = _mm256_add_ps(s, _mm256_mul_ps(_mm256_loadu_ps(r1 + i), w3));
    s = _mm256_add_ps(s, _mm256_mul_ps(_mm256_loadu_ps(r1 + i + 1), w4));
    s = _mm256_add_ps(s, _mm256_mul_ps(_mm256_loadu_ps(r1 + i + 2), w5));
    s = _mm256_add_ps(s, _mm256_mul_ps(_mm256_loadu_ps(r2 + i), w6));
    s = _mm256_add_ps(s, _mm256_mul_ps(_mm256_loadu_ps(r2 + i + 1), w7));
    s = _mm256_add_ps(s, _mm256_mul_ps(_mm256_loadu_ps(r2 + i + 2), w8));
    _mm256_storeu_ps(acc + i, s);
  }
  if (i < n) ref::conv3x3_row(acc + i, r0 + i, r1 + i, r2 + i, w, n - i);
}

float dot8(const float* a, const float* b, size_t n) {
  __m256 lanes = _mm256_setzero_ps();
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    lanes = _mm256_add_ps(
        lanes, _mm256_mul_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
  }
  float lane[8];
  _mm256_storeu_ps(lane, lanes);
  float s = ref::combine8(lane);
  for (; i < n; ++i) s = s + a[i] * b[i];
  return s;
}

float sum8(const float* x, size_t n) {
  __m256 lanes = _mm256_setzero_ps();
  size_t i = 0;
  for (; i + 8 <= n; i += 8)
    lanes = _mm256_add_ps(lanes, _mm256_loadu_ps(x + i));
  float lane[8];
  _mm256_storeu_ps(lane, lanes);
  float s = ref::combine8(lane);
  for (; i < n; ++i) s = s + x[i];
  return s;
}

void sum_sumsq8(const float* x, size_t n, float* sum_out, float* sumsq_out) {
  __m256 lanes = _mm256_setzero_ps();
  __m256 lanes2 = _mm256_setzero_ps();
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 v = _mm256_loadu_ps(x + i);
    lanes = _mm256_add_ps(lanes, v);
    lanes2 = _mm256_add_ps(lanes2, _mm256_mul_ps(v, v));
  }
  float lane[8], lane2[8];
  _mm256_storeu_ps(lane, lanes);
  _mm256_storeu_ps(lane2, lanes2);
  float s = ref::combine8(lane);
  float s2 = ref::combine8(lane2);
  for (; i < n; ++i) {
    s = s + x[i];
    s2 = s2 + x[i] * x[i];
  }
  *sum_out = s;
  *sumsq_out = s2;
}

void relu_fwd(float* dst, const float* src, size_t n) {
  const __m256 zero = _mm256_setzero_ps();
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 v = _mm256_loadu_ps(src + i);
    // (v > 0 ? v : +0), matching the scalar select exactly (incl. -0 and NaN)
    const __m256 mask = _mm256_cmp_ps(v, zero, _CMP_GT_OQ);
    _mm256_storeu_ps(dst + i, _mm256_and_ps(v, mask));
  }
  for (; i < n; ++i) dst[i] = src[i] > 0.0f ? src[i] : 0.0f;
}

void relu_bwd(float* dst, const float* gout, const float* x, size_t n) {
  const __m256 zero = _mm256_setzero_ps();
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 g = _mm256_loadu_ps(gout + i);
    const __m256 v = _mm256_loadu_ps(x + i);
    const __m256 mask = _mm256_cmp_ps(v, zero, _CMP_GT_OQ);
    _mm256_storeu_ps(dst + i, _mm256_and_ps(g, mask));
  }
  for (; i < n; ++i) dst[i] = x[i] > 0.0f ? gout[i] : 0.0f;
}

void scale_shift(float* dst, const float* src, float a, float b, size_t n) {
  const __m256 av = _mm256_set1_ps(a);
  const __m256 bv = _mm256_set1_ps(b);
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 s = _mm256_loadu_ps(src + i);
    _mm256_storeu_ps(dst + i, _mm256_add_ps(_mm256_mul_ps(av, s), bv));
  }
  for (; i < n; ++i) dst[i] = a * src[i] + b;
}

void sgd_update(float* w, float* v, const float* g, float lr, float momentum,
                float weight_decay, size_t n) {
  const __m256 lrv = _mm256_set1_ps(lr);
  const __m256 mv = _mm256_set1_ps(momentum);
  const __m256 wdv = _mm256_set1_ps(weight_decay);
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 wv = _mm256_loadu_ps(w + i);
    const __m256 gv = _mm256_loadu_ps(g + i);
    const __m256 vv = _mm256_loadu_ps(v + i);
    const __m256 adj = _mm256_add_ps(gv, _mm256_mul_ps(wdv, wv));
    const __m256 vnew =
        _mm256_sub_ps(_mm256_mul_ps(mv, vv), _mm256_mul_ps(lrv, adj));
    _mm256_storeu_ps(v + i, vnew);
    _mm256_storeu_ps(w + i, _mm256_add_ps(wv, vnew));
  }
  if (i < n) ref::sgd_update(w + i, v + i, g + i, lr, momentum, weight_decay, n - i);
}

void mask_counts(const uint8_t* a, const uint8_t* b, size_t n, uint64_t* inter,
                 uint64_t* uni) {
  const __m256i zero = _mm256_setzero_si256();
  __m256i acc_in = zero, acc_un = zero;
  size_t i = 0;
  for (; i + 32 <= n; i += 32) {
    const __m256i va =
        _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
    const __m256i vb =
        _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
    // bytes are 0/1, so an 8-byte SAD against zero sums them exactly
    acc_in = _mm256_add_epi64(acc_in,
                              _mm256_sad_epu8(_mm256_and_si256(va, vb), zero));
    acc_un = _mm256_add_epi64(acc_un,
                              _mm256_sad_epu8(_mm256_or_si256(va, vb), zero));
  }
  alignas(32) uint64_t lanes[4];
  _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), acc_in);
  uint64_t in = lanes[0] + lanes[1] + lanes[2] + lanes[3];
  _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), acc_un);
  uint64_t un = lanes[0] + lanes[1] + lanes[2] + lanes[3];
  for (; i < n; ++i) {
    in += static_cast<uint64_t>(a[i] & b[i]);
    un += static_cast<uint64_t>(a[i] | b[i]);
  }
  *inter = in;
  *uni = un;
}

} // namespace lesionseg::kernels::avx2

#endif // __AVX2__
