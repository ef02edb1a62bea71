#include "lesionseg/kernels.hpp"

#include <cstdlib>
#include <cstring>

#include "kernels_impl.hpp"
#include "lesionseg/errors.hpp"

namespace lesionseg::kernels {

namespace {

struct Table {
  Backend backend;
  void (*axpy)(float*, const float*, float, size_t);
  void (*conv3x3_row)(float*, const float*, const float*, const float*,
                      const float*, size_t);
  float (*dot8)(const float*, const float*, size_t);
  float (*sum8)(const float*, size_t);
  void (*sum_sumsq8)(const float*, size_t, float*, float*);
  void (*relu_fwd)(float*, const float*, size_t);
  void (*relu_bwd)(float*, const float*, const float*, size_t);
  void (*scale_shift)(float*, const float*, float, float, size_t);
  void (*sgd_update)(float*, float*, const float*, float, float, float,
                     size_t);
  void (*mask_counts)(const uint8_t*, const uint8_t*, size_t, uint64_t*,
                      uint64_t*);
};

void scalar_axpy(float* d, const float* s, float a, size_t n) {
  ref::axpy(d, s, a, n);
}
void scalar_conv3x3_row(float* acc, const float* r0, const float* r1,
                        const float* r2, const float* w, size_t n) {
  ref::conv3x3_row(acc, r0, r1, r2, w, n);
}
float scalar_dot8(const float* a, const float* b, size_t n) {
  return ref::dot8(a, b, n);
}
float scalar_sum8(const float* x, size_t n) { return ref::sum8(x, n); }
void scalar_sum_sumsq8(const float* x, size_t n, float* s, float* s2) {
  ref::sum_sumsq8(x, n, s, s2);
}
void scalar_relu_fwd(float* d, const float* s, size_t n) {
  ref::relu_fwd(d, s, n);
}
void scalar_relu_bwd(float* d, const float* g, const float* x, size_t n) {
  ref::relu_bwd(d, g, x, n);
}
void scalar_scale_shift(float* d, const float* s, float a, float b, size_t n) {
  ref::scale_shift(d, s, a, b, n);
}
void scalar_sgd_update(float* w, float* v, const float* g, float lr, float m,
                       float wd, size_t n) {
  ref::sgd_update(w, v, g, lr, m, wd, n);
}

constexpr Table kScalarTable = {
    Backend::scalar,    scalar_axpy,     scalar_conv3x3_row,
    scalar_dot8,        scalar_sum8,     scalar_sum_sumsq8,
    scalar_relu_fwd,    scalar_relu_bwd, scalar_scale_shift,
    scalar_sgd_update,  ref::mask_counts};

#if defined(__x86_64__) || defined(__i386__)
constexpr bool kHaveAvx2Build = true;
constexpr Table kAvx2Table = {
    Backend::avx2,     avx2::axpy,     avx2::conv3x3_row,
    avx2::dot8,        avx2::sum8,     avx2::sum_sumsq8,
    avx2::relu_fwd,    avx2::relu_bwd, avx2::scale_shift,
    avx2::sgd_update,  avx2::mask_counts};
#else
constexpr bool kHaveAvx2Build = false;
constexpr Table kAvx2Table = kScalarTable;
#endif

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") != 0;
#else
  return false;
#endif
}

const Table* select_initial() {
  if (const char* env = std::getenv("LESIONSEG_BACKEND")) {
    if (std::strcmp(env, "scalar") == 0) return &kScalarTable;
    if (std::strcmp(env, "avx2") == 0 && kHaveAvx2Build && cpu_has_avx2())
      return &kAvx2Table;
  }
  return (kHaveAvx2Build && cpu_has_avx2()) ? &kAvx2Table : &kScalarTable;
}

const Table*& table() {
  static const Table* t = select_initial();
  return t;
}

} // namespace

Backend active_backend() { return table()->backend; }

const char* backend_name() {
  return table()->backend == Backend::avx2 ? "avx2" : "scalar";
}

bool avx2_supported() { return kHaveAvx2Build && cpu_has_avx2(); }

void set_backend(Backend b) {
  if (b == Backend::avx2) {
    if (!avx2_supported())
      throw ConfigError("kernel backend 'avx2' not supported on this CPU");
    table() = &kAvx2Table;
  } else {
    table() = &kScalarTable;
  }
}

void axpy(float* dst, const float* src, float a, size_t n) {
  table()->axpy(dst, src, a, n);
}
void conv3x3_row(float* acc, const float* r0, const float* r1, const float* r2,
                 const float* w, size_t n) {
  table()->conv3x3_row(acc, r0, r1, r2, w, n);
}
float dot8(const float* a, const float* b, size_t n) {
  return table()->dot8(a, b, n);
}
float sum8(const float* x, size_t n) { return table()->sum8(x, n); }
void sum_sumsq8(const float* x, size_t n, float* sum_out, float* sumsq_out) {
  table()->sum_sumsq8(x, n, sum_out, sumsq_out);
}
void relu_fwd(float* dst, const float* src, size_t n) {
  table()->relu_fwd(dst, src, n);
}
void relu_bwd(float* dst, const float* gout, const float* x, size_t n) {
  table()->relu_bwd(dst, gout, x, n);
}
void scale_shift(float* dst, const float* src, float a, float b, size_t n) {
  table()->scale_shift(dst, src, a, b, n);
}
void sgd_update(float* w, float* v, const float* g, float lr, float momentum,
                float weight_decay, size_t n) {
  table()->sgd_update(w, v, g, lr, momentum, weight_decay, n);
}
void mask_counts(const uint8_t* a, const uint8_t* b, size_t n, uint64_t* inter,
                 uint64_t* uni) {
  table()->mask_counts(a, b, n, inter, uni);
}

} // namespace lesionseg::kernels
