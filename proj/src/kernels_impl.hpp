#pragma once

#include <cstddef>
#include <cstdint>

// AVX2 variants (compiled in their own -mavx2 translation unit). Only the
// dispatcher looks at this header.

namespace lesionseg::kernels::avx2 {

void axpy(float* dst, const float* src, float a, size_t n);
void conv3x3_row(float* acc, const float* r0, const float* r1, const float* r2,
                 const float* w, size_t n);
float dot8(const float* a, const float* b, size_t n);
float sum8(const float* x, size_t n);
void sum_sumsq8(const float* x, size_t n, float* sum_out, float* sumsq_out);
void relu_fwd(float* dst, const float* src, size_t n);
void relu_bwd(float* dst, const float* gout, const float* x, size_t n);
void scale_shift(float* dst, const float* src, float a, float b, size_t n);
void sgd_update(float* w, float* v, const float* g, float lr, float momentum,
                float weight_decay, size_t n);
void mask_counts(const uint8_t* a, const uint8_t* b, size_t n, uint64_t* inter,
                 uint64_t* uni);

} // namespace lesionseg::kernels::avx2
