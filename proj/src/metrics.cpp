#include "lesionseg/metrics.hpp"

#include "lesionseg/errors.hpp"
#include "lesionseg/kernels.hpp"

namespace lesionseg {

double jaccard(const BinaryMask& a, const BinaryMask& b) {
  if (a.width != b.width || a.height != b.height)
    throw DataError("jaccard: mask dimensions differ");
  uint64_t inter = 0, uni = 0;
  kernels::mask_counts(a.bits.data(), b.bits.data(), a.bits.size(), &inter,
                       &uni);
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

} // namespace lesionseg
