#pragma once

#include "lesionseg/image.hpp"

namespace lesionseg {

// Jaccard index |a∩b| / |a∪b| in [0,1]. Both masks empty counts as perfect
// agreement (1.0). Throws on dimension mismatch.
double jaccard(const BinaryMask& a, const BinaryMask& b);

} // namespace lesionseg
