#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace lesionseg {

struct GradcheckResult {
  std::string layer;
  double max_rel_err = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

// Central finite differences against every analytic backward pass, computed
// on double-precision shadow tensors. `perturb` is the negative control: it
// injects an offset into each layer's analytic gradient so every row must
// fail.
std::vector<GradcheckResult> run_gradcheck(uint64_t seed, bool perturb = false);

bool gradcheck_all_passed(const std::vector<GradcheckResult>& results);

} // namespace lesionseg
