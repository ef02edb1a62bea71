#pragma once

#include <vector>

#include "lesionseg/errors.hpp"
#include "lesionseg/kernels.hpp"
#include "lesionseg/layers.hpp"

namespace lesionseg {

// v <- momentum*v - lr*(g + weight_decay*w);  w <- w + v
template <typename T>
inline void sgd_step(T* w, T* v, const T* g, size_t n, double lr,
                     double momentum, double weight_decay) {
  kernels::sgd_update(w, v, g, static_cast<T>(lr), static_cast<T>(momentum),
                      static_cast<T>(weight_decay), n);
}

template <typename T>
class SgdOptimizer {
public:
  SgdOptimizer(double lr, double momentum, double weight_decay)
      : lr_(lr), momentum_(momentum), weight_decay_(weight_decay) {
    if (lr <= 0.0) throw ConfigError("sgd: learning rate must be > 0");
  }

  void step(const std::vector<ParamRef<T>>& params) {
    if (velocity_.empty()) {
      velocity_.resize(params.size());
      for (size_t i = 0; i < params.size(); ++i)
        velocity_[i].assign(params[i].value->size(), T(0));
    }
    if (velocity_.size() != params.size())
      throw DataError("sgd: parameter list changed between steps");
    for (size_t i = 0; i < params.size(); ++i) {
      auto& p = params[i];
      if (p.value->size() != p.grad->size() ||
          p.value->size() != velocity_[i].size())
        throw DataError("sgd: shape mismatch for parameter " + p.name);
      sgd_step(p.value->data(), velocity_[i].data(), p.grad->data(),
               p.value->size(), lr_, momentum_, weight_decay_);
    }
  }

private:
  double lr_, momentum_, weight_decay_;
  std::vector<std::vector<T>> velocity_;
};

} // namespace lesionseg
