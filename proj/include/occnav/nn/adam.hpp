#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "occnav/nn/tensor.hpp"

namespace occnav::nn {

struct AdamConfig {
  double lr = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <typename T>
struct AdamState {
  AdamConfig cfg;
  std::vector<Tensor<T>> m;
  std::vector<Tensor<T>> v;
  std::int64_t step = 0;
};

template <typename T>
AdamState<T> make_adam(const std::vector<Tensor<T>*>& params, const AdamConfig& cfg) {
  AdamState<T> s;
  s.cfg = cfg;
  for (const auto* p : params) {
    s.m.emplace_back(p->shape);
    s.v.emplace_back(p->shape);
  }
  return s;
}

/// Bias-corrected adaptive-moment update, applied in place.
template <typename T>
void adam_step(const std::vector<Tensor<T>*>& params, const std::vector<const Tensor<T>*>& grads,
               AdamState<T>& state) {
  if (params.size() != grads.size() || params.size() != state.m.size())
    throw Error(ErrorKind::data_format, "adam_step: parameter/gradient/state counts differ");
  for (std::size_t k = 0; k < params.size(); ++k) {
    require_same_shape(*params[k], *grads[k], "adam_step");
    require_same_shape(*params[k], state.m[k], "adam_step state");
  }
  ++state.step;
  const auto& c = state.cfg;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& p = params[k]->data;
    const auto& g = grads[k]->data;
    auto& m = state.m[k].data;
    auto& v = state.v[k].data;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double gi = g[i];
      const double mi = c.beta1 * m[i] + (1.0 - c.beta1) * gi;
      const double vi = c.beta2 * v[i] + (1.0 - c.beta2) * gi * gi;
      m[i] = static_cast<T>(mi);
      v[i] = static_cast<T>(vi);
      p[i] = static_cast<T>(p[i] - c.lr * (mi / bc1) / (std::sqrt(vi / bc2) + c.epsilon));
    }
  }
}

}  // namespace occnav::nn
