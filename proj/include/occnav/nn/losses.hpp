#pragma once

#include <algorithm>
#include <cmath>

#include "occnav/nn/tensor.hpp"

namespace occnav::nn {

/// Probabilities entering a log are clamped to [eps, 1 - eps]; the gradient
/// is zero where the clamp is active.
inline constexpr double kProbEps = 1e-7;

template <typename T>
struct LossResult {
  T value = 0;
  Tensor<T> grad;  // d value / d pred
};

template <typename T>
struct PairLossResult {
  T value = 0;
  Tensor<T> grad_a;
  Tensor<T> grad_b;
};

namespace detail {
inline double clamp_prob(double p) { return std::clamp(p, kProbEps, 1.0 - kProbEps); }
inline bool clamp_active(double p) { return p < kProbEps || p > 1.0 - kProbEps; }
}  // namespace detail

template <typename T>
LossResult<T> bce(const Tensor<T>& pred, const Tensor<T>& target) {
  require_same_shape(pred, target, "bce");
  LossResult<T> r{0, Tensor<T>(pred.shape)};
  const double inv_n = 1.0 / static_cast<double>(pred.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double p = detail::clamp_prob(pred.data[i]), t = target.data[i];
    acc -= t * std::log(p) + (1.0 - t) * std::log(1.0 - p);
    r.grad.data[i] = detail::clamp_active(pred.data[i]) ? T(0) : static_cast<T>((p - t) / (p * (1.0 - p)) * inv_n);
  }
  r.value = static_cast<T>(acc * inv_n);
  return r;
}

template <typename T>
LossResult<T> mse(const Tensor<T>& pred, const Tensor<T>& target) {
  require_same_shape(pred, target, "mse");
  LossResult<T> r{0, Tensor<T>(pred.shape)};
  const double inv_n = 1.0 / static_cast<double>(pred.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = static_cast<double>(pred.data[i]) - target.data[i];
    acc += d * d;
    r.grad.data[i] = static_cast<T>(2.0 * d * inv_n);
  }
  r.value = static_cast<T>(acc * inv_n);
  return r;
}

/// Mean absolute error; subgradient 0 where pred == target.
template <typename T>
LossResult<T> l1(const Tensor<T>& pred, const Tensor<T>& target) {
  require_same_shape(pred, target, "l1");
  LossResult<T> r{0, Tensor<T>(pred.shape)};
  const double inv_n = 1.0 / static_cast<double>(pred.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = static_cast<double>(pred.data[i]) - target.data[i];
    acc += std::fabs(d);
    r.grad.data[i] = static_cast<T>((d > 0 ? 1.0 : d < 0 ? -1.0 : 0.0) * inv_n);
  }
  r.value = static_cast<T>(acc * inv_n);
  return r;
}

/// -mean[ln D(real)] - mean[ln(1 - D(fake))]
template <typename T>
PairLossResult<T> gan_d_loss(const Tensor<T>& d_real, const Tensor<T>& d_fake) {
  require_same_shape(d_real, d_fake, "gan_d_loss");
  PairLossResult<T> r{0, Tensor<T>(d_real.shape), Tensor<T>(d_fake.shape)};
  const double inv_n = 1.0 / static_cast<double>(d_real.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < d_real.size(); ++i) {
    const double pr = detail::clamp_prob(d_real.data[i]), pf = detail::clamp_prob(d_fake.data[i]);
    acc -= std::log(pr) + std::log(1.0 - pf);
    r.grad_a.data[i] = detail::clamp_active(d_real.data[i]) ? T(0) : static_cast<T>(-inv_n / pr);
    r.grad_b.data[i] = detail::clamp_active(d_fake.data[i]) ? T(0) : static_cast<T>(inv_n / (1.0 - pf));
  }
  r.value = static_cast<T>(acc * inv_n);
  return r;
}

/// Non-saturating generator loss, -mean[ln D(fake)].
template <typename T>
LossResult<T> gan_g_loss(const Tensor<T>& d_fake) {
  LossResult<T> r{0, Tensor<T>(d_fake.shape)};
  const double inv_n = 1.0 / static_cast<double>(d_fake.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < d_fake.size(); ++i) {
    const double pf = detail::clamp_prob(d_fake.data[i]);
    acc -= std::log(pf);
    r.grad.data[i] = detail::clamp_active(d_fake.data[i]) ? T(0) : static_cast<T>(-inv_n / pf);
  }
  r.value = static_cast<T>(acc * inv_n);
  return r;
}

}  // namespace occnav::nn
