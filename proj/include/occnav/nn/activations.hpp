#pragma once

#include <cmath>

#include "occnav/nn/tensor.hpp"

namespace occnav::nn {

inline constexpr double kLeakySlope = 0.2;

template <typename T, typename F>
Tensor<T> map(const Tensor<T>& x, F f) {
  Tensor<T> y(x.shape);
  for (std::size_t i = 0; i < x.size(); ++i) y.data[i] = f(x.data[i]);
  return y;
}

// Backward passes take the forward input (relu, leaky_relu) or the forward
// output (sigmoid, tanh), whichever the derivative is cheapest in.

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
  return map(x, [](T v) { return v > T(0) ? v : T(0); });
}

template <typename T>
Tensor<T> relu_backward(const Tensor<T>& x, const Tensor<T>& grad) {
  require_same_shape(x, grad, "relu_backward");
  Tensor<T> g(x.shape);
  for (std::size_t i = 0; i < x.size(); ++i) g.data[i] = x.data[i] > T(0) ? grad.data[i] : T(0);
  return g;
}

template <typename T>
Tensor<T> leaky_relu(const Tensor<T>& x, double slope = kLeakySlope) {
  return map(x, [s = static_cast<T>(slope)](T v) { return v > T(0) ? v : s * v; });
}

template <typename T>
Tensor<T> leaky_relu_backward(const Tensor<T>& x, const Tensor<T>& grad, double slope = kLeakySlope) {
  require_same_shape(x, grad, "leaky_relu_backward");
  const T s = static_cast<T>(slope);
  Tensor<T> g(x.shape);
  for (std::size_t i = 0; i < x.size(); ++i) g.data[i] = x.data[i] > T(0) ? grad.data[i] : s * grad.data[i];
  return g;
}

template <typename T>
T sigmoid(T v) {
  return v >= T(0) ? T(1) / (T(1) + std::exp(-v)) : std::exp(v) / (T(1) + std::exp(v));
}

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& x) {
  return map(x, [](T v) { return sigmoid(v); });
}

template <typename T>
Tensor<T> sigmoid_backward(const Tensor<T>& y, const Tensor<T>& grad) {
  require_same_shape(y, grad, "sigmoid_backward");
  Tensor<T> g(y.shape);
  for (std::size_t i = 0; i < y.size(); ++i) g.data[i] = grad.data[i] * y.data[i] * (T(1) - y.data[i]);
  return g;
}

template <typename T>
Tensor<T> tanh(const Tensor<T>& x) {
  return map(x, [](T v) { return std::tanh(v); });
}

template <typename T>
Tensor<T> tanh_backward(const Tensor<T>& y, const Tensor<T>& grad) {
  require_same_shape(y, grad, "tanh_backward");
  Tensor<T> g(y.shape);
  for (std::size_t i = 0; i < y.size(); ++i) g.data[i] = grad.data[i] * (T(1) - y.data[i] * y.data[i]);
  return g;
}

}  // namespace occnav::nn
