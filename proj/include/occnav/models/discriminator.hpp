#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "occnav/nn/activations.hpp"
#include "occnav/nn/concat.hpp"
#include "occnav/nn/conv.hpp"

namespace occnav::models {

using nn::ConvParams;
using nn::Tensor;

/// Patch classifier over (condition, candidate) pairs: three stride-2 conv
/// blocks with leaky ReLU, then one conv to a sigmoid score map of size
/// H/16 x W/16.
struct DiscriminatorArch {
  int base_channels = 16;
  double input_gain = 40.0;
  friend bool operator==(const DiscriminatorArch&, const DiscriminatorArch&) = default;
};

inline constexpr int kDiscLayers = 4;

template <typename T>
class Discriminator {
 public:
  struct Cache {
    std::array<Tensor<T>, kDiscLayers> in, pre;
    Tensor<T> out;
    int cond_channels = 1;
  };

  struct Grads {
    std::array<ConvParams<T>, kDiscLayers> layers;
    Tensor<T> condition;
    Tensor<T> candidate;
  };

  DiscriminatorArch arch;
  std::array<ConvParams<T>, kDiscLayers> layers;

  Discriminator() = default;
  explicit Discriminator(const DiscriminatorArch& a) : arch(a) {
    const int b = a.base_channels;
    layers[0] = ConvParams<T>::conv(2, b);
    layers[1] = ConvParams<T>::conv(b, 2 * b);
    layers[2] = ConvParams<T>::conv(2 * b, 4 * b);
    layers[3] = ConvParams<T>::conv(4 * b, 1);
  }

  static Discriminator initialized(const DiscriminatorArch& a, Rng& rng, double stddev = 0.02) {
    Discriminator d(a);
    for (auto& l : d.layers) nn::fill_normal(l.weight, rng, stddev);
    return d;
  }

  std::vector<Tensor<T>*> parameters() {
    std::vector<Tensor<T>*> out;
    for (auto& l : layers) {
      out.push_back(&l.weight);
      out.push_back(&l.bias);
    }
    return out;
  }

  static std::vector<const Tensor<T>*> gradient_list(const Grads& g) {
    std::vector<const Tensor<T>*> out;
    for (const auto& l : g.layers) {
      out.push_back(&l.weight);
      out.push_back(&l.bias);
    }
    return out;
  }

  Tensor<T> forward(const Tensor<T>& condition, const Tensor<T>& candidate, Cache* cache = nullptr) const {
    Cache local;
    Cache& c = cache ? *cache : local;
    const auto scale = [g = static_cast<T>(arch.input_gain)](T p) { return (p - T(0.5)) * g; };
    Tensor<T> h = nn::concat_channels(nn::map(condition, scale), nn::map(candidate, scale));
    c.cond_channels = condition.dim(1);
    for (int i = 0; i < kDiscLayers; ++i) {
      c.in[i] = std::move(h);
      c.pre[i] = nn::conv2d(c.in[i], layers[i]);
      if (i < kDiscLayers - 1) h = nn::leaky_relu(c.pre[i]);
    }
    c.out = nn::sigmoid(c.pre[kDiscLayers - 1]);
    return c.out;
  }

  Grads backward(const Cache& c, const Tensor<T>& grad_out) const {
    Grads g;
    Tensor<T> gh = nn::sigmoid_backward(c.out, grad_out);
    for (int i = kDiscLayers - 1; i >= 0; --i) {
      if (i < kDiscLayers - 1) gh = nn::leaky_relu_backward(c.pre[i], gh);
      auto cg = nn::conv2d_backward(c.in[i], layers[i], gh);
      g.layers[i] = std::move(cg.params);
      gh = std::move(cg.input);
    }
    auto [gc, gk] = nn::split_channels(gh, c.cond_channels);
    const auto gain = static_cast<T>(arch.input_gain);
    g.condition = nn::map(gc, [gain](T v) { return v * gain; });
    g.candidate = nn::map(gk, [gain](T v) { return v * gain; });
    return g;
  }
};

}  // namespace occnav::models
