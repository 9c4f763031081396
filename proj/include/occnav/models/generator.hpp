#pragma once

#include <algorithm>
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

inline constexpr int kBlocks = 5;
inline constexpr double kInitStd = 0.02;

/// Five-block encoder-decoder with mirror skip connections.
///
/// Inputs are occupancy probabilities. They are recentered and scaled by
/// input_gain before the first block; the default maps the clipped log-odds
/// probability band [0.475, 0.525] onto [-1, 1].
struct GeneratorArch {
  int base_channels = 16;
  double input_gain = 40.0;

  int channels(int block) const { return std::min(base_channels << block, 8 * base_channels); }
  friend bool operator==(const GeneratorArch&, const GeneratorArch&) = default;
};

template <typename T>
class Generator {
 public:
  struct Cache {
    std::array<Tensor<T>, kBlocks> enc_in, enc_pre, enc_out;
    std::array<Tensor<T>, kBlocks> dec_in, dec_pre;
    Tensor<T> out;
  };

  struct Grads {
    std::array<ConvParams<T>, kBlocks> enc, dec;
    Tensor<T> input;
  };

  GeneratorArch arch;
  std::array<ConvParams<T>, kBlocks> enc;
  std::array<ConvParams<T>, kBlocks> dec;

  Generator() = default;

  explicit Generator(const GeneratorArch& a) : arch(a) {
    for (int i = 0; i < kBlocks; ++i) enc[i] = ConvParams<T>::conv(i == 0 ? 1 : a.channels(i - 1), a.channels(i));
    dec[0] = ConvParams<T>::transposed(a.channels(kBlocks - 1), a.channels(kBlocks - 2));
    for (int j = 1; j < kBlocks - 1; ++j)
      dec[j] = ConvParams<T>::transposed(2 * a.channels(kBlocks - 1 - j), a.channels(kBlocks - 2 - j));
    dec[kBlocks - 1] = ConvParams<T>::transposed(2 * a.channels(0), 1);
  }

  /// Gaussian weights (std 0.02), zero biases, drawn in parameter order.
  static Generator initialized(const GeneratorArch& a, Rng& rng, double stddev = kInitStd) {
    Generator g(a);
    for (auto& [name, t] : g.named_parameters())
      if (name.ends_with(".weight")) nn::fill_normal(*t, rng, stddev);
    return g;
  }

  std::vector<std::pair<std::string, Tensor<T>*>> named_parameters() {
    std::vector<std::pair<std::string, Tensor<T>*>> out;
    for (int i = 0; i < kBlocks; ++i) {
      out.emplace_back("enc" + std::to_string(i) + ".weight", &enc[i].weight);
      out.emplace_back("enc" + std::to_string(i) + ".bias", &enc[i].bias);
    }
    for (int j = 0; j < kBlocks; ++j) {
      out.emplace_back("dec" + std::to_string(j) + ".weight", &dec[j].weight);
      out.emplace_back("dec" + std::to_string(j) + ".bias", &dec[j].bias);
    }
    return out;
  }

  std::vector<Tensor<T>*> parameters() {
    std::vector<Tensor<T>*> out;
    for (auto& [name, t] : named_parameters()) out.push_back(t);
    return out;
  }

  /// (N, 1, H, W) probabilities -> (N, 1, H, W) probabilities. H and W must be
  /// divisible by 32.
  Tensor<T> forward(const Tensor<T>& probs, Cache* cache = nullptr) const {
    if (probs.rank() != 4 || probs.dim(1) != 1 || probs.dim(2) % 32 || probs.dim(3) % 32)
      throw Error(ErrorKind::data_format, "generator: input must be (N,1,H,W) with H, W divisible by 32, got " +
                                              nn::shape_str(probs.shape));
    Cache local;
    Cache& c = cache ? *cache : local;
    Tensor<T> h = nn::map(probs, [g = static_cast<T>(arch.input_gain)](T p) { return (p - T(0.5)) * g; });
    for (int i = 0; i < kBlocks; ++i) {
      c.enc_in[i] = std::move(h);
      c.enc_pre[i] = nn::conv2d(c.enc_in[i], enc[i]);
      c.enc_out[i] = nn::leaky_relu(c.enc_pre[i]);
      h = c.enc_out[i];
    }
    Tensor<T> d;
    for (int j = 0; j < kBlocks; ++j) {
      c.dec_in[j] = j == 0 ? c.enc_out[kBlocks - 1] : nn::concat_channels(d, c.enc_out[kBlocks - 1 - j]);
      c.dec_pre[j] = nn::conv_transpose2d(c.dec_in[j], dec[j]);
      if (j < kBlocks - 1) d = nn::relu(c.dec_pre[j]);
    }
    c.out = nn::sigmoid(c.dec_pre[kBlocks - 1]);
    return c.out;
  }

  Grads backward(const Cache& c, const Tensor<T>& grad_out) const {
    Grads g;
    std::array<Tensor<T>, kBlocks> g_enc_out;
    for (int i = 0; i < kBlocks; ++i) g_enc_out[i] = Tensor<T>(c.enc_out[i].shape);

    Tensor<T> g_pre = nn::sigmoid_backward(c.out, grad_out);
    for (int j = kBlocks - 1; j >= 0; --j) {
      auto cg = nn::conv_transpose2d_backward(c.dec_in[j], dec[j], g_pre);
      g.dec[j] = std::move(cg.params);
      if (j == 0) {
        nn::add_inplace(g_enc_out[kBlocks - 1], cg.input);
        break;
      }
      auto [g_d, g_skip] = nn::split_channels(cg.input, c.dec_pre[j - 1].dim(1));
      nn::add_inplace(g_enc_out[kBlocks - 1 - j], g_skip);
      g_pre = nn::relu_backward(c.dec_pre[j - 1], g_d);
    }
    for (int i = kBlocks - 1; i >= 0; --i) {
      auto cg = nn::conv2d_backward(c.enc_in[i], enc[i], nn::leaky_relu_backward(c.enc_pre[i], g_enc_out[i]));
      g.enc[i] = std::move(cg.params);
      if (i > 0)
        nn::add_inplace(g_enc_out[i - 1], cg.input);
      else
        g.input = nn::map(cg.input, [gain = static_cast<T>(arch.input_gain)](T v) { return v * gain; });
    }
    return g;
  }

  /// Gradient tensors in the same order as parameters().
  static std::vector<const Tensor<T>*> gradient_list(const Grads& g) {
    std::vector<const Tensor<T>*> out;
    for (int i = 0; i < kBlocks; ++i) {
      out.push_back(&g.enc[i].weight);
      out.push_back(&g.enc[i].bias);
    }
    for (int j = 0; j < kBlocks; ++j) {
      out.push_back(&g.dec[j].weight);
      out.push_back(&g.dec[j].bias);
    }
    return out;
  }
};

}  // namespace occnav::models
