#pragma once

// Finite-difference and adjoint checks shared by the unit tests and the
// acceptance runner. Each returns the worst relative error it observed.

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "occnav/models/discriminator.hpp"
#include "occnav/models/generator.hpp"
#include "occnav/nn/activations.hpp"
#include "occnav/nn/concat.hpp"
#include "occnav/nn/conv.hpp"
#include "occnav/nn/gradcheck.hpp"
#include "occnav/nn/losses.hpp"

namespace checks {

using occnav::Rng;
using occnav::nn::Tensor;
using T = Tensor<double>;

inline T random_tensor(std::vector<int> shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  T t(std::move(shape));
  for (auto& v : t.data) v = rng.uniform(lo, hi);
  return t;
}

// Values bounded away from zero, for functions with a kink there.
inline T away_from_zero(std::vector<int> shape, Rng& rng) {
  T t(std::move(shape));
  for (auto& v : t.data) v = (rng.uniform01() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.05, 1.0);
  return t;
}

inline double conv2d_check(Rng& rng) {
  using namespace occnav::nn;
  const T x = random_tensor({2, 3, 8, 8}, rng);
  auto p = ConvParams<double>::conv(3, 4);
  p.weight = random_tensor(p.weight.shape, rng);
  p.bias = random_tensor(p.bias.shape, rng);
  const T r = random_tensor({2, 4, 4, 4}, rng);
  const auto g = conv2d_backward(x, p, r);
  auto fn = [&](const std::vector<T>& in) { return dot(conv2d(in[0], ConvParams<double>{in[1], in[2]}), r); };
  return grad_check(fn, {x, p.weight, p.bias}, {g.input, g.params.weight, g.params.bias});
}

inline double conv_transpose2d_check(Rng& rng) {
  using namespace occnav::nn;
  const T x = random_tensor({2, 3, 4, 4}, rng);
  auto p = ConvParams<double>::transposed(3, 2);
  p.weight = random_tensor(p.weight.shape, rng);
  p.bias = random_tensor(p.bias.shape, rng);
  const T r = random_tensor({2, 2, 8, 8}, rng);
  const auto g = conv_transpose2d_backward(x, p, r);
  auto fn = [&](const std::vector<T>& in) {
    return dot(conv_transpose2d(in[0], ConvParams<double>{in[1], in[2]}), r);
  };
  return grad_check(fn, {x, p.weight, p.bias}, {g.input, g.params.weight, g.params.bias});
}

// Relative error of <conv2d(x) - b, y> against <x, conv_transpose2d(y) - b'>
// with shared weights and zero biases.
inline double adjoint_check(Rng& rng) {
  using namespace occnav::nn;
  const int cin = 1 + static_cast<int>(rng.uniform_int(0, 3)), cout = 1 + static_cast<int>(rng.uniform_int(0, 3));
  const int h = 2 * static_cast<int>(rng.uniform_int(1, 6)), w = 2 * static_cast<int>(rng.uniform_int(1, 6));
  auto pc = ConvParams<double>::conv(cin, cout);
  pc.weight = random_tensor(pc.weight.shape, rng);
  // transposed layout (in=cout, out=cin) holds the same numbers
  ConvParams<double> pt = ConvParams<double>::transposed(cout, cin);
  pt.weight.data = pc.weight.data;
  const T x = random_tensor({1, cin, h, w}, rng);
  const T y = random_tensor({1, cout, h / 2, w / 2}, rng);
  const double lhs = dot(conv2d(x, pc), y);
  const double rhs = dot(x, conv_transpose2d(y, pt));
  return std::fabs(lhs - rhs) / std::max({std::fabs(lhs), std::fabs(rhs), 1e-12});
}

inline std::vector<std::pair<std::string, double>> activation_checks(Rng& rng) {
  using namespace occnav::nn;
  std::vector<std::pair<std::string, double>> out;
  const T r = random_tensor({2, 3, 4, 4}, rng);
  {
    const T x = away_from_zero({2, 3, 4, 4}, rng);
    out.emplace_back("relu", grad_check([&](const std::vector<T>& in) { return dot(relu(in[0]), r); }, {x},
                                        {relu_backward(x, r)}));
    out.emplace_back("leaky_relu", grad_check([&](const std::vector<T>& in) { return dot(leaky_relu(in[0]), r); },
                                              {x}, {leaky_relu_backward(x, r)}));
  }
  {
    const T x = random_tensor({2, 3, 4, 4}, rng, -3, 3);
    out.emplace_back("sigmoid", grad_check([&](const std::vector<T>& in) { return dot(sigmoid(in[0]), r); }, {x},
                                           {sigmoid_backward(sigmoid(x), r)}));
    out.emplace_back("tanh", grad_check([&](const std::vector<T>& in) { return dot(occnav::nn::tanh(in[0]), r); },
                                        {x}, {tanh_backward(occnav::nn::tanh(x), r)}));
  }
  return out;
}

inline std::vector<std::pair<std::string, double>> loss_checks(Rng& rng) {
  using namespace occnav::nn;
  std::vector<std::pair<std::string, double>> out;
  const std::vector<int> s{2, 1, 4, 4};
  const T p = random_tensor(s, rng, 0.2, 0.8);
  const T t = random_tensor(s, rng, 0.0, 1.0);
  out.emplace_back("bce", grad_check([&](const std::vector<T>& in) { return bce(in[0], t).value; }, {p},
                                     {bce(p, t).grad}));
  out.emplace_back("mse", grad_check([&](const std::vector<T>& in) { return mse(in[0], t).value; }, {p},
                                     {mse(p, t).grad}));
  T q = t;
  const T off = away_from_zero(s, rng);
  for (std::size_t i = 0; i < q.size(); ++i) q.data[i] = t.data[i] + off.data[i];
  out.emplace_back("l1", grad_check([&](const std::vector<T>& in) { return l1(in[0], t).value; }, {q},
                                    {l1(q, t).grad}));
  const T f = random_tensor(s, rng, 0.2, 0.8);
  const auto d = gan_d_loss(p, f);
  out.emplace_back("gan_d", grad_check([&](const std::vector<T>& in) { return gan_d_loss(in[0], in[1]).value; },
                                       {p, f}, {d.grad_a, d.grad_b}));
  out.emplace_back("gan_g", grad_check([&](const std::vector<T>& in) { return gan_g_loss(in[0]).value; }, {f},
                                       {gan_g_loss(f).grad}));
  return out;
}

// Two conv branches joined by concat_channels and a final conv.
inline double concat_net_check(Rng& rng) {
  using namespace occnav::nn;
  const T x = random_tensor({1, 1, 8, 8}, rng);
  auto a = ConvParams<double>::conv(1, 2), b = ConvParams<double>::conv(1, 3), c = ConvParams<double>::conv(5, 2);
  for (auto* p : {&a, &b, &c}) p->weight = random_tensor(p->weight.shape, rng);
  const T r = random_tensor({1, 2, 2, 2}, rng);
  auto fn = [&](const std::vector<T>& in) {
    return dot(conv2d(concat_channels(conv2d(in[0], a), conv2d(in[0], b)), c), r);
  };
  const T ya = conv2d(x, a), yb = conv2d(x, b);
  const T cat = concat_channels(ya, yb);
  const auto gc = conv2d_backward(cat, c, r);
  auto [ga, gb] = split_channels(gc.input, 2);
  T gx = conv2d_backward(x, a, ga).input;
  add_inplace(gx, conv2d_backward(x, b, gb).input);
  return grad_check(fn, {x}, {gx});
}

inline std::vector<std::uint8_t> signs(const T& t) {
  std::vector<std::uint8_t> out(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) out[i] = t.data[i] > 0.0;
  return out;
}

inline void append(std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
  a.insert(a.end(), b.begin(), b.end());
}

// Whole generator under a random linear readout, all parameters and the
// input checked.
inline occnav::nn::GradCheckReport generator_check(Rng& rng, int size = 32, int base = 2,
                                                   std::size_t per_tensor = 0) {
  using namespace occnav::models;
  GeneratorArch arch;
  arch.base_channels = base;
  arch.input_gain = 4.0;
  auto g = Generator<double>::initialized(arch, rng, 0.3);
  for (auto* p : g.parameters())
    if (p->rank() == 1)
      for (auto& v : p->data) v = rng.uniform(-0.1, 0.1);
  const T x = random_tensor({2, 1, size, size}, rng, 0.0, 1.0);
  const T r = random_tensor({2, 1, size, size}, rng);
  Generator<double>::Cache cache;
  g.forward(x, &cache);
  const auto grads = g.backward(cache, r);
  std::vector<T> inputs{x}, analytic{grads.input};
  for (auto* p : g.parameters()) inputs.push_back(*p);
  for (const auto* p : Generator<double>::gradient_list(grads)) analytic.push_back(*p);
  auto with = [&](const std::vector<T>& in) {
    auto h = g;
    auto params = h.parameters();
    for (std::size_t k = 0; k < params.size(); ++k) *params[k] = in[k + 1];
    return h;
  };
  auto fn = [&](const std::vector<T>& in) { return occnav::nn::dot(with(in).forward(in[0]), r); };
  auto pattern = [&](const std::vector<T>& in) {
    Generator<double>::Cache c;
    with(in).forward(in[0], &c);
    std::vector<std::uint8_t> p;
    for (int i = 0; i < kBlocks; ++i) append(p, signs(c.enc_pre[i]));
    for (int j = 0; j + 1 < kBlocks; ++j) append(p, signs(c.dec_pre[j]));
    return p;
  };
  occnav::nn::GradCheckOptions opt;
  opt.max_per_tensor = per_tensor;
  return grad_check_report(fn, inputs, analytic, opt, pattern);
}

inline occnav::nn::GradCheckReport discriminator_check(Rng& rng) {
  using namespace occnav::models;
  DiscriminatorArch arch;
  arch.base_channels = 2;
  arch.input_gain = 4.0;
  auto d = Discriminator<double>::initialized(arch, rng, 0.3);
  const T c = random_tensor({2, 1, 32, 32}, rng, 0.0, 1.0);
  const T k = random_tensor({2, 1, 32, 32}, rng, 0.0, 1.0);
  Discriminator<double>::Cache cache;
  const T y = d.forward(c, k, &cache);
  const T r = random_tensor(y.shape, rng);
  const auto grads = d.backward(cache, r);
  std::vector<T> inputs{c, k}, analytic{grads.condition, grads.candidate};
  for (auto* p : d.parameters()) inputs.push_back(*p);
  for (const auto* p : Discriminator<double>::gradient_list(grads)) analytic.push_back(*p);
  auto with = [&](const std::vector<T>& in) {
    auto h = d;
    auto params = h.parameters();
    for (std::size_t i = 0; i < params.size(); ++i) *params[i] = in[i + 2];
    return h;
  };
  auto fn = [&](const std::vector<T>& in) { return occnav::nn::dot(with(in).forward(in[0], in[1]), r); };
  auto pattern = [&](const std::vector<T>& in) {
    Discriminator<double>::Cache cc;
    with(in).forward(in[0], in[1], &cc);
    std::vector<std::uint8_t> p;
    for (int i = 0; i + 1 < kDiscLayers; ++i) append(p, signs(cc.pre[i]));
    return p;
  };
  return grad_check_report(fn, inputs, analytic, {}, pattern);
}

}  // namespace checks
