#include <gtest/gtest.h>

#include <cmath>

#include "nn_checks.hpp"
#include "occnav/nn/adam.hpp"

using namespace occnav;
using namespace occnav::nn;

TEST(Conv2d, DeltaKernelSamplesInput) {
  Tensor<float> x({1, 1, 4, 4});
  for (int i = 0; i < 16; ++i) x.data[i] = static_cast<float>(i + 1);
  auto p = ConvParams<float>::conv(1, 1);
  // tap (1,1) lines up with input (2i, 2j) given padding 1
  p.weight.at(0, 0, 1, 1) = 1.0f;
  const auto y = conv2d(x, p);
  ASSERT_EQ(y.shape, (std::vector<int>{1, 1, 2, 2}));
  EXPECT_EQ(y.at(0, 0, 0, 0), x.at(0, 0, 0, 0));
  EXPECT_EQ(y.at(0, 0, 0, 1), x.at(0, 0, 0, 2));
  EXPECT_EQ(y.at(0, 0, 1, 0), x.at(0, 0, 2, 0));
  EXPECT_EQ(y.at(0, 0, 1, 1), x.at(0, 0, 2, 2));
}

TEST(Conv2d, ZeroWeightsGiveBias) {
  Rng rng(1);
  auto x = checks::random_tensor({2, 3, 8, 8}, rng).cast<float>();
  auto p = ConvParams<float>::conv(3, 2);
  p.bias.data = {0.5f, -1.5f};
  const auto y = conv2d(x, p);
  EXPECT_EQ(y.shape, (std::vector<int>{2, 2, 4, 4}));
  for (int n = 0; n < 2; ++n)
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        EXPECT_EQ(y.at(n, 0, i, j), 0.5f);
        EXPECT_EQ(y.at(n, 1, i, j), -1.5f);
      }
}

TEST(Conv2d, ShapeErrors) {
  auto p = ConvParams<float>::conv(3, 2);
  EXPECT_THROW(conv2d(Tensor<float>({1, 2, 8, 8}), p), Error);
  EXPECT_THROW(conv2d(Tensor<float>({1, 3, 7, 8}), p), Error);
  auto q = ConvParams<float>::transposed(3, 2);
  EXPECT_THROW(conv_transpose2d(Tensor<float>({1, 2, 4, 4}), q), Error);
}

TEST(Conv2d, GradCheck) {
  Rng rng(2);
  EXPECT_LT(checks::conv2d_check(rng), 1e-6);
}

TEST(ConvTranspose2d, ZeroInputGivesBias) {
  auto p = ConvParams<float>::transposed(2, 3);
  Rng rng(3);
  for (auto& v : p.weight.data) v = static_cast<float>(rng.normal());
  p.bias.data = {1, 2, 3};
  const auto y = conv_transpose2d(Tensor<float>({1, 2, 4, 4}), p);
  ASSERT_EQ(y.shape, (std::vector<int>{1, 3, 8, 8}));
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j) EXPECT_EQ(y.at(0, c, i, j), static_cast<float>(c + 1));
}

TEST(ConvTranspose2d, Adjoint) {
  Rng rng(4);
  for (int i = 0; i < 100; ++i) EXPECT_LT(checks::adjoint_check(rng), 1e-6);
}

TEST(ConvTranspose2d, GradCheck) {
  Rng rng(5);
  EXPECT_LT(checks::conv_transpose2d_check(rng), 1e-6);
}

TEST(Activations, Values) {
  Tensor<double> x({4});
  x.data = {-1, 2, 0, -3};
  EXPECT_EQ(relu(x).data, (AlignedVector<double>{0, 2, 0, 0}));
  EXPECT_EQ(leaky_relu(x).data, (AlignedVector<double>{-0.2, 2, 0, -0.6000000000000001}));
  EXPECT_EQ(sigmoid(0.0), 0.5);
  EXPECT_NEAR(sigmoid(-800.0), 0.0, 1e-300);
  EXPECT_EQ(sigmoid(800.0), 1.0);
}

TEST(Activations, GradCheck) {
  Rng rng(6);
  for (const auto& [name, err] : checks::activation_checks(rng)) EXPECT_LT(err, 1e-6) << name;
}

TEST(Losses, Values) {
  Tensor<double> p({1}, 0.5), t({1}, 1.0);
  EXPECT_NEAR(bce(p, t).value, std::log(2.0), 1e-12);
  Rng rng(7);
  const auto x = checks::random_tensor({3, 4}, rng);
  EXPECT_EQ(mse(x, x).value, 0.0);
  EXPECT_EQ(l1(x, x).value, 0.0);
  Tensor<double> one({1}, 1.0), zero({1}, 0.0);
  EXPECT_TRUE(std::isfinite(bce(zero, one).value));
  EXPECT_NEAR(bce(zero, one).value, -std::log(kProbEps), 1e-9);
  EXPECT_NEAR(gan_d_loss(Tensor<double>({2}, 0.5), Tensor<double>({2}, 0.5)).value, 2 * std::log(2.0), 1e-12);
  EXPECT_NEAR(gan_g_loss(Tensor<double>({2}, 0.25)).value, std::log(4.0), 1e-12);
  EXPECT_THROW(mse(Tensor<double>({2}), Tensor<double>({3})), Error);
}

TEST(Losses, GradCheck) {
  Rng rng(8);
  for (const auto& [name, err] : checks::loss_checks(rng)) EXPECT_LT(err, 1e-6) << name;
}

TEST(Adam, ZeroGradientLeavesParams) {
  Tensor<double> w({3});
  w.data = {1, -2, 3};
  const auto before = w;
  Tensor<double> g({3});
  auto st = make_adam<double>({&w}, {});
  adam_step<double>({&w}, {&g}, st);
  EXPECT_EQ(w, before);
  EXPECT_EQ(st.step, 1);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  Tensor<double> w({1}, 0.7), g({1}, 1.0);
  AdamConfig cfg;
  auto st = make_adam<double>({&w}, cfg);
  adam_step<double>({&w}, {&g}, st);
  EXPECT_NEAR(0.7 - w.data[0], cfg.lr, 1e-10);
}

TEST(Adam, QuadraticBowl) {
  Tensor<double> w({1}, 1.0);
  AdamConfig cfg;
  cfg.lr = 0.05;
  auto st = make_adam<double>({&w}, cfg);
  for (int i = 0; i < 500; ++i) {
    Tensor<double> g({1}, 2.0 * w.data[0]);
    adam_step<double>({&w}, {&g}, st);
  }
  EXPECT_LT(std::fabs(w.data[0]), 1e-3);
}

TEST(Adam, ShapeMismatch) {
  Tensor<double> w({3}), g({2});
  auto st = make_adam<double>({&w}, {});
  EXPECT_THROW(adam_step<double>({&w}, {&g}, st), Error);
}

TEST(Concat, ShapesAndSplit) {
  Rng rng(9);
  const auto a = checks::random_tensor({1, 2, 4, 4}, rng), b = checks::random_tensor({1, 3, 4, 4}, rng);
  const auto c = concat_channels(a, b);
  EXPECT_EQ(c.shape, (std::vector<int>{1, 5, 4, 4}));
  auto [ga, gb] = split_channels(c, 2);
  EXPECT_EQ(ga, a);
  EXPECT_EQ(gb, b);
  EXPECT_THROW(concat_channels(a, checks::random_tensor({1, 3, 2, 4}, rng)), Error);
}

TEST(Concat, GradCheckThroughNet) {
  Rng rng(10);
  EXPECT_LT(checks::concat_net_check(rng), 1e-6);
}

TEST(GradCheck, LinearFunctionIsExact) {
  Rng rng(11);
  const auto a = checks::random_tensor({10}, rng);
  const auto x = checks::random_tensor({10}, rng);
  const double err = grad_check([&](const std::vector<Tensor<double>>& in) { return dot(in[0], a); }, {x}, {a});
  EXPECT_LT(err, 1e-9);
}

TEST(GradCheck, DetectsCorruptedBackward) {
  Rng rng(12);
  const auto x = checks::random_tensor({2, 3, 8, 8}, rng);
  auto p = ConvParams<double>::conv(3, 4);
  p.weight = checks::random_tensor(p.weight.shape, rng);
  const auto r = checks::random_tensor({2, 4, 4, 4}, rng);
  auto g = conv2d_backward(x, p, r);
  g.params.weight.data[5] *= 1.5;
  const double err = grad_check(
      [&](const std::vector<Tensor<double>>& in) { return dot(conv2d(x, ConvParams<double>{in[0], p.bias}), r); },
      {p.weight}, {g.params.weight});
  EXPECT_GT(err, 1e-2);
}

TEST(GradCheck, Generator) {
  Rng rng(13);
  const auto rep = checks::generator_check(rng);
  EXPECT_LT(rep.worst, 1e-5);
  EXPECT_GT(rep.checked, 5000u);
  EXPECT_LT(rep.skipped * 100, rep.checked);
}

TEST(GradCheck, Discriminator) {
  Rng rng(14);
  const auto rep = checks::discriminator_check(rng);
  EXPECT_LT(rep.worst, 1e-5);
  EXPECT_LT(rep.skipped * 100, rep.checked);
}
