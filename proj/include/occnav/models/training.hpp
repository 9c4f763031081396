#pragma once

#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "occnav/dataset.hpp"
#include "occnav/models/discriminator.hpp"
#include "occnav/models/generator.hpp"
#include "occnav/models/predictor.hpp"
#include "occnav/nn/adam.hpp"
#include "occnav/nn/losses.hpp"

namespace occnav::models {

enum class PredLoss { bce, mse, l1 };

inline const char* to_string(PredLoss l) {
  switch (l) {
    case PredLoss::bce: return "bce";
    case PredLoss::mse: return "mse";
    case PredLoss::l1: return "l1";
  }
  return "?";
}

struct TrainConfig {
  GeneratorArch generator;
  DiscriminatorArch discriminator;
  nn::AdamConfig adam;
  double lambda_l1 = 10.0;
  int batch_size_gan = 4;
  int batch_size_pred = 16;
  int max_epochs = 300;
  int patience = 10;  // epochs without validation-L1 improvement; 0 disables
  long max_iterations = 0;  // 0 = no cap
  std::uint64_t seed = 0;
  PredLoss pred_loss = PredLoss::mse;

  void validate() const {
    if (!(lambda_l1 > 0.0) || batch_size_gan < 1 || batch_size_pred < 1 || max_epochs < 1 || patience < 0 ||
        max_iterations < 0 || !(adam.lr > 0.0) || generator.base_channels < 1 || discriminator.base_channels < 1)
      throw config_error("train: all settings must be positive");
  }
};

struct IterationRecord {
  double loss = 0.0;     // objective minimized by the generator step
  double l1 = 0.0;       // L1(G(x), y) on the batch, before the step
  double d_loss = 0.0;   // GAN only
  double d_min = 0.0;    // GAN only: extreme discriminator outputs seen this step
  double d_max = 0.0;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double train_l1 = 0.0;
  double val_l1 = 0.0;
  double d_loss = 0.0;
};

struct TrainHistory {
  std::vector<IterationRecord> iterations;
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  std::string stop_reason;
};

// `generator` is the best-validation snapshot, `last` the final weights.
struct TrainResult {
  Generator<float> generator;
  TrainHistory history;
  Generator<float> last;
};

// Independent seeded streams, so the generator initialization and batch
// order are shared between training regimes with the same seed.
enum class Stream : std::uint64_t { generator_init = 1, discriminator_init = 2, shuffle = 3, split = 4 };

inline Rng stream(std::uint64_t seed, Stream s) { return Rng(mix_seed(seed, static_cast<std::uint64_t>(s))); }

struct Batch {
  nn::Tensor<float> input;
  nn::Tensor<float> target;
};

inline Batch make_batch(const std::vector<SamplePair>& pairs, const std::vector<std::size_t>& idx, std::size_t begin,
                        std::size_t end) {
  std::vector<const ProbGrid*> in, tg;
  for (std::size_t i = begin; i < end; ++i) {
    in.push_back(&pairs[idx[i]].input);
    tg.push_back(&pairs[idx[i]].target);
  }
  return {to_tensor(in), to_tensor(tg)};
}

inline void shuffle(std::vector<std::size_t>& idx, Rng& rng) {
  for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i - 1)))]);
}

/// Mean L1 between generator output and target over a dataset.
inline double mean_l1(const Generator<float>& g, const std::vector<SamplePair>& pairs, int batch = 16) {
  std::vector<std::size_t> idx(pairs.size());
  std::iota(idx.begin(), idx.end(), 0);
  double acc = 0.0;
  for (std::size_t b = 0; b < pairs.size(); b += batch) {
    const std::size_t e = std::min(pairs.size(), b + batch);
    const auto bt = make_batch(pairs, idx, b, e);
    acc += nn::l1(g.forward(bt.input), bt.target).value * static_cast<double>(e - b);
  }
  return pairs.empty() ? 0.0 : acc / static_cast<double>(pairs.size());
}

/// Deterministic split of `pairs` into (train, validation) with `fraction`
/// of the pairs (at least one) held out.
inline std::pair<std::vector<SamplePair>, std::vector<SamplePair>> split_validation(std::vector<SamplePair> pairs,
                                                                                    double fraction,
                                                                                    std::uint64_t seed) {
  std::vector<std::size_t> idx(pairs.size());
  std::iota(idx.begin(), idx.end(), 0);
  auto rng = stream(seed, Stream::split);
  shuffle(idx, rng);
  const std::size_t n_val =
      pairs.size() < 2 ? 0 : std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(fraction * pairs.size())));
  std::vector<char> is_val(pairs.size(), 0);
  for (std::size_t i = 0; i < n_val; ++i) is_val[idx[i]] = 1;
  std::vector<SamplePair> train, val;
  for (std::size_t i = 0; i < pairs.size(); ++i) (is_val[i] ? val : train).push_back(std::move(pairs[i]));
  return {std::move(train), std::move(val)};
}

namespace detail {

inline void require_finite(double v, const char* what, std::size_t epoch, std::size_t iter) {
  if (!std::isfinite(v))
    throw numeric_error(std::string(what) + " became non-finite at epoch " + std::to_string(epoch) + ", iteration " +
                        std::to_string(iter));
}

/// Epoch loop shared by both regimes: shuffles, batches, calls `step` per
/// batch, tracks validation L1 for early stopping and restores the best
/// generator.
template <typename Step>
TrainResult run_epochs(Generator<float> gen, const std::vector<SamplePair>& train, const std::vector<SamplePair>& val,
                       const TrainConfig& cfg, int batch_size, Step&& step) {
  if (train.empty()) throw Error(ErrorKind::data_format, "training set is empty");
  TrainResult res{gen, {}, gen};
  std::vector<std::size_t> idx(train.size());
  std::iota(idx.begin(), idx.end(), 0);
  auto rng = stream(cfg.seed, Stream::shuffle);
  double best = std::numeric_limits<double>::infinity();
  int since_best = 0;
  res.history.stop_reason = "max_epochs";
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    shuffle(idx, rng);
    EpochRecord rec{epoch, 0.0, 0.0, 0.0, 0.0};
    std::size_t n_batches = 0;
    bool capped = false;
    for (std::size_t b = 0; b < idx.size(); b += batch_size) {
      if (cfg.max_iterations > 0 && static_cast<long>(res.history.iterations.size()) >= cfg.max_iterations) {
        capped = true;
        break;
      }
      const auto batch = make_batch(train, idx, b, std::min(idx.size(), b + batch_size));
      IterationRecord it = step(gen, batch);
      require_finite(it.loss, "training loss", epoch, res.history.iterations.size());
      res.history.iterations.push_back(it);
      rec.train_loss += it.loss;
      rec.train_l1 += it.l1;
      rec.d_loss += it.d_loss;
      ++n_batches;
    }
    if (n_batches == 0) {
      res.history.stop_reason = "max_iterations";
      break;
    }
    rec.train_loss /= static_cast<double>(n_batches);
    rec.train_l1 /= static_cast<double>(n_batches);
    rec.d_loss /= static_cast<double>(n_batches);
    rec.val_l1 = val.empty() ? rec.train_l1 : mean_l1(gen, val);
    require_finite(rec.val_l1, "validation L1", epoch, res.history.iterations.size());
    res.history.epochs.push_back(rec);
    if (rec.val_l1 < best) {
      best = rec.val_l1;
      since_best = 0;
      res.generator = gen;
      res.history.best_epoch = epoch;
    } else if (cfg.patience > 0 && ++since_best >= cfg.patience) {
      res.history.stop_reason = "early_stopping";
      break;
    }
    if (capped) {
      res.history.stop_reason = "max_iterations";
      break;
    }
  }
  res.last = std::move(gen);
  return res;
}

}  // namespace detail

/// Supervised regime: minimizes the selected per-cell loss between G(x) and
/// the fused target.
inline TrainResult train_pred(const std::vector<SamplePair>& train, const std::vector<SamplePair>& val,
                              const TrainConfig& cfg) {
  cfg.validate();
  auto init_rng = stream(cfg.seed, Stream::generator_init);
  auto gen = Generator<float>::initialized(cfg.generator, init_rng);
  auto adam = nn::make_adam(gen.parameters(), cfg.adam);
  auto step = [&](Generator<float>& g, const Batch& b) {
    typename Generator<float>::Cache cache;
    const auto out = g.forward(b.input, &cache);
    nn::LossResult<float> loss;
    switch (cfg.pred_loss) {
      case PredLoss::bce: loss = nn::bce(out, b.target); break;
      case PredLoss::mse: loss = nn::mse(out, b.target); break;
      case PredLoss::l1: loss = nn::l1(out, b.target); break;
    }
    IterationRecord it;
    it.loss = loss.value;
    it.l1 = cfg.pred_loss == PredLoss::l1 ? loss.value : nn::l1(out, b.target).value;
    const auto grads = g.backward(cache, loss.grad);
    nn::adam_step(g.parameters(), Generator<float>::gradient_list(grads), adam);
    return it;
  };
  return detail::run_epochs(std::move(gen), train, val, cfg, cfg.batch_size_pred, step);
}

/// Adversarial regime: per batch one discriminator step on (x, y) vs
/// (x, G(x)), then one generator step on gan_g_loss + lambda * L1.
inline TrainResult train_gan(const std::vector<SamplePair>& train, const std::vector<SamplePair>& val,
                             const TrainConfig& cfg) {
  cfg.validate();
  auto g_rng = stream(cfg.seed, Stream::generator_init);
  auto d_rng = stream(cfg.seed, Stream::discriminator_init);
  auto gen = Generator<float>::initialized(cfg.generator, g_rng);
  auto disc = Discriminator<float>::initialized(cfg.discriminator, d_rng);
  auto adam_g = nn::make_adam(gen.parameters(), cfg.adam);
  auto adam_d = nn::make_adam(disc.parameters(), cfg.adam);
  auto step = [&](Generator<float>& g, const Batch& b) {
    IterationRecord it;
    typename Generator<float>::Cache gc;
    const auto fake = g.forward(b.input, &gc);

    typename Discriminator<float>::Cache real_c, fake_c;
    const auto d_real = disc.forward(b.input, b.target, &real_c);
    const auto d_fake = disc.forward(b.input, fake, &fake_c);
    const auto dl = nn::gan_d_loss(d_real, d_fake);
    auto gr = disc.backward(real_c, dl.grad_a);
    const auto gf = disc.backward(fake_c, dl.grad_b);
    for (std::size_t k = 0; k < gr.layers.size(); ++k) {
      nn::add_inplace(gr.layers[k].weight, gf.layers[k].weight);
      nn::add_inplace(gr.layers[k].bias, gf.layers[k].bias);
    }
    nn::adam_step(disc.parameters(), Discriminator<float>::gradient_list(gr), adam_d);

    typename Discriminator<float>::Cache g_c;
    const auto d_fake2 = disc.forward(b.input, fake, &g_c);
    const auto gl = nn::gan_g_loss(d_fake2);
    const auto l1 = nn::l1(fake, b.target);
    auto g_out = disc.backward(g_c, gl.grad).candidate;
    const float lam = static_cast<float>(cfg.lambda_l1);
    for (std::size_t i = 0; i < g_out.size(); ++i) g_out.data[i] += lam * l1.grad.data[i];
    const auto grads = g.backward(gc, g_out);
    nn::adam_step(g.parameters(), Generator<float>::gradient_list(grads), adam_g);

    it.loss = static_cast<double>(gl.value) + cfg.lambda_l1 * l1.value;
    it.l1 = l1.value;
    it.d_loss = dl.value;
    it.d_min = std::numeric_limits<double>::infinity();
    it.d_max = -std::numeric_limits<double>::infinity();
    for (const auto* t : {&d_real, &d_fake, &d_fake2})
      for (float v : t->data) {
        it.d_min = std::min<double>(it.d_min, v);
        it.d_max = std::max<double>(it.d_max, v);
      }
    detail::require_finite(it.d_loss, "discriminator loss", 0, 0);
    return it;
  };
  return detail::run_epochs(std::move(gen), train, val, cfg, cfg.batch_size_gan, step);
}

}  // namespace occnav::models
