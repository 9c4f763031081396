#pragma once

#include <memory>
#include <string>
#include <vector>

#include "occnav/models/generator.hpp"
#include "occnav/occupancy.hpp"

namespace occnav::models {

/// Anything that maps an observed probability map to a completed one.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual ProbGrid predict(const ProbGrid& input) const = 0;
};

class IdentityPredictor final : public Predictor {
 public:
  ProbGrid predict(const ProbGrid& input) const override { return input; }
};

inline nn::Tensor<float> to_tensor(const std::vector<const ProbGrid*>& grids) {
  const int n = static_cast<int>(grids.size());
  const int r = grids.front()->values.rows, c = grids.front()->values.cols;
  nn::Tensor<float> t({n, 1, r, c});
  for (int s = 0; s < n; ++s) std::copy(grids[s]->values.data.begin(), grids[s]->values.data.end(), t.sample(s));
  return t;
}

class GeneratorPredictor final : public Predictor {
 public:
  explicit GeneratorPredictor(Generator<float> g) : gen_(std::move(g)) {}

  ProbGrid predict(const ProbGrid& input) const override {
    const auto out = gen_.forward(to_tensor({&input}));
    ProbGrid p(input.spec);
    std::copy(out.data.begin(), out.data.end(), p.values.data.begin());
    return p;
  }

  const Generator<float>& generator() const { return gen_; }

 private:
  Generator<float> gen_;
};

/// Observed cells win: known input cells are copied, unknown ones come from
/// the raw prediction.
inline ProbGrid overwrite_known(const ProbGrid& input, const ProbGrid& raw, const OccupancyConfig& occ) {
  if (input.values.size() != raw.values.size())
    throw Error(ErrorKind::data_format, "overwrite_known: grid sizes differ");
  ProbGrid out = raw;
  out.spec = input.spec;
  for (std::size_t i = 0; i < out.values.size(); ++i)
    if (is_known(input.values.data[i], occ)) out.values.data[i] = input.values.data[i];
  return out;
}

inline ProbGrid predict_inpaint(const Predictor& p, const ProbGrid& input, const OccupancyConfig& occ) {
  return overwrite_known(input, p.predict(input), occ);
}

}  // namespace occnav::models
