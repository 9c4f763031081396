#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "occnav/nn/tensor.hpp"

namespace occnav::nn {

struct GradCheckOptions {
  double eps = 1e-4;
  /// Denominator floor, so elements whose true gradient is ~0 compare on
  /// absolute error instead of amplifying roundoff.
  double scale_floor = 1e-6;
  /// Elements checked per tensor (evenly strided); 0 checks all.
  std::size_t max_per_tensor = 0;
};

struct GradCheckReport {
  double worst = 0.0;       // max relative error over compared elements
  std::size_t checked = 0;  // elements compared
  std::size_t skipped = 0;  // elements whose +-eps probes straddle a kink
};

using Inputs = std::vector<Tensor<double>>;

/// Central differences of `fn` around `inputs` against `analytic`. Relative
/// error per element is |a - n| / max(|a|, |n|, scale_floor).
///
/// For piecewise-smooth functions, `pattern` may return the on/off state of
/// every kink (e.g. the signs of all relu inputs). Elements whose two probes
/// give different patterns are skipped: the difference quotient straddles a
/// kink there and is not a derivative estimate.
inline GradCheckReport grad_check_report(const std::function<double(const Inputs&)>& fn, Inputs inputs,
                                         const Inputs& analytic, const GradCheckOptions& opt = {},
                                         const std::function<std::vector<std::uint8_t>(const Inputs&)>& pattern = {}) {
  if (analytic.size() != inputs.size()) throw Error(ErrorKind::data_format, "grad_check: gradient count mismatch");
  GradCheckReport rep;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    require_same_shape(inputs[k], analytic[k], "grad_check");
    const std::size_t n = inputs[k].size();
    const std::size_t stride = (opt.max_per_tensor == 0 || n <= opt.max_per_tensor) ? 1 : n / opt.max_per_tensor;
    for (std::size_t i = 0; i < n; i += stride) {
      double& x = inputs[k].data[i];
      const double saved = x;
      x = saved + opt.eps;
      const double fp = fn(inputs);
      const auto pp = pattern ? pattern(inputs) : std::vector<std::uint8_t>{};
      x = saved - opt.eps;
      const double fm = fn(inputs);
      const auto pm = pattern ? pattern(inputs) : std::vector<std::uint8_t>{};
      x = saved;
      if (pp != pm) {
        ++rep.skipped;
        continue;
      }
      const double num = (fp - fm) / (2.0 * opt.eps);
      const double a = analytic[k].data[i];
      const double rel = std::fabs(a - num) / std::max({std::fabs(a), std::fabs(num), opt.scale_floor});
      rep.worst = std::max(rep.worst, rel);
      ++rep.checked;
    }
  }
  return rep;
}

inline double grad_check(const std::function<double(const Inputs&)>& fn, Inputs inputs, const Inputs& analytic,
                         const GradCheckOptions& opt = {}) {
  return grad_check_report(fn, std::move(inputs), analytic, opt).worst;
}

}  // namespace occnav::nn
