#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "occnav/occupancy.hpp"

namespace occnav::models {

/// Agreement of free/occupied labels over cells known in both maps; nullopt
/// when no cell is jointly known.
inline std::optional<double> inpaint_accuracy(const ProbGrid& pred, const ProbGrid& target,
                                              const OccupancyConfig& occ) {
  if (pred.values.size() != target.values.size())
    throw Error(ErrorKind::data_format, "inpaint_accuracy: grid sizes differ");
  std::size_t joint = 0, agree = 0;
  for (std::size_t i = 0; i < pred.values.size(); ++i) {
    const auto a = classify(pred.values.data[i], occ), b = classify(target.values.data[i], occ);
    if (a == CellState::unknown || b == CellState::unknown) continue;
    ++joint;
    agree += a == b;
  }
  if (joint == 0) return std::nullopt;
  return static_cast<double>(agree) / static_cast<double>(joint);
}

struct InpaintCounts {
  std::size_t input_known = 0;
  std::size_t newly_known = 0;
};

inline InpaintCounts inpaint_counts(const ProbGrid& input, const ProbGrid& pred, const OccupancyConfig& occ) {
  if (input.values.size() != pred.values.size())
    throw Error(ErrorKind::data_format, "inpainted_fraction: grid sizes differ");
  InpaintCounts c;
  for (std::size_t i = 0; i < input.values.size(); ++i) {
    const bool in_known = is_known(input.values.data[i], occ);
    c.input_known += in_known;
    c.newly_known += !in_known && is_known(pred.values.data[i], occ);
  }
  return c;
}

/// Percentage of input-unknown cells the prediction makes known, relative to
/// the number of cells known in the input.
inline std::optional<double> inpainted_fraction(const ProbGrid& input, const ProbGrid& pred,
                                                const OccupancyConfig& occ) {
  const auto c = inpaint_counts(input, pred, occ);
  if (c.input_known == 0) return std::nullopt;
  return 100.0 * static_cast<double>(c.newly_known) / static_cast<double>(c.input_known);
}

inline constexpr int kHistogramBins = 20;

/// Counts of per-sample accuracies (percent) in 5%-wide bins over [0, 100];
/// 100 falls in the last bin.
inline std::array<int, kHistogramBins> accuracy_histogram(const std::vector<double>& percents) {
  std::array<int, kHistogramBins> bins{};
  for (double v : percents) {
    int b = static_cast<int>(std::floor(v / 5.0));
    bins[std::clamp(b, 0, kHistogramBins - 1)]++;
  }
  return bins;
}

}  // namespace occnav::models
