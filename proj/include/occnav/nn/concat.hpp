#pragma once

#include <algorithm>
#include <utility>

#include "occnav/nn/tensor.hpp"

namespace occnav::nn {

template <typename T>
Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.rank() != 4 || b.rank() != 4 || a.dim(0) != b.dim(0) || a.dim(2) != b.dim(2) || a.dim(3) != b.dim(3))
    throw Error(ErrorKind::data_format, "concat_channels: " + shape_str(a.shape) + " vs " + shape_str(b.shape));
  const int n = a.dim(0);
  Tensor<T> out({n, a.dim(1) + b.dim(1), a.dim(2), a.dim(3)});
  const std::size_t sa = a.size() / n, sb = b.size() / n;
  for (int s = 0; s < n; ++s) {
    std::copy_n(a.sample(s), sa, out.sample(s));
    std::copy_n(b.sample(s), sb, out.sample(s) + sa);
  }
  return out;
}

/// Backward of concat_channels: splits a gradient at channel a_channels.
template <typename T>
std::pair<Tensor<T>, Tensor<T>> split_channels(const Tensor<T>& g, int a_channels) {
  if (g.rank() != 4 || a_channels < 0 || a_channels > g.dim(1))
    throw Error(ErrorKind::data_format, "split_channels: bad split of " + shape_str(g.shape));
  const int n = g.dim(0);
  Tensor<T> a({n, a_channels, g.dim(2), g.dim(3)});
  Tensor<T> b({n, g.dim(1) - a_channels, g.dim(2), g.dim(3)});
  const std::size_t sa = a.size() / n, sb = b.size() / n;
  for (int s = 0; s < n; ++s) {
    std::copy_n(g.sample(s), sa, a.sample(s));
    std::copy_n(g.sample(s) + sa, sb, b.sample(s));
  }
  return {std::move(a), std::move(b)};
}

}  // namespace occnav::nn
