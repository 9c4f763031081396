#pragma once

#include <Eigen/Core>

#include "occnav/nn/tensor.hpp"

namespace occnav::nn {

// Both layer kinds use a 4x4 kernel, stride 2, padding 1: conv2d halves the
// spatial size and conv_transpose2d doubles it.
inline constexpr int kKernel = 4;
inline constexpr int kStride = 2;
inline constexpr int kPad = 1;
inline constexpr int kTaps = kKernel * kKernel;

/// conv2d:           weight (out_ch, in_ch, 4, 4), bias (out_ch)
/// conv_transpose2d: weight (in_ch, out_ch, 4, 4), bias (out_ch)
///
/// The transposed layout makes conv_transpose2d with weight W the adjoint of
/// the input-gradient map of conv2d with the same W.
template <typename T>
struct ConvParams {
  Tensor<T> weight;
  Tensor<T> bias;

  static ConvParams conv(int in_ch, int out_ch) { return {Tensor<T>({out_ch, in_ch, kKernel, kKernel}), Tensor<T>({out_ch})}; }
  static ConvParams transposed(int in_ch, int out_ch) {
    return {Tensor<T>({in_ch, out_ch, kKernel, kKernel}), Tensor<T>({out_ch})};
  }

  ConvParams zeros_like() const { return {Tensor<T>(weight.shape), Tensor<T>(bias.shape)}; }
  friend bool operator==(const ConvParams&, const ConvParams&) = default;
};

template <typename T>
struct ConvGrads {
  Tensor<T> input;
  ConvParams<T> params;
};

namespace detail {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapMat = Eigen::Map<RowMat<T>>;
template <typename T>
using CMapMat = Eigen::Map<const RowMat<T>>;

/// (C, H, W) -> (C*16, Ho*Wo) patch matrix for a stride-2 4x4 window.
template <typename T>
void im2col(const T* x, int c_in, int h, int w, T* cols) {
  const int ho = h / kStride, wo = w / kStride, p = ho * wo;
  for (int c = 0; c < c_in; ++c) {
    const T* xc = x + static_cast<std::size_t>(c) * h * w;
    for (int ki = 0; ki < kKernel; ++ki)
      for (int kj = 0; kj < kKernel; ++kj) {
        T* row = cols + (static_cast<std::size_t>(c) * kTaps + ki * kKernel + kj) * p;
        for (int oy = 0; oy < ho; ++oy) {
          const int iy = oy * kStride - kPad + ki;
          T* dst = row + oy * wo;
          if (iy < 0 || iy >= h) {
            std::fill(dst, dst + wo, T(0));
            continue;
          }
          const T* src = xc + static_cast<std::size_t>(iy) * w;
          for (int ox = 0; ox < wo; ++ox) {
            const int ix = ox * kStride - kPad + kj;
            dst[ox] = (ix >= 0 && ix < w) ? src[ix] : T(0);
          }
        }
      }
  }
}

/// Adjoint of im2col: scatter-add patches back into (C, H, W).
template <typename T>
void col2im(const T* cols, int c_in, int h, int w, T* x) {
  const int ho = h / kStride, wo = w / kStride, p = ho * wo;
  std::fill(x, x + static_cast<std::size_t>(c_in) * h * w, T(0));
  for (int c = 0; c < c_in; ++c) {
    T* xc = x + static_cast<std::size_t>(c) * h * w;
    for (int ki = 0; ki < kKernel; ++ki)
      for (int kj = 0; kj < kKernel; ++kj) {
        const T* row = cols + (static_cast<std::size_t>(c) * kTaps + ki * kKernel + kj) * p;
        for (int oy = 0; oy < ho; ++oy) {
          const int iy = oy * kStride - kPad + ki;
          if (iy < 0 || iy >= h) continue;
          T* dst = xc + static_cast<std::size_t>(iy) * w;
          const T* src = row + oy * wo;
          for (int ox = 0; ox < wo; ++ox) {
            const int ix = ox * kStride - kPad + kj;
            if (ix >= 0 && ix < w) dst[ix] += src[ox];
          }
        }
      }
  }
}

template <typename T>
void check_conv_input(const Tensor<T>& x, int in_ch, const char* what) {
  if (x.rank() != 4 || x.dim(1) != in_ch)
    throw Error(ErrorKind::data_format, std::string(what) + ": expected (N," + std::to_string(in_ch) +
                                            ",H,W) input, got " + shape_str(x.shape));
}

}  // namespace detail

template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const ConvParams<T>& p) {
  const int out_ch = p.weight.dim(0), in_ch = p.weight.dim(1);
  detail::check_conv_input(x, in_ch, "conv2d");
  const int n = x.dim(0), h = x.dim(2), w = x.dim(3);
  if (h % 2 || w % 2) throw Error(ErrorKind::data_format, "conv2d: spatial size must be even");
  const int ho = h / 2, wo = w / 2, np = ho * wo, k = in_ch * kTaps;
  Tensor<T> y({n, out_ch, ho, wo});
  AlignedVector<T> cols(static_cast<std::size_t>(k) * np);
  detail::CMapMat<T> wm(p.weight.data.data(), out_ch, k);
  for (int s = 0; s < n; ++s) {
    detail::im2col(x.sample(s), in_ch, h, w, cols.data());
    detail::MapMat<T> ym(y.sample(s), out_ch, np);
    ym.noalias() = wm * detail::CMapMat<T>(cols.data(), k, np);
    for (int o = 0; o < out_ch; ++o) ym.row(o).array() += p.bias.data[o];
  }
  return y;
}

template <typename T>
ConvGrads<T> conv2d_backward(const Tensor<T>& x, const ConvParams<T>& p, const Tensor<T>& grad_out) {
  const int out_ch = p.weight.dim(0), in_ch = p.weight.dim(1);
  const int n = x.dim(0), h = x.dim(2), w = x.dim(3), np = (h / 2) * (w / 2), k = in_ch * kTaps;
  if (grad_out.shape != std::vector<int>{n, out_ch, h / 2, w / 2})
    throw Error(ErrorKind::data_format, "conv2d_backward: grad shape " + shape_str(grad_out.shape));
  ConvGrads<T> g{Tensor<T>(x.shape), p.zeros_like()};
  AlignedVector<T> cols(static_cast<std::size_t>(k) * np), dcols(cols.size());
  detail::CMapMat<T> wm(p.weight.data.data(), out_ch, k);
  detail::MapMat<T> dwm(g.params.weight.data.data(), out_ch, k);
  for (int s = 0; s < n; ++s) {
    detail::im2col(x.sample(s), in_ch, h, w, cols.data());
    detail::CMapMat<T> gm(grad_out.sample(s), out_ch, np);
    dwm.noalias() += gm * detail::CMapMat<T>(cols.data(), k, np).transpose();
    for (int o = 0; o < out_ch; ++o) g.params.bias.data[o] += gm.row(o).sum();
    detail::MapMat<T>(dcols.data(), k, np).noalias() = wm.transpose() * gm;
    detail::col2im(dcols.data(), in_ch, h, w, g.input.sample(s));
  }
  return g;
}

template <typename T>
Tensor<T> conv_transpose2d(const Tensor<T>& x, const ConvParams<T>& p) {
  const int in_ch = p.weight.dim(0), out_ch = p.weight.dim(1);
  detail::check_conv_input(x, in_ch, "conv_transpose2d");
  const int n = x.dim(0), h = x.dim(2), w = x.dim(3), np = h * w, k = out_ch * kTaps;
  Tensor<T> y({n, out_ch, 2 * h, 2 * w});
  AlignedVector<T> cols(static_cast<std::size_t>(k) * np);
  detail::CMapMat<T> wm(p.weight.data.data(), in_ch, k);
  const std::size_t plane = static_cast<std::size_t>(4) * h * w;
  for (int s = 0; s < n; ++s) {
    detail::MapMat<T>(cols.data(), k, np).noalias() = wm.transpose() * detail::CMapMat<T>(x.sample(s), in_ch, np);
    T* ys = y.sample(s);
    detail::col2im(cols.data(), out_ch, 2 * h, 2 * w, ys);
    for (int o = 0; o < out_ch; ++o) {
      T* yo = ys + o * plane;
      for (std::size_t i = 0; i < plane; ++i) yo[i] += p.bias.data[o];
    }
  }
  return y;
}

template <typename T>
ConvGrads<T> conv_transpose2d_backward(const Tensor<T>& x, const ConvParams<T>& p, const Tensor<T>& grad_out) {
  const int in_ch = p.weight.dim(0), out_ch = p.weight.dim(1);
  const int n = x.dim(0), h = x.dim(2), w = x.dim(3), np = h * w, k = out_ch * kTaps;
  if (grad_out.shape != std::vector<int>{n, out_ch, 2 * h, 2 * w})
    throw Error(ErrorKind::data_format, "conv_transpose2d_backward: grad shape " + shape_str(grad_out.shape));
  ConvGrads<T> g{Tensor<T>(x.shape), p.zeros_like()};
  AlignedVector<T> cols(static_cast<std::size_t>(k) * np);
  detail::CMapMat<T> wm(p.weight.data.data(), in_ch, k);
  detail::MapMat<T> dwm(g.params.weight.data.data(), in_ch, k);
  const std::size_t plane = static_cast<std::size_t>(4) * h * w;
  for (int s = 0; s < n; ++s) {
    const T* gs = grad_out.sample(s);
    detail::im2col(gs, out_ch, 2 * h, 2 * w, cols.data());
    detail::CMapMat<T> cm(cols.data(), k, np);
    detail::CMapMat<T> xm(x.sample(s), in_ch, np);
    dwm.noalias() += xm * cm.transpose();
    detail::MapMat<T>(g.input.sample(s), in_ch, np).noalias() = wm * cm;
    for (int o = 0; o < out_ch; ++o) {
      const T* go = gs + o * plane;
      T acc = 0;
      for (std::size_t i = 0; i < plane; ++i) acc += go[i];
      g.params.bias.data[o] += acc;
    }
  }
  return g;
}

}  // namespace occnav::nn
