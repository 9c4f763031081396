#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <new>
#include <numeric>
#include <string>
#include <vector>

#include "occnav/error.hpp"
#include "occnav/rng.hpp"

namespace occnav::nn {

/// Allocator with a fixed 64-byte alignment. Vectorized kernels choose their
/// peeling from the buffer address, so a fixed alignment keeps floating-point
/// results independent of where the heap placed a tensor.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlign{64};

  AlignedAllocator() = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlign)); }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, kAlign); }

  template <typename U>
  bool operator==(const AlignedAllocator<U>&) const noexcept {
    return true;
  }
};

template <typename T>
using AlignedVector = std::vector<T, AlignedAllocator<T>>;

/// Dense row-major array, usually NCHW. T is float for training and double
/// for gradient checking.
template <typename T>
struct Tensor {
  std::vector<int> shape;
  AlignedVector<T> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> s, T fill = T(0)) : shape(std::move(s)), data(count(shape), fill) {}

  static std::size_t count(const std::vector<int>& s) {
    return std::accumulate(s.begin(), s.end(), std::size_t{1},
                           [](std::size_t a, int b) { return a * static_cast<std::size_t>(b); });
  }

  std::size_t size() const { return data.size(); }
  int rank() const { return static_cast<int>(shape.size()); }
  int dim(int i) const { return shape.at(static_cast<std::size_t>(i)); }

  T* sample(int n) { return data.data() + static_cast<std::size_t>(n) * (size() / shape[0]); }
  const T* sample(int n) const { return data.data() + static_cast<std::size_t>(n) * (size() / shape[0]); }

  T& at(int n, int c, int h, int w) {
    return data[((static_cast<std::size_t>(n) * shape[1] + c) * shape[2] + h) * shape[3] + w];
  }
  const T& at(int n, int c, int h, int w) const {
    return data[((static_cast<std::size_t>(n) * shape[1] + c) * shape[2] + h) * shape[3] + w];
  }

  void fill(T v) { std::fill(data.begin(), data.end(), v); }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out;
    out.shape = shape;
    out.data.assign(data.begin(), data.end());
    return out;
  }

  friend bool operator==(const Tensor&, const Tensor&) = default;
};

inline std::string shape_str(const std::vector<int>& s) {
  std::string out = "(";
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i]);
  return out + ")";
}

template <typename T>
void require_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* what) {
  if (a.shape != b.shape)
    throw Error(ErrorKind::data_format,
                std::string(what) + ": shape mismatch " + shape_str(a.shape) + " vs " + shape_str(b.shape));
}

template <typename T>
bool all_finite(const Tensor<T>& t) {
  return std::all_of(t.data.begin(), t.data.end(), [](T v) { return std::isfinite(v); });
}

template <typename T>
void add_inplace(Tensor<T>& acc, const Tensor<T>& x) {
  require_same_shape(acc, x, "add");
  for (std::size_t i = 0; i < acc.size(); ++i) acc.data[i] += x.data[i];
}

template <typename T>
void fill_normal(Tensor<T>& t, Rng& rng, double stddev) {
  for (auto& v : t.data) v = static_cast<T>(stddev * rng.normal());
}

template <typename T>
double dot(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a.data[i]) * b.data[i];
  return s;
}

}  // namespace occnav::nn
