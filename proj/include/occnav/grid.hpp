#pragma once

#include <cstddef>
#include <vector>

namespace occnav {

/// Dense row-major 2D raster.
template <typename T>
struct Grid {
  int rows = 0;
  int cols = 0;
  std::vector<T> data;

  Grid() = default;
  Grid(int r, int c, T fill = T{}) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill) {}

  bool in_bounds(int r, int c) const { return r >= 0 && r < rows && c >= 0 && c < cols; }
  std::size_t index(int r, int c) const { return static_cast<std::size_t>(r) * cols + c; }
  T& at(int r, int c) { return data[index(r, c)]; }
  const T& at(int r, int c) const { return data[index(r, c)]; }
  std::size_t size() const { return data.size(); }

  friend bool operator==(const Grid&, const Grid&) = default;
};

struct Cell {
  int row = 0;
  int col = 0;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

}  // namespace occnav
