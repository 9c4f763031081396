#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "occnav/error.hpp"
#include "occnav/grid.hpp"

namespace occnav {

/// Probability to gray level: 0 -> 0, 0.5 -> 128, 1 -> 255, piecewise linear.
inline std::uint8_t prob_to_gray(double p) {
  if (!(p > 0.0)) return 0;
  if (p >= 1.0) return 255;
  const double v = p <= 0.5 ? 256.0 * p : 128.0 + 254.0 * (p - 0.5);
  return static_cast<std::uint8_t>(std::lround(v));
}

struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;  // 1 gray, 3 rgb
  std::vector<std::uint8_t> pixels;

  Image() = default;
  Image(int w, int h, int ch, std::uint8_t fill = 0)
      : width(w), height(h), channels(ch), pixels(static_cast<std::size_t>(w) * h * ch, fill) {}

  std::uint8_t* px(int x, int y) { return pixels.data() + (static_cast<std::size_t>(y) * width + x) * channels; }
};

/// Grayscale image of a probability raster, one pixel per cell (row 0 on top).
/// With `stretch`, [0.5 - half_band, 0.5 + half_band] is expanded to [0, 1].
inline Image render_prob(const Grid<float>& g, double stretch_half_band = 0.0) {
  Image img(g.cols, g.rows, 1);
  for (int r = 0; r < g.rows; ++r)
    for (int c = 0; c < g.cols; ++c) {
      double p = g.at(r, c);
      if (stretch_half_band > 0.0) p = 0.5 + (p - 0.5) / (2.0 * stretch_half_band);
      *img.px(c, r) = prob_to_gray(p);
    }
  return img;
}

inline Image to_rgb(const Image& gray) {
  if (gray.channels == 3) return gray;
  Image out(gray.width, gray.height, 3);
  for (std::size_t i = 0; i < gray.pixels.size(); ++i)
    for (int k = 0; k < 3; ++k) out.pixels[i * 3 + k] = gray.pixels[i];
  return out;
}

/// Binary PGM (P5) for gray images, PPM (P6) for rgb.
inline void write_pnm(const Image& img, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot write " + path);
  f << (img.channels == 1 ? "P5" : "P6") << "\n" << img.width << " " << img.height << "\n255\n";
  f.write(reinterpret_cast<const char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
  if (!f) throw io_error("write failed: " + path);
}

}  // namespace occnav
