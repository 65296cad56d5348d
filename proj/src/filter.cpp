#include "medsr/filter.hpp"

#include <vector>

#include "medsr/error.hpp"

namespace medsr {

namespace {

double sample(const Image& img, int x, int y, BorderMode border) {
  const int xi = border_index(x, img.width(), border);
  const int yi = border_index(y, img.height(), border);
  if (xi < 0 || yi < 0) return 0.0;
  return img(xi, yi);
}

}  // namespace

Image convolve2d(const Image& img, const Kernel2D& k, BorderMode border) {
  const int cx = k.center_x();
  const int cy = k.center_y();
  Image out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      double acc = 0.0;
      for (int j = 0; j < k.height(); ++j) {
        for (int i = 0; i < k.width(); ++i) acc += k(i, j) * sample(img, x - i + cx, y - j + cy, border);
      }
      out(x, y) = static_cast<float>(acc);
    }
  }
  return out;
}

Image correlate2d(const Image& img, const Kernel2D& k, BorderMode border) {
  return convolve2d(img, k.flipped(), border);
}

Image correlate_separable(const Image& img, std::span<const double> row_taps, std::span<const double> col_taps,
                          BorderMode border) {
  if (row_taps.size() % 2 == 0 || col_taps.size() % 2 == 0) {
    fail(ErrorKind::shape, "separable taps must have odd length");
  }
  const int w = img.width();
  const int h = img.height();
  const int rx = static_cast<int>(row_taps.size() / 2);
  const int ry = static_cast<int>(col_taps.size() / 2);

  std::vector<double> tmp(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int t = -rx; t <= rx; ++t) {
        const int xi = border_index(x + t, w, border);
        if (xi >= 0) acc += row_taps[t + rx] * img(xi, y);
      }
      tmp[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }

  Image out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int t = -ry; t <= ry; ++t) {
        const int yi = border_index(y + t, h, border);
        if (yi >= 0) acc += col_taps[t + ry] * tmp[static_cast<std::size_t>(yi) * w + x];
      }
      out(x, y) = static_cast<float>(acc);
    }
  }
  return out;
}

}  // namespace medsr
