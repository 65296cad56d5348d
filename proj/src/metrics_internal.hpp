#pragma once

#include <span>
#include <string>
#include <vector>

#include "medsr/error.hpp"
#include "medsr/image.hpp"

namespace medsr::metrics::detail {

/// Double-precision working plane.
struct Plane {
  int width = 0;
  int height = 0;
  std::vector<double> v;

  Plane() = default;
  Plane(int w, int h, double fill = 0.0) : width(w), height(h), v(static_cast<std::size_t>(w) * h, fill) {}

  double& operator()(int x, int y) { return v[static_cast<std::size_t>(y) * width + x]; }
  double operator()(int x, int y) const { return v[static_cast<std::size_t>(y) * width + x]; }
};

Plane to_plane(const Image& img, double scale = 1.0);

/// Elementwise product.
Plane multiply(const Plane& a, const Plane& b);

/// 'valid' correlation with a separable kernel: output shrinks by taps-1
/// along each axis. Returns an empty (0x0) plane if the kernel does not fit.
Plane filter_valid(const Plane& p, std::span<const double> taps);

/// Normalized 1D Gaussian of length n (n odd), sigma in samples.
std::vector<double> gaussian_window(int n, double sigma);

void require_same_shape(const Image& a, const Image& b);
void require_min_dim(const Image& img, int min_dim, const char* metric);

}  // namespace medsr::metrics::detail
