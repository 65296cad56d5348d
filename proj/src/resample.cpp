#include "medsr/resample.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "medsr/error.hpp"

namespace medsr {

ResampleKernel parse_resample_kernel(std::string_view name) {
  if (name == "nearest") return ResampleKernel::nearest;
  if (name == "bilinear") return ResampleKernel::bilinear;
  if (name == "bicubic") return ResampleKernel::bicubic;
  fail(ErrorKind::usage, "unknown resample kernel '" + std::string(name) + "'");
}

std::string_view to_string(ResampleKernel kernel) noexcept {
  switch (kernel) {
    case ResampleKernel::nearest: return "nearest";
    case ResampleKernel::bilinear: return "bilinear";
    case ResampleKernel::bicubic: return "bicubic";
  }
  return "?";
}

double resample_kernel_value(ResampleKernel kernel, double t) noexcept {
  switch (kernel) {
    case ResampleKernel::nearest: return (t >= -0.5 && t < 0.5) ? 1.0 : 0.0;
    case ResampleKernel::bilinear: {
      const double a = std::abs(t);
      return a < 1.0 ? 1.0 - a : 0.0;
    }
    case ResampleKernel::bicubic: {
      constexpr double a = -0.5;
      const double x = std::abs(t);
      if (x <= 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
      if (x < 2.0) return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
      return 0.0;
    }
  }
  return 0.0;
}

double resample_kernel_radius(ResampleKernel kernel) noexcept {
  switch (kernel) {
    case ResampleKernel::nearest: return 0.5;
    case ResampleKernel::bilinear: return 1.0;
    case ResampleKernel::bicubic: return 2.0;
  }
  return 0.0;
}

std::vector<AxisTaps> resample_axis_taps(int in_size, int out_size, ResampleKernel kernel, bool antialias) {
  const double scale = static_cast<double>(in_size) / static_cast<double>(out_size);
  const double stretch = (antialias && scale > 1.0) ? scale : 1.0;
  const double radius = resample_kernel_radius(kernel) * stretch;

  std::vector<AxisTaps> taps(static_cast<std::size_t>(out_size));
  for (int dst = 0; dst < out_size; ++dst) {
    const double src = (dst + 0.5) * scale - 0.5;
    const int first = static_cast<int>(std::floor(src - radius));
    const int last = static_cast<int>(std::ceil(src + radius));
    AxisTaps& t = taps[dst];
    double total = 0.0;
    for (int j = first; j <= last; ++j) {
      const double w = resample_kernel_value(kernel, (j - src) / stretch);
      if (w == 0.0) continue;
      t.index.push_back(std::clamp(j, 0, in_size - 1));
      t.weight.push_back(w);
      total += w;
    }
    for (double& w : t.weight) w /= total;
  }
  return taps;
}

Image resample(const Image& img, int out_w, int out_h, ResampleKernel kernel, bool antialias) {
  if (out_w < 1 || out_h < 1) fail(ErrorKind::precondition, "resample target must be at least 1x1");
  const auto xs = resample_axis_taps(img.width(), out_w, kernel, antialias);
  const auto ys = resample_axis_taps(img.height(), out_h, kernel, antialias);

  const int in_h = img.height();
  std::vector<double> rows(static_cast<std::size_t>(out_w) * in_h);
  for (int y = 0; y < in_h; ++y) {
    for (int x = 0; x < out_w; ++x) {
      double acc = 0.0;
      const AxisTaps& t = xs[x];
      for (std::size_t k = 0; k < t.index.size(); ++k) acc += t.weight[k] * img(t.index[k], y);
      rows[static_cast<std::size_t>(y) * out_w + x] = acc;
    }
  }

  Image out(out_w, out_h);
  for (int y = 0; y < out_h; ++y) {
    const AxisTaps& t = ys[y];
    for (int x = 0; x < out_w; ++x) {
      double acc = 0.0;
      for (std::size_t k = 0; k < t.index.size(); ++k) acc += t.weight[k] * rows[static_cast<std::size_t>(t.index[k]) * out_w + x];
      out(x, y) = static_cast<float>(acc);
    }
  }
  return out;
}

}  // namespace medsr
