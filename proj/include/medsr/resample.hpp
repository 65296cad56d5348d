#pragma once

#include <string_view>
#include <vector>

#include "medsr/image.hpp"

namespace medsr {

enum class ResampleKernel { nearest, bilinear, bicubic };

ResampleKernel parse_resample_kernel(std::string_view name);
std::string_view to_string(ResampleKernel kernel) noexcept;

/// Kernel value at offset t (in source pixels). Nearest is the box on
/// [-0.5, 0.5), bilinear the triangle, bicubic Catmull-Rom (a = -0.5).
double resample_kernel_value(ResampleKernel kernel, double t) noexcept;

/// Half-width of the kernel's support in source pixels, before stretching.
double resample_kernel_radius(ResampleKernel kernel) noexcept;

/// One output sample's source taps along an axis. Indices are already
/// clamped into [0, in_size) and weights sum to one.
struct AxisTaps {
  std::vector<int> index;
  std::vector<double> weight;
};

/// Source taps for every output position along one axis. The output center
/// maps to src = (dst + 0.5) * in/out - 0.5; when `antialias` is set and the
/// axis shrinks, the kernel is stretched by in/out.
std::vector<AxisTaps> resample_axis_taps(int in_size, int out_size, ResampleKernel kernel, bool antialias);

/// Separable resize with clamp borders.
Image resample(const Image& img, int out_w, int out_h, ResampleKernel kernel, bool antialias);

}  // namespace medsr
