#pragma once

#include <span>

#include "medsr/image.hpp"

namespace medsr {

/// True 2D convolution, same-size output:
///   out(x,y) = sum_{i,j} k(i,j) * img(x - i + cx, y - j + cy)
/// with (cx, cy) the kernel center. The kernel is flipped relative to
/// correlation, so correlate(img, k) == convolve2d(img, k.flipped()).
/// Sums accumulate in double.
Image convolve2d(const Image& img, const Kernel2D& k, BorderMode border);

/// Correlation with the same border handling (no kernel flip).
Image correlate2d(const Image& img, const Kernel2D& k, BorderMode border);

/// Separable correlation: a horizontal pass with `row_taps` then a vertical
/// pass with `col_taps`. Both tap counts must be odd. Intermediate rows are
/// kept in double.
Image correlate_separable(const Image& img, std::span<const double> row_taps, std::span<const double> col_taps,
                          BorderMode border);

}  // namespace medsr
