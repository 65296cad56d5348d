#pragma once

#include <complex>
#include <vector>

#include "medsr/image.hpp"

namespace medsr {

using Complex = std::complex<double>;

/// Row-major complex grid; the shape of a 2D spectrum.
struct ComplexField {
  int width = 0;
  int height = 0;
  std::vector<Complex> values;

  ComplexField() = default;
  ComplexField(int w, int h) : width(w), height(h), values(static_cast<std::size_t>(w) * h) {}

  Complex& operator()(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
  const Complex& operator()(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }

  static ComplexField from_image(const Image& img);
};

/// In-place 1D DFT of any length. Powers of two use iterative radix-2,
/// other lengths go through Bluestein's chirp-z. `inverse` flips the sign of
/// the exponent and scales by 1/n.
void fft1d(std::vector<Complex>& data, bool inverse);

/// Forward 2D DFT, X(u,v) = sum x(a,b) exp(-2*pi*i*(u*a/W + v*b/H)),
/// unnormalized.
ComplexField fft2d(const Image& img);
ComplexField fft2d(ComplexField field);

/// Inverse 2D DFT including the 1/(W*H) factor.
ComplexField ifft2d(ComplexField spectrum);

}  // namespace medsr
