// Pixel-domain multi-scale VIF (Sheikh & Bovik), four Gaussian-window scales.

#include <cmath>

#include "medsr/metrics.hpp"
#include "metrics_internal.hpp"

namespace medsr::metrics {

namespace {

using detail::Plane;

Plane subsample2(const Plane& p) {
  Plane out((p.width + 1) / 2, (p.height + 1) / 2);
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) out(x, y) = p(2 * x, 2 * y);
  }
  return out;
}

}  // namespace

double vif(const Image& ref, const Image& x) {
  detail::require_same_shape(ref, x);
  detail::require_min_dim(ref, 32, "vif");
  constexpr double sigma_n2 = 2.0;
  constexpr double eps = 1e-10;

  Plane a = detail::to_plane(ref, 255.0);
  Plane b = detail::to_plane(x, 255.0);
  double num = 0.0, den = 0.0;

  for (int scale = 1; scale <= 4; ++scale) {
    const int n = (1 << (4 - scale + 1)) + 1;
    const auto win = detail::gaussian_window(n, n / 5.0);
    if (scale > 1) {
      a = detail::filter_valid(a, win);
      b = detail::filter_valid(b, win);
      if (a.v.empty()) break;
      a = subsample2(a);
      b = subsample2(b);
    }
    const Plane mu_a = detail::filter_valid(a, win);
    if (mu_a.v.empty()) break;
    const Plane mu_b = detail::filter_valid(b, win);
    const Plane aa = detail::filter_valid(detail::multiply(a, a), win);
    const Plane bb = detail::filter_valid(detail::multiply(b, b), win);
    const Plane ab = detail::filter_valid(detail::multiply(a, b), win);

    for (std::size_t i = 0; i < mu_a.v.size(); ++i) {
      double s1 = std::max(aa.v[i] - mu_a.v[i] * mu_a.v[i], 0.0);
      const double s2 = std::max(bb.v[i] - mu_b.v[i] * mu_b.v[i], 0.0);
      const double s12 = ab.v[i] - mu_a.v[i] * mu_b.v[i];

      double g = s12 / (s1 + eps);
      double sv = s2 - g * s12;
      if (s1 < eps) {
        g = 0.0;
        sv = s2;
        s1 = 0.0;
      }
      if (s2 < eps) {
        g = 0.0;
        sv = 0.0;
      }
      if (g < 0.0) {
        sv = s2;
        g = 0.0;
      }
      if (sv <= eps) sv = eps;

      num += std::log2(1.0 + g * g * s1 / (sv + sigma_n2));
      den += std::log2(1.0 + s1 / sigma_n2);
    }
  }
  // A flat reference carries no information; only an exact copy preserves it.
  if (den <= 0.0) return ref == x ? 1.0 : 0.0;
  return num / den;
}

}  // namespace medsr::metrics
