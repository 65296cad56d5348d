// FSIM: phase congruency (log-Gabor filter bank, Kovesi's PC_2 measure with
// the noise-threshold compensation FSIM uses) combined with Scharr gradient
// similarity.

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

#include "medsr/fft.hpp"
#include "medsr/metrics.hpp"
#include "metrics_internal.hpp"

namespace medsr::metrics {

namespace {

using detail::Plane;

constexpr int kScales = 4;
constexpr int kOrients = 4;
constexpr double kMinWavelength = 6.0;
constexpr double kMult = 2.0;
constexpr double kSigmaOnf = 0.55;
constexpr double kDThetaOnSigma = 1.2;
constexpr double kNoiseK = 2.0;
constexpr double kEpsilon = 1e-4;

// Normalized frequency coordinate of FFT bin i (already in unshifted order).
double freq(int i, int n) {
  if (n % 2 == 1) {
    const int shifted = (i + (n - 1) / 2) % n;
    return n == 1 ? 0.0 : static_cast<double>(shifted - (n - 1) / 2) / (n - 1);
  }
  const int shifted = (i + n / 2) % n;
  return static_cast<double>(shifted - n / 2) / n;
}

struct FilterBank {
  int rows = 0;
  int cols = 0;
  // filter[o][s], real-valued frequency responses.
  std::vector<std::vector<std::vector<double>>> filter;
  // Per orientation noise model terms.
  std::vector<double> em_n;
  std::vector<double> sum_an2;
  std::vector<double> sum_aiaj;

  FilterBank(int r, int c) : rows(r), cols(c) {
    const std::size_t n = static_cast<std::size_t>(rows) * cols;
    std::vector<double> radius(n), sin_t(n), cos_t(n), lowpass(n);
    for (int y = 0; y < rows; ++y) {
      for (int x = 0; x < cols; ++x) {
        const double fx = freq(x, cols);
        const double fy = freq(y, rows);
        const std::size_t i = static_cast<std::size_t>(y) * cols + x;
        const double rad = std::sqrt(fx * fx + fy * fy);
        lowpass[i] = 1.0 / (1.0 + std::pow(rad / 0.45, 2.0 * 15.0));
        radius[i] = (x == 0 && y == 0) ? 1.0 : rad;
        const double theta = std::atan2(-fy, fx);
        sin_t[i] = std::sin(theta);
        cos_t[i] = std::cos(theta);
      }
    }

    std::vector<std::vector<double>> log_gabor(kScales, std::vector<double>(n));
    const double denom = 2.0 * std::log(kSigmaOnf) * std::log(kSigmaOnf);
    for (int s = 0; s < kScales; ++s) {
      const double fo = 1.0 / (kMinWavelength * std::pow(kMult, s));
      for (std::size_t i = 0; i < n; ++i) {
        const double l = std::log(radius[i] / fo);
        log_gabor[s][i] = std::exp(-(l * l) / denom) * lowpass[i];
      }
      log_gabor[s][0] = 0.0;
    }

    const double theta_sigma = std::numbers::pi / kOrients / kDThetaOnSigma;
    filter.assign(kOrients, std::vector<std::vector<double>>(kScales, std::vector<double>(n)));
    em_n.assign(kOrients, 0.0);
    sum_an2.assign(kOrients, 0.0);
    sum_aiaj.assign(kOrients, 0.0);
    const double root_n = std::sqrt(static_cast<double>(n));

    for (int o = 0; o < kOrients; ++o) {
      const double angle = o * std::numbers::pi / kOrients;
      const double ca = std::cos(angle), sa = std::sin(angle);
      std::vector<double> spread(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double ds = sin_t[i] * ca - cos_t[i] * sa;
        const double dc = cos_t[i] * ca + sin_t[i] * sa;
        const double dtheta = std::abs(std::atan2(ds, dc));
        spread[i] = std::exp(-(dtheta * dtheta) / (2.0 * theta_sigma * theta_sigma));
      }

      std::vector<std::vector<double>> spatial(kScales, std::vector<double>(n));
      for (int s = 0; s < kScales; ++s) {
        auto& f = filter[o][s];
        for (std::size_t i = 0; i < n; ++i) f[i] = log_gabor[s][i] * spread[i];
        if (s == 0) {
          for (double v : f) em_n[o] += v * v;
        }
        ComplexField field(cols, rows);
        for (std::size_t i = 0; i < n; ++i) field.values[i] = Complex(f[i], 0.0);
        const ComplexField back = ifft2d(std::move(field));
        for (std::size_t i = 0; i < n; ++i) spatial[s][i] = back.values[i].real() * root_n;
      }
      for (int s = 0; s < kScales; ++s) {
        for (double v : spatial[s]) sum_an2[o] += v * v;
      }
      for (int si = 0; si < kScales - 1; ++si) {
        for (int sj = si + 1; sj < kScales; ++sj) {
          for (std::size_t i = 0; i < n; ++i) sum_aiaj[o] += spatial[si][i] * spatial[sj][i];
        }
      }
    }
  }
};

double median(std::vector<double> v) {
  const std::size_t n = v.size();
  auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (n % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(v.begin(), mid);
  return 0.5 * (lower + upper);
}

// PC over a padded power-of-two plane.
std::vector<double> phase_congruency_padded(const Plane& img, const FilterBank& bank) {
  const int rows = bank.rows, cols = bank.cols;
  const std::size_t n = static_cast<std::size_t>(rows) * cols;

  ComplexField spectrum(cols, rows);
  for (std::size_t i = 0; i < n; ++i) spectrum.values[i] = Complex(img.v[i], 0.0);
  spectrum = fft2d(std::move(spectrum));

  std::vector<double> energy_all(n, 0.0), an_all(n, 0.0);
  std::vector<std::vector<Complex>> eo(kScales);

  for (int o = 0; o < kOrients; ++o) {
    std::vector<double> sum_e(n, 0.0), sum_o(n, 0.0), sum_an(n, 0.0);
    for (int s = 0; s < kScales; ++s) {
      const auto& f = bank.filter[o][s];
      ComplexField prod(cols, rows);
      for (std::size_t i = 0; i < n; ++i) prod.values[i] = spectrum.values[i] * f[i];
      eo[s] = ifft2d(std::move(prod)).values;
      for (std::size_t i = 0; i < n; ++i) {
        sum_an[i] += std::abs(eo[s][i]);
        sum_e[i] += eo[s][i].real();
        sum_o[i] += eo[s][i].imag();
      }
    }

    std::vector<double> energy(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double x_energy = std::sqrt(sum_e[i] * sum_e[i] + sum_o[i] * sum_o[i]) + kEpsilon;
      const double mean_e = sum_e[i] / x_energy;
      const double mean_o = sum_o[i] / x_energy;
      for (int s = 0; s < kScales; ++s) {
        const double e = eo[s][i].real(), od = eo[s][i].imag();
        energy[i] += e * mean_e + od * mean_o - std::abs(e * mean_o - od * mean_e);
      }
    }

    std::vector<double> e2(n);
    for (std::size_t i = 0; i < n; ++i) e2[i] = std::norm(eo[0][i]);
    const double mean_e2n = -median(std::move(e2)) / std::log(0.5);
    const double noise_power = mean_e2n / bank.em_n[o];
    const double noise_energy2 = 2.0 * noise_power * bank.sum_an2[o] + 4.0 * noise_power * bank.sum_aiaj[o];
    const double tau = std::sqrt(noise_energy2 / 2.0);
    const double noise_mean = tau * std::sqrt(std::numbers::pi / 2.0);
    const double noise_sigma = std::sqrt((2.0 - std::numbers::pi / 2.0) * tau * tau);
    // The PC_2 measure overestimates noise by roughly 1.7 for these filters.
    const double threshold = (noise_mean + kNoiseK * noise_sigma) / 1.7;

    for (std::size_t i = 0; i < n; ++i) {
      energy_all[i] += std::max(energy[i] - threshold, 0.0);
      an_all[i] += sum_an[i];
    }
  }

  std::vector<double> pc(n);
  for (std::size_t i = 0; i < n; ++i) pc[i] = an_all[i] > 0.0 ? energy_all[i] / an_all[i] : 0.0;
  return pc;
}

Plane pad_reflect_pow2(const Plane& p, int& ox, int& oy) {
  const int pw = static_cast<int>(std::bit_ceil(static_cast<unsigned>(p.width)));
  const int ph = static_cast<int>(std::bit_ceil(static_cast<unsigned>(p.height)));
  ox = (pw - p.width) / 2;
  oy = (ph - p.height) / 2;
  Plane out(pw, ph);
  for (int y = 0; y < ph; ++y) {
    const int sy = border_index(y - oy, p.height, BorderMode::reflect);
    for (int x = 0; x < pw; ++x) out(x, y) = p(border_index(x - ox, p.width, BorderMode::reflect), sy);
  }
  return out;
}

std::vector<double> phase_congruency_plane(const Plane& p, const FilterBank& bank) {
  int ox = 0, oy = 0;
  const Plane padded = pad_reflect_pow2(p, ox, oy);
  const auto full = phase_congruency_padded(padded, bank);
  std::vector<double> pc(static_cast<std::size_t>(p.width) * p.height);
  for (int y = 0; y < p.height; ++y) {
    for (int x = 0; x < p.width; ++x) {
      pc[static_cast<std::size_t>(y) * p.width + x] = full[static_cast<std::size_t>(y + oy) * bank.cols + x + ox];
    }
  }
  return pc;
}

FilterBank bank_for(int width, int height) {
  return FilterBank(static_cast<int>(std::bit_ceil(static_cast<unsigned>(height))),
                    static_cast<int>(std::bit_ceil(static_cast<unsigned>(width))));
}

// Scharr magnitude, zero padding outside the image.
std::vector<double> scharr_magnitude(const Plane& p) {
  auto at = [&](int x, int y) { return (x < 0 || y < 0 || x >= p.width || y >= p.height) ? 0.0 : p(x, y); };
  std::vector<double> g(static_cast<std::size_t>(p.width) * p.height);
  for (int y = 0; y < p.height; ++y) {
    for (int x = 0; x < p.width; ++x) {
      const double gx = (3.0 * (at(x + 1, y - 1) - at(x - 1, y - 1)) + 10.0 * (at(x + 1, y) - at(x - 1, y)) +
                         3.0 * (at(x + 1, y + 1) - at(x - 1, y + 1))) /
                        16.0;
      const double gy = (3.0 * (at(x - 1, y + 1) - at(x - 1, y - 1)) + 10.0 * (at(x, y + 1) - at(x, y - 1)) +
                         3.0 * (at(x + 1, y + 1) - at(x + 1, y - 1))) /
                        16.0;
      g[static_cast<std::size_t>(y) * p.width + x] = std::sqrt(gx * gx + gy * gy);
    }
  }
  return g;
}

}  // namespace

std::vector<double> phase_congruency(const Image& img255) {
  const FilterBank bank = bank_for(img255.width(), img255.height());
  return phase_congruency_plane(detail::to_plane(img255), bank);
}

double fsim(const Image& ref, const Image& x) {
  detail::require_same_shape(ref, x);
  detail::require_min_dim(ref, 32, "fsim");
  constexpr double t1 = 0.85;
  constexpr double t2 = 160.0;

  const Plane a = detail::to_plane(ref, 255.0);
  const Plane b = detail::to_plane(x, 255.0);
  const FilterBank bank = bank_for(ref.width(), ref.height());
  const auto pc_a = phase_congruency_plane(a, bank);
  const auto pc_b = phase_congruency_plane(b, bank);
  const auto g_a = scharr_magnitude(a);
  const auto g_b = scharr_magnitude(b);

  double num = 0.0, den = 0.0, unweighted = 0.0;
  for (std::size_t i = 0; i < pc_a.size(); ++i) {
    const double s_pc = (2.0 * pc_a[i] * pc_b[i] + t1) / (pc_a[i] * pc_a[i] + pc_b[i] * pc_b[i] + t1);
    const double s_g = (2.0 * g_a[i] * g_b[i] + t2) / (g_a[i] * g_a[i] + g_b[i] * g_b[i] + t2);
    const double pcm = std::max(pc_a[i], pc_b[i]);
    num += s_pc * s_g * pcm;
    den += pcm;
    unweighted += s_pc * s_g;
  }
  // Featureless pair (no phase congruency anywhere): fall back to uniform weights.
  if (den <= 0.0) return unweighted / static_cast<double>(pc_a.size());
  return num / den;
}

}  // namespace medsr::metrics
