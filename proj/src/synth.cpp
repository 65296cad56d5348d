#include "medsr/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "medsr/degrade.hpp"
#include "medsr/error.hpp"
#include "medsr/io.hpp"
#include "medsr/prng.hpp"

namespace medsr {

namespace {

struct Canvas {
  int n;
  std::vector<double> v;
  explicit Canvas(int size, double fill = 0.0) : n(size), v(static_cast<std::size_t>(size) * size, fill) {}
  double& at(int x, int y) { return v[static_cast<std::size_t>(y) * n + x]; }

  // Soft-edged ellipse in unit coordinates ([-1,1] across the canvas).
  void ellipse(double cx, double cy, double rx, double ry, double angle, double value, double edge = 0.04) {
    const double c = std::cos(angle), s = std::sin(angle);
    for (int y = 0; y < n; ++y) {
      for (int x = 0; x < n; ++x) {
        const double u = (2.0 * x + 1.0) / n - 1.0 - cx;
        const double w = (2.0 * y + 1.0) / n - 1.0 - cy;
        const double a = (u * c + w * s) / rx;
        const double b = (-u * s + w * c) / ry;
        const double r = std::sqrt(a * a + b * b);
        const double t = std::clamp((1.0 - r) / edge + 0.5, 0.0, 1.0);
        at(x, y) += value * t;
      }
    }
  }

  Image image() const {
    std::vector<float> data(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) data[i] = static_cast<float>(std::clamp(v[i], 0.0, 1.0));
    return Image(n, n, std::move(data));
  }
};

void brain(Canvas& c, Prng& rng) {
  c.ellipse(0.0, 0.0, 0.85, 0.95, 0.0, 0.75);
  c.ellipse(0.0, 0.0, 0.78, 0.88, 0.0, -0.35);
  c.ellipse(0.0, 0.0, 0.7, 0.8, 0.0, -0.1);
  c.ellipse(-0.15, 0.0, 0.08, 0.3, 0.15, -0.25);
  c.ellipse(0.15, 0.0, 0.08, 0.3, -0.15, -0.25);
  for (int i = 0; i < 6; ++i) {
    c.ellipse(rng.uniform(-0.5, 0.5), rng.uniform(-0.6, 0.6), rng.uniform(0.05, 0.15), rng.uniform(0.05, 0.15),
              rng.uniform(0.0, std::numbers::pi), rng.uniform(-0.1, 0.15));
  }
}

void chest(Canvas& c, Prng& rng) {
  c.ellipse(0.0, 0.0, 0.95, 0.95, 0.0, 0.55);
  c.ellipse(-0.42, -0.05, 0.3, 0.6, 0.1, -0.35);
  c.ellipse(0.42, -0.05, 0.3, 0.6, -0.1, -0.35);
  c.ellipse(0.1, 0.3, 0.25, 0.22, 0.3, 0.2);
  const double phase = rng.uniform(0.0, 1.0);
  for (int y = 0; y < c.n; ++y) {
    for (int x = 0; x < c.n; ++x) {
      const double t = static_cast<double>(y) / c.n;
      c.at(x, y) += 0.08 * std::sin(2.0 * std::numbers::pi * (7.0 * t + phase));
    }
  }
}

void renal(Canvas& c, Prng& rng) {
  for (auto& v : c.v) v = 0.15;
  c.ellipse(rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1), 0.55, 0.32, rng.uniform(-0.5, 0.5), 0.4);
  c.ellipse(0.0, 0.0, 0.25, 0.12, 0.2, 0.25);
  // Multiplicative speckle, smoothed to a grain of a couple of pixels.
  std::vector<float> noise(c.v.size());
  for (auto& v : noise) v = static_cast<float>(rng.normal());
  const Image grain = gaussian_blur(Image(c.n, c.n, std::move(noise)), 0.8);
  auto g = grain.pixels();
  for (std::size_t i = 0; i < c.v.size(); ++i) c.v[i] *= 1.0 + 0.35 * g[i];
}

void nephro(Canvas& c, Prng& rng) {
  c.ellipse(0.0, 0.0, 0.9, 0.7, 0.0, 0.35);
  c.ellipse(-0.45, 0.05, 0.22, 0.3, 0.2, 0.15);
  c.ellipse(0.45, 0.05, 0.22, 0.3, -0.2, 0.15);
  c.ellipse(0.0, 0.4, 0.12, 0.12, 0.0, 0.45);
  for (int i = 0; i < 3; ++i) {
    const double side = i % 2 == 0 ? -0.45 : 0.45;
    c.ellipse(side + rng.uniform(-0.1, 0.1), rng.uniform(-0.15, 0.2), 0.04, 0.04, 0.0, 0.5, 0.2);
  }
}

void spine(Canvas& c, Prng& rng) {
  for (auto& v : c.v) v = 0.1;
  const double tilt = rng.uniform(-0.15, 0.15);
  for (int k = -3; k <= 3; ++k) {
    const double cy = 0.28 * k;
    c.ellipse(tilt * cy, cy, 0.28, 0.1, tilt, 0.6, 0.08);
  }
  c.ellipse(0.0, 0.0, 0.06, 1.0, tilt, 0.15);
}

}  // namespace

const std::vector<std::string_view>& synth_domains() {
  static const std::vector<std::string_view> names = {"brain", "chest", "renal", "nephro", "spine"};
  return names;
}

Image synth_image(std::string_view domain, int size, std::uint64_t seed) {
  if (size < 8) fail(ErrorKind::config, "synthetic images must be at least 8x8");
  Prng rng(seed ^ fnv1a64(domain));
  Canvas c(size);
  if (domain == "brain") {
    brain(c, rng);
  } else if (domain == "chest") {
    chest(c, rng);
  } else if (domain == "renal") {
    renal(c, rng);
  } else if (domain == "nephro") {
    nephro(c, rng);
  } else if (domain == "spine") {
    spine(c, rng);
  } else {
    fail(ErrorKind::usage, "unknown synthetic domain '" + std::string(domain) + "'");
  }
  // Fine texture so the sharpness metrics have something to measure.
  for (auto& v : c.v) v += 0.01 * rng.normal();
  return gaussian_blur(c.image(), 0.6);
}

std::size_t write_synth_corpus(const std::filesystem::path& dir, int images_per_domain, int size, std::uint64_t seed) {
  std::size_t count = 0;
  for (auto domain : synth_domains()) {
    const auto sub = dir / std::string(domain);
    std::filesystem::create_directories(sub);
    for (int i = 0; i < images_per_domain; ++i) {
      char name[64];
      std::snprintf(name, sizeof name, "%s_%02d.pgm", std::string(domain).c_str(), i);
      save_pgm(synth_image(domain, size, seed + static_cast<std::uint64_t>(i)), sub / name);
      ++count;
    }
  }
  return count;
}

}  // namespace medsr
