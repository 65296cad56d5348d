#include "medsr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "metrics_internal.hpp"

namespace medsr::metrics {

namespace detail {

Plane to_plane(const Image& img, double scale) {
  Plane p(img.width(), img.height());
  auto px = img.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) p.v[i] = static_cast<double>(px[i]) * scale;
  return p;
}

Plane multiply(const Plane& a, const Plane& b) {
  Plane out(a.width, a.height);
  for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] = a.v[i] * b.v[i];
  return out;
}

Plane filter_valid(const Plane& p, std::span<const double> taps) {
  const int n = static_cast<int>(taps.size());
  const int ow = p.width - n + 1;
  const int oh = p.height - n + 1;
  if (ow < 1 || oh < 1) return {};
  Plane rows(ow, p.height);
  for (int y = 0; y < p.height; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int t = 0; t < n; ++t) acc += taps[t] * p(x + t, y);
      rows(x, y) = acc;
    }
  }
  Plane out(ow, oh);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int t = 0; t < n; ++t) acc += taps[t] * rows(x, y + t);
      out(x, y) = acc;
    }
  }
  return out;
}

std::vector<double> gaussian_window(int n, double sigma) {
  std::vector<double> w(static_cast<std::size_t>(n));
  const double c = (n - 1) / 2.0;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const double d = i - c;
    w[i] = std::exp(-d * d / (2.0 * sigma * sigma));
    total += w[i];
  }
  for (double& v : w) v /= total;
  return w;
}

void require_same_shape(const Image& a, const Image& b) {
  if (!a.same_shape(b)) {
    fail(ErrorKind::shape, "image sizes differ: " + std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                               " vs " + std::to_string(b.width()) + "x" + std::to_string(b.height()));
  }
}

void require_min_dim(const Image& img, int min_dim, const char* metric) {
  if (std::min(img.width(), img.height()) < min_dim) {
    fail(ErrorKind::precondition, std::string(metric) + " needs images of at least " + std::to_string(min_dim) +
                                      "x" + std::to_string(min_dim) + ", got " + std::to_string(img.width()) + "x" +
                                      std::to_string(img.height()));
  }
}

}  // namespace detail

using namespace detail;

double psnr(const Image& ref, const Image& x) {
  require_same_shape(ref, x);
  double sse = 0.0;
  auto a = ref.pixels();
  auto b = x.pixels();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    sse += d * d;
  }
  const double mse = sse / static_cast<double>(a.size());
  if (mse < 1e-12) return 100.0;
  return 10.0 * std::log10(1.0 / mse);
}

double ssim(const Image& ref, const Image& x) {
  require_same_shape(ref, x);
  require_min_dim(ref, 11, "ssim");
  constexpr double c1 = 0.01 * 0.01;
  constexpr double c2 = 0.03 * 0.03;
  const auto win = gaussian_window(11, 1.5);

  const Plane a = to_plane(ref);
  const Plane b = to_plane(x);
  const Plane mu_a = filter_valid(a, win);
  const Plane mu_b = filter_valid(b, win);
  const Plane aa = filter_valid(multiply(a, a), win);
  const Plane bb = filter_valid(multiply(b, b), win);
  const Plane ab = filter_valid(multiply(a, b), win);

  double total = 0.0;
  for (std::size_t i = 0; i < mu_a.v.size(); ++i) {
    const double ma = mu_a.v[i], mb = mu_b.v[i];
    const double va = aa.v[i] - ma * ma;
    const double vb = bb.v[i] - mb * mb;
    const double cov = ab.v[i] - ma * mb;
    total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
  }
  return total / static_cast<double>(mu_a.v.size());
}

double tenengrad(const Image& x) {
  require_min_dim(x, 3, "tenengrad");
  const Plane p = to_plane(x, 255.0);
  double total = 0.0;
  for (int y = 1; y < p.height - 1; ++y) {
    for (int xx = 1; xx < p.width - 1; ++xx) {
      const double gx = (p(xx + 1, y - 1) + 2.0 * p(xx + 1, y) + p(xx + 1, y + 1)) -
                        (p(xx - 1, y - 1) + 2.0 * p(xx - 1, y) + p(xx - 1, y + 1));
      const double gy = (p(xx - 1, y + 1) + 2.0 * p(xx, y + 1) + p(xx + 1, y + 1)) -
                        (p(xx - 1, y - 1) + 2.0 * p(xx, y - 1) + p(xx + 1, y - 1));
      total += gx * gx + gy * gy;
    }
  }
  return total / (static_cast<double>(p.width - 2) * (p.height - 2));
}

double laplacian_variance(const Image& x) {
  require_min_dim(x, 3, "laplacian_var");
  const Plane p = to_plane(x, 255.0);
  std::vector<double> r;
  r.reserve(static_cast<std::size_t>(p.width - 2) * (p.height - 2));
  for (int y = 1; y < p.height - 1; ++y) {
    for (int xx = 1; xx < p.width - 1; ++xx) {
      r.push_back(p(xx - 1, y) + p(xx + 1, y) + p(xx, y - 1) + p(xx, y + 1) - 4.0 * p(xx, y));
    }
  }
  double mean = 0.0;
  for (double v : r) mean += v;
  mean /= static_cast<double>(r.size());
  double var = 0.0;
  for (double v : r) var += (v - mean) * (v - mean);
  return var / static_cast<double>(r.size());
}

double brenner(const Image& x) {
  require_min_dim(x, 3, "brenner");
  const Plane p = to_plane(x, 255.0);
  double total = 0.0;
  for (int y = 0; y < p.height - 2; ++y) {
    for (int xx = 0; xx < p.width - 2; ++xx) {
      const double dx = p(xx + 2, y) - p(xx, y);
      const double dy = p(xx, y + 2) - p(xx, y);
      total += (dx * dx + dy * dy) / 2.0;
    }
  }
  return total / (static_cast<double>(p.width - 2) * (p.height - 2));
}

double odi(const Image& ref, const Image& x) {
  require_same_shape(ref, x);
  const double t_ref = tenengrad(ref);
  const double t_x = tenengrad(x);
  return (t_x - t_ref) / std::max({t_x, t_ref, 1e-9});
}

double MetricReport::get(std::string_view name) const {
  for (const auto& v : values) {
    if (v.name == name) return v.value;
  }
  fail(ErrorKind::usage, "metric '" + std::string(name) + "' not in report");
}

std::string MetricReport::to_json() const {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& v : values) j[v.name] = v.value;
  return j.dump();
}

std::string MetricReport::csv_header() {
  std::string s;
  for (const auto& m : registry()) {
    if (!s.empty()) s += ",";
    s += m.name;
  }
  return s;
}

std::string MetricReport::to_csv_row() const {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out << ",";
    out << values[i].value;
  }
  return out.str();
}

const std::vector<MetricInfo>& registry() {
  static const std::vector<MetricInfo> metrics = {
      {"psnr", "PSNR", true, psnr},
      {"ssim", "SSIM", true, ssim},
      {"fsim", "FSIM", true, fsim},
      {"lpips_proxy", "LPIPS-proxy ↓", false, lpips_proxy},
      {"odi", "ODI Score ↓", false, odi},
      {"vif", "VIF", true, vif},
      {"tenengrad", "Tenengrad sharpness", true, [](const Image&, const Image& x) { return tenengrad(x); }},
      {"laplacian_var", "Laplacian variance", true,
       [](const Image&, const Image& x) { return laplacian_variance(x); }},
      {"brenner", "Brenner", true, [](const Image&, const Image& x) { return brenner(x); }},
  };
  return metrics;
}

const MetricInfo& find_metric(std::string_view name) {
  for (const auto& m : registry()) {
    if (m.name == name) return m;
  }
  fail(ErrorKind::usage, "unknown metric '" + std::string(name) + "'");
}

MetricReport evaluate(const Image& ref, const Image& x, const std::vector<std::string>& names) {
  for (const auto& n : names) find_metric(n);
  MetricReport report;
  for (const auto& m : registry()) {
    if (std::find(names.begin(), names.end(), m.name) == names.end()) continue;
    try {
      report.values.push_back({std::string(m.name), m.fn(ref, x), m.higher_is_better});
    } catch (const Error& e) {
      throw e.with_context("metric " + std::string(m.name));
    }
  }
  return report;
}

MetricReport evaluate_all(const Image& ref, const Image& x) {
  std::vector<std::string> names;
  for (const auto& m : registry()) names.emplace_back(m.name);
  return evaluate(ref, x, names);
}

}  // namespace medsr::metrics
