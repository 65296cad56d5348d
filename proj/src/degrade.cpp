#include "medsr/degrade.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

#include "medsr/error.hpp"
#include "medsr/filter.hpp"
#include "medsr/io.hpp"
#include "medsr/parallel.hpp"
#include "medsr/resample.hpp"

namespace medsr {

namespace fs = std::filesystem;

DegradationProfile parse_profile(std::string_view name) {
  if (name == "classical") return DegradationProfile::classical;
  if (name == "high-order" || name == "high_order") return DegradationProfile::high_order;
  fail(ErrorKind::usage, "unknown degradation profile '" + std::string(name) + "'");
}

std::string_view to_string(DegradationProfile profile) noexcept {
  return profile == DegradationProfile::classical ? "classical" : "high-order";
}

void DegradationSpec::validate() const {
  if (scale < 2 || scale > 4) fail(ErrorKind::config, "scale must be 2, 3 or 4, got " + std::to_string(scale));
  if (!std::isfinite(blur_sigma) || blur_sigma < 0.0) fail(ErrorKind::config, "blur_sigma must be finite and >= 0");
  if (!std::isfinite(noise_sigma) || noise_sigma < 0.0) fail(ErrorKind::config, "noise_sigma must be finite and >= 0");
  if (compression_quality && (*compression_quality < 1 || *compression_quality > 100)) {
    fail(ErrorKind::config, "compression_quality must be in 1..100");
  }
}

std::vector<double> gaussian_taps(double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> taps(2 * static_cast<std::size_t>(radius) + 1);
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-(i * i) / (2.0 * sigma * sigma));
    taps[i + radius] = v;
    total += v;
  }
  for (double& t : taps) t /= total;
  return taps;
}

Image gaussian_blur(const Image& img, double sigma) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) fail(ErrorKind::precondition, "blur sigma must be finite and >= 0");
  if (sigma == 0.0) return img;
  const auto taps = gaussian_taps(sigma);
  return correlate_separable(img, taps, taps, BorderMode::reflect);
}

Image add_gaussian_noise(const Image& img, double sigma255, Prng& rng) {
  if (!(sigma255 >= 0.0) || !std::isfinite(sigma255)) fail(ErrorKind::precondition, "noise sigma must be finite and >= 0");
  if (sigma255 == 0.0) return img;
  Image out = img;
  for (float& v : out.pixels()) {
    const double n = sigma255 * rng.normal();
    v = static_cast<float>(std::clamp(static_cast<double>(v) + n / 255.0, 0.0, 1.0));
  }
  return out;
}

namespace {

constexpr std::array<int, 64> kLumaTable = {
    16, 11, 10, 16, 24,  40,  51,  61,   //
    12, 12, 14, 19, 26,  58,  60,  55,   //
    14, 13, 16, 24, 40,  57,  69,  56,   //
    14, 17, 22, 29, 51,  87,  80,  62,   //
    18, 22, 37, 56, 68,  109, 103, 77,   //
    24, 35, 55, 64, 81,  104, 113, 92,   //
    49, 64, 78, 87, 103, 121, 120, 101,  //
    72, 92, 95, 98, 112, 100, 103, 99,
};

// basis[u][x] = C(u)/2 * cos((2x+1) u pi / 16), the orthonormal 8-point DCT-II.
const std::array<std::array<double, 8>, 8>& dct_basis() {
  static const auto basis = [] {
    std::array<std::array<double, 8>, 8> b{};
    for (int u = 0; u < 8; ++u) {
      const double cu = u == 0 ? std::numbers::sqrt2 / 2.0 : 1.0;
      for (int x = 0; x < 8; ++x) b[u][x] = 0.5 * cu * std::cos((2 * x + 1) * u * std::numbers::pi / 16.0);
    }
    return b;
  }();
  return basis;
}

}  // namespace

std::array<int, 64> quantization_table(int quality) {
  if (quality < 1 || quality > 100) fail(ErrorKind::precondition, "quality must be in 1..100");
  const int scale = quality < 50 ? 5000 / quality : 200 - 2 * quality;
  std::array<int, 64> q{};
  for (int i = 0; i < 64; ++i) q[i] = std::clamp((kLumaTable[i] * scale + 50) / 100, 1, 255);
  return q;
}

Image dct_compress(const Image& img, int quality) {
  const auto q = quantization_table(quality);
  const auto& basis = dct_basis();
  const int w = img.width();
  const int h = img.height();
  Image out(w, h);

  std::array<double, 64> block{}, tmp{}, coef{};
  for (int by = 0; by < h; by += 8) {
    for (int bx = 0; bx < w; bx += 8) {
      for (int y = 0; y < 8; ++y) {
        for (int x = 0; x < 8; ++x) {
          const int sx = std::min(bx + x, w - 1);
          const int sy = std::min(by + y, h - 1);
          block[y * 8 + x] = static_cast<double>(img(sx, sy)) * 255.0 - 128.0;
        }
      }
      // Rows then columns.
      for (int y = 0; y < 8; ++y) {
        for (int u = 0; u < 8; ++u) {
          double acc = 0.0;
          for (int x = 0; x < 8; ++x) acc += basis[u][x] * block[y * 8 + x];
          tmp[y * 8 + u] = acc;
        }
      }
      for (int v = 0; v < 8; ++v) {
        for (int u = 0; u < 8; ++u) {
          double acc = 0.0;
          for (int y = 0; y < 8; ++y) acc += basis[v][y] * tmp[y * 8 + u];
          const int qi = v * 8 + u;
          coef[qi] = std::round(acc / q[qi]) * q[qi];
        }
      }
      for (int y = 0; y < 8; ++y) {
        for (int u = 0; u < 8; ++u) {
          double acc = 0.0;
          for (int v = 0; v < 8; ++v) acc += basis[v][y] * coef[v * 8 + u];
          tmp[y * 8 + u] = acc;
        }
      }
      for (int y = 0; y < 8 && by + y < h; ++y) {
        for (int x = 0; x < 8 && bx + x < w; ++x) {
          double acc = 0.0;
          for (int u = 0; u < 8; ++u) acc += basis[u][x] * tmp[y * 8 + u];
          out(bx + x, by + y) = static_cast<float>(std::clamp((acc + 128.0) / 255.0, 0.0, 1.0));
        }
      }
    }
  }
  return out;
}

Image crop_to_multiple(const Image& img, int scale) {
  if (img.width() < scale || img.height() < scale) {
    fail(ErrorKind::degradation, "image " + std::to_string(img.width()) + "x" + std::to_string(img.height()) +
                                     " is smaller than scale " + std::to_string(scale));
  }
  const int w = img.width() / scale * scale;
  const int h = img.height() / scale * scale;
  if (w == img.width() && h == img.height()) return img;
  return crop_center(img, w, h);
}

namespace {

Image degrade_high_order(const Image& hr, int scale, Prng& rng) {
  const int final_w = hr.width() / scale;
  const int final_h = hr.height() / scale;
  // The first round shrinks by sqrt(scale), the second lands on the target.
  const double partial = std::sqrt(static_cast<double>(scale));
  const int mid_w = std::max(final_w, static_cast<int>(std::lround(hr.width() / partial)));
  const int mid_h = std::max(final_h, static_cast<int>(std::lround(hr.height() / partial)));

  Image cur = hr;
  for (int round = 0; round < 2; ++round) {
    const double blur = rng.uniform(0.2, 2.0);
    const ResampleKernel kernel = rng.uniform() < 0.5 ? ResampleKernel::bicubic : ResampleKernel::bilinear;
    const double noise = rng.uniform(1.0, 15.0);
    const int quality = rng.uniform_int(50, 95);

    cur = gaussian_blur(cur, blur);
    cur = round == 0 ? resample(cur, mid_w, mid_h, kernel, true) : resample(cur, final_w, final_h, kernel, true);
    cur = add_gaussian_noise(cur, noise, rng);
    cur = dct_compress(cur, quality);
  }
  return cur;
}

}  // namespace

Image degrade(const Image& img, const DegradationSpec& spec) {
  spec.validate();
  const Image hr = crop_to_multiple(img, spec.scale);
  Prng rng(spec.seed);
  if (spec.profile == DegradationProfile::high_order) return degrade_high_order(hr, spec.scale, rng);

  Image lr = gaussian_blur(hr, spec.blur_sigma);
  lr = resample(lr, hr.width() / spec.scale, hr.height() / spec.scale, ResampleKernel::bicubic, true);
  lr = add_gaussian_noise(lr, spec.noise_sigma, rng);
  if (spec.compression_quality) lr = dct_compress(lr, *spec.compression_quality);
  return lr;
}

std::uint64_t per_image_seed(std::uint64_t seed, std::string_view filename) noexcept {
  return seed ^ fnv1a64(filename);
}

std::vector<fs::path> list_images(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) fail(ErrorKind::config, "corpus directory not found: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension().string();
    if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
  return files;
}

std::size_t make_pairs(const fs::path& corpus_dir, const DegradationSpec& spec, const fs::path& out_dir,
                       int threads) {
  spec.validate();
  const auto files = list_images(corpus_dir);
  if (files.empty()) fail(ErrorKind::config, "corpus " + corpus_dir.string() + " contains no PGM images");

  fs::create_directories(out_dir / "hr");
  fs::create_directories(out_dir / "lr");

  struct Entry {
    std::string name;
    std::uint64_t seed = 0;
    int hr_w = 0, hr_h = 0, lr_w = 0, lr_h = 0;
  };
  std::vector<Entry> entries(files.size());

  parallel_for(files.size(), threads, [&](std::size_t i) {
    const auto& file = files[i];
    const std::string filename = file.filename().string();
    try {
      const Image hr = crop_to_multiple(load_pgm(file), spec.scale);
      DegradationSpec per = spec;
      per.seed = per_image_seed(spec.seed, filename);
      const Image lr = degrade(hr, per);
      const std::string out_name = file.stem().string() + ".pgm";
      save_pgm(hr, out_dir / "hr" / out_name);
      save_pgm(lr, out_dir / "lr" / out_name);
      entries[i] = {file.stem().string(), per.seed, hr.width(), hr.height(), lr.width(), lr.height()};
    } catch (const Error& e) {
      throw e.with_context(filename);
    }
  });

  nlohmann::ordered_json manifest;
  manifest["profile"] = std::string(to_string(spec.profile));
  manifest["scale"] = spec.scale;
  manifest["blur_sigma"] = spec.blur_sigma;
  manifest["noise_sigma"] = spec.noise_sigma;
  manifest["compression_quality"] =
      spec.compression_quality ? nlohmann::ordered_json(*spec.compression_quality) : nlohmann::ordered_json(nullptr);
  manifest["seed"] = spec.seed;
  manifest["value_range"] = "[0,1] internal, stored as 8-bit PGM";
  auto& images = manifest["images"] = nlohmann::ordered_json::array();
  for (const auto& e : entries) {
    images.push_back({{"name", e.name},
                      {"seed", e.seed},
                      {"hr", {e.hr_w, e.hr_h}},
                      {"lr", {e.lr_w, e.lr_h}}});
  }
  write_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
  return files.size();
}

}  // namespace medsr
