// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "medsr/degrade.hpp"
#include "medsr/filter.hpp"
#include "medsr/fft.hpp"
#include "medsr/io.hpp"
#include "medsr/metrics.hpp"
#include "medsr/models.hpp"
#include "medsr/prng.hpp"
#include "medsr/resample.hpp"
#include "medsr/synth.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace medsr;

namespace {

struct Outcome {
  bool ok = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      if (!ok) detail << "; ";
      ok = false;
      detail << what;
    }
  }
};

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("medsr_accept_" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

double max_abs_diff(const Image& a, const Image& b) {
  if (!a.same_shape(b)) return INFINITY;
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(double(a.data()[i]) - b.data()[i]));
  return m;
}

Image noisy(const Image& img, double sigma, std::uint64_t seed) {
  Prng rng(seed);
  return add_gaussian_noise(img, sigma, rng);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// 1. Metric identity suite.
void identity_suite(Outcome& o) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Image x = oracle::random_image(64, 64, 1000 + seed);
    const std::string tag = " (image " + std::to_string(seed) + ")";
    o.require(metrics::psnr(x, x) == 100.0, "psnr" + tag);
    o.require(std::abs(metrics::ssim(x, x) - 1.0) <= 1e-6, "ssim" + tag);
    o.require(std::abs(metrics::fsim(x, x) - 1.0) <= 1e-6, "fsim" + tag);
    o.require(std::abs(metrics::lpips_proxy(x, x)) <= 1e-7, "lpips_proxy" + tag);
    o.require(metrics::odi(x, x) == 0.0, "odi" + tag);
    o.require(std::abs(metrics::vif(x, x) - 1.0) <= 1e-3, "vif" + tag);
    const Image c(64, 64, static_cast<float>(seed) / 9.0f);
    o.require(metrics::tenengrad(c) == 0.0 && metrics::laplacian_variance(c) == 0.0 && metrics::brenner(c) == 0.0,
              "sharpness on constant" + tag);
  }
}

// 2. Oracle equivalence.
void oracle_suite(Outcome& o) {
  const Image img = oracle::random_image(16, 16, 21);
  Prng rng(22);
  for (int k : {3, 5}) {
    std::vector<float> taps(static_cast<std::size_t>(k) * k);
    for (float& t : taps) t = static_cast<float>(rng.uniform(-1.0, 1.0));
    const Kernel2D kernel(k, k, taps);
    for (auto mode : {BorderMode::clamp, BorderMode::reflect, BorderMode::zero}) {
      const double d = max_abs_diff(convolve2d(img, kernel, mode), oracle::convolve(img, kernel, mode));
      o.require(d <= 1e-6, "convolve2d " + std::to_string(k) + "x" + std::to_string(k) + " diff " + fmt(d));
    }
  }
  for (int n : {8, 12}) {
    const Image x = oracle::random_image(n, n, 30 + n);
    const auto spec = fft2d(x);
    const auto ref = oracle::dft2d(x);
    double worst = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
      worst = std::max(worst, std::abs(spec.values[i] - ref[i]) / std::max(std::abs(ref[i]), 1.0));
    }
    o.require(worst <= 1e-6, "fft2d " + std::to_string(n) + " rel " + fmt(worst));
  }
  Image ramp(8, 8);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) ramp(x, y) = static_cast<float>(x + 8 * y) / 63.0f;
  }
  const Image rs = oracle::random_image(13, 9, 40);
  for (auto kernel : {ResampleKernel::nearest, ResampleKernel::bilinear, ResampleKernel::bicubic}) {
    double d = max_abs_diff(resample(ramp, 4, 4, kernel, true), oracle::resample(ramp, 4, 4, kernel, true));
    d = std::max(d, max_abs_diff(resample(rs, 29, 20, kernel, false), oracle::resample(rs, 29, 20, kernel, false)));
    d = std::max(d, max_abs_diff(resample(rs, 5, 4, kernel, true), oracle::resample(rs, 5, 4, kernel, true)));
    o.require(d <= 1e-6, "resample " + std::string(to_string(kernel)) + " diff " + fmt(d));
  }
  Image ref(64, 64);
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 64; ++x) ref(x, y) = ((x / 8 + y / 8) % 2) ? 0.75f : 0.25f;
  }
  const Image test = gaussian_blur(noisy(ref, 10.0, 41), 0.7);
  const double df = std::abs(metrics::fsim(ref, test) - oracle::fsim(ref, test));
  o.require(df <= 1e-4, "fsim diff " + fmt(df));
  const double dv = std::abs(metrics::vif(ref, test) - oracle::vif(ref, test));
  o.require(dv <= 1e-4, "vif diff " + fmt(dv));
}

// 3. Monotonicity.
void monotonicity_suite(Outcome& o) {
  const Image img = oracle::pattern_image(128, 128, 50);
  std::vector<metrics::MetricReport> noise;
  for (double s : {2.0, 5.0, 10.0, 20.0}) noise.push_back(metrics::evaluate_all(img, noisy(img, s, 51)));
  for (std::size_t i = 1; i < noise.size(); ++i) {
    for (const char* m : {"psnr", "ssim", "fsim", "vif"}) {
      o.require(noise[i].get(m) < noise[i - 1].get(m), std::string(m) + " not decreasing with noise");
    }
    o.require(noise[i].get("lpips_proxy") > noise[i - 1].get("lpips_proxy"), "lpips_proxy not increasing with noise");
  }
  double t = INFINITY, l = INFINITY, b = INFINITY;
  for (double s : {0.5, 1.0, 2.0, 4.0}) {
    const Image x = gaussian_blur(img, s);
    const double tn = metrics::tenengrad(x), ln = metrics::laplacian_variance(x), bn = metrics::brenner(x);
    o.require(tn < t, "tenengrad not decreasing at blur " + fmt(s));
    o.require(ln < l, "laplacian_var not decreasing at blur " + fmt(s));
    o.require(bn < b, "brenner not decreasing at blur " + fmt(s));
    t = tn;
    l = ln;
    b = bn;
  }
}

// 4. SRCNN gradient check on the full default network.
void gradient_suite(Outcome& o) {
  models::SrcnnConfig cfg;
  ModelWeights w = oracle::kink_free_srcnn(cfg, 60, 0.05, 1e-3);
  const std::vector<models::SrcnnSample> batch = {
      {oracle::pattern_image(16, 16, 62), oracle::pattern_image(16, 16, 63)},
      {oracle::random_image(16, 16, 64), oracle::random_image(16, 16, 65)}};
  const auto lg = models::srcnn_loss_and_grad(batch, w, cfg);
  double worst = 0.0;
  std::string worst_name;
  std::size_t count = 0;
  for (auto& [name, t] : w.entries()) {
    const Tensor& g = lg.grads.at(name);
    for (std::size_t i = 0; i < t.size(); ++i) {
      const float orig = t[i];
      t[i] = orig + 1e-3f;
      const double hi = t[i];
      const double up = models::srcnn_loss(batch, w, cfg);
      t[i] = orig - 1e-3f;
      const double lo = t[i];
      const double down = models::srcnn_loss(batch, w, cfg);
      t[i] = orig;
      const double numeric = (up - down) / (hi - lo);
      const double rel = std::abs(numeric - g[i]) / std::max({std::abs(numeric), std::abs(double(g[i])), 1e-6});
      if (rel > worst) {
        worst = rel;
        worst_name = name + "[" + std::to_string(i) + "]";
      }
      ++count;
    }
  }
  o.detail << count << " params, max rel err " << fmt(worst) << " at " << worst_name;
  o.require(worst < 1e-3, " exceeds 1e-3");
}

// 5. SRCNN desk training.
void training_suite(Outcome& o) {
  std::vector<models::SrcnnSample> samples;
  std::vector<Image> lrs;
  for (int i = 0; i < 20; ++i) {
    const auto& domains = synth_domains();
    const Image hr = synth_image(domains[i % domains.size()], 64, 500 + i);
    DegradationSpec spec;
    spec.scale = 2;
    const Image lr = degrade(hr, spec);
    lrs.push_back(lr);
    samples.push_back({models::bicubic_upscale(lr, 2), hr});
  }
  models::SrcnnConfig cfg;
  models::TrainOptions opt;
  opt.iters = 500;
  opt.lr = 1e-4;
  opt.seed = 0;
  const auto result = models::srcnn_train(samples, cfg, opt);
  double p_srcnn = 0.0, p_bicubic = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    p_srcnn += metrics::psnr(samples[i].x, models::upscale(lrs[i], models::ModelKind::srcnn, &result.weights, 2));
    p_bicubic += metrics::psnr(samples[i].x, samples[i].y);
  }
  p_srcnn /= double(samples.size());
  p_bicubic /= double(samples.size());
  o.detail << "mse " << fmt(result.initial_mse) << " -> " << fmt(result.final_mse) << ", psnr srcnn "
           << fmt(p_srcnn) << " vs bicubic " << fmt(p_bicubic);
  o.require(result.final_mse <= 0.5 * result.initial_mse, " mse ratio too high");
  o.require(p_srcnn >= p_bicubic, " srcnn below bicubic");
}

// 6. Attention contracts.
void attention_suite(Outcome& o) {
  models::SwinLiteConfig cfg;
  const int c = cfg.embed_dim, win = cfg.window, heads = cfg.heads;
  Prng rng(70);
  auto tensor = [&](std::vector<int> dims, double scale) {
    Tensor t(std::move(dims));
    for (float& v : t.data()) v = static_cast<float>(scale * rng.normal());
    return t;
  };
  ModelWeights w;
  w.add("attn.qkv.weight", tensor({3 * c, c}, 0.8));
  w.add("attn.qkv.bias", tensor({3 * c}, 0.1));
  w.add("attn.relative_position_bias_table", tensor({(2 * win - 1) * (2 * win - 1), heads}, 1.0));
  w.add("attn.proj.weight", tensor({c, c}, 0.3));
  w.add("attn.proj.bias", tensor({c}, 0.1));
  const Tensor x = tensor({c, 16, 16}, 1.0);

  double row_err = 0.0, leak = 0.0, diff = 0.0;
  for (bool shifted : {false, true}) {
    models::AttentionProbe probe;
    const Tensor out = models::window_attention(x, w, "attn", win, heads, shifted, &probe);
    for (int wi = 0; wi < probe.windows; ++wi) {
      for (int h = 0; h < probe.heads; ++h) {
        for (int qi = 0; qi < probe.tokens; ++qi) {
          double sum = 0.0;
          for (int k = 0; k < probe.tokens; ++k) {
            sum += probe.at(wi, h, qi, k);
            if (probe.region[wi * probe.tokens + qi] != probe.region[wi * probe.tokens + k]) {
              leak = std::max(leak, probe.at(wi, h, qi, k));
            }
          }
          row_err = std::max(row_err, std::abs(sum - 1.0));
        }
      }
    }
    const Tensor ref = oracle::window_attention(x, w, "attn", win, heads, shifted);
    for (std::size_t i = 0; i < out.size(); ++i) diff = std::max(diff, std::abs(double(out[i]) - ref[i]));
  }
  o.detail << "row err " << fmt(row_err) << ", oracle diff " << fmt(diff) << ", leak " << fmt(leak);
  o.require(row_err <= 1e-6, " softmax rows");
  o.require(diff <= 1e-5, " oracle mismatch");
  o.require(leak <= 1e-7, " mask leakage");
}

// 7. Loss formulas.
void loss_suite(Outcome& o) {
  const Image a = oracle::pattern_image(32, 32, 80);
  const Image b = noisy(a, 15.0, 81);
  for (double eps : {1e-3, 1e-6, 0.1, 1.0}) {
    o.require(models::charbonnier(a, a, eps) == eps, "charbonnier(x,x) != eps at " + fmt(eps));
  }
  Tensor logits({1, 32, 32});
  Prng rng(82);
  for (float& v : logits.data()) v = static_cast<float>(2.0 * rng.normal());
  double l1 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) l1 += std::abs(double(b.data()[i]) - double(a.data()[i]));
  l1 /= double(a.size());
  const auto pix = models::composite_loss(b, a, logits, {1, 0, 0});
  o.require(pix.total == l1, "lambda (1,0,0) total != L1");
  const auto parts = models::composite_loss(b, a, logits, {1, 1, 1});
  for (const auto& lam : std::vector<std::array<double, 3>>{{2, 0, 0}, {0, 3, 0}, {0, 0, 0.5}, {0.7, 1.3, 0.1}}) {
    const auto r = models::composite_loss(b, a, logits, lam);
    const double expect = lam[0] * parts.pixel + lam[1] * parts.perceptual + lam[2] * parts.gan;
    o.require(std::abs(r.total - expect) <= 1e-12 * std::max(1.0, std::abs(expect)), "composite not linear in lambda");
  }
}

int run_cli(const std::string& args) {
  const int status = std::system((std::string("\"") + MEDSR_CLI + "\" " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Bundled config rewritten with absolute paths into a scratch directory.
fs::path scratch_config(const fs::path& dir) {
  std::string text = read_file(fs::path(MEDSR_DATA_DIR) / "bench_config.json");
  const std::string data = fs::path(MEDSR_DATA_DIR).string() + "/";
  for (const std::string key : {"\"corpus/", "\"weights/"}) {
    std::size_t pos = 0;
    while ((pos = text.find(key, pos)) != std::string::npos) {
      text.insert(pos + 1, data);
      pos += key.size() + data.size();
    }
  }
  const std::string out_key = "\"output_dir\": \"";
  const auto pos = text.find(out_key);
  if (pos != std::string::npos) {
    const auto end = text.find('"', pos + out_key.size());
    text.replace(pos + out_key.size(), end - pos - out_key.size(), "run");
  }
  write_file(dir / "bench_config.json", text);
  return dir / "bench_config.json";
}

struct BenchFiles {
  std::string csv, json, md;
};

// 8. Determinism of two bench runs.
void determinism_suite(Outcome& o, const fs::path& dir, BenchFiles& first) {
  const fs::path cfg = scratch_config(dir);
  BenchFiles runs[2];
  for (int r = 0; r < 2; ++r) {
    const int code = run_cli("bench --config \"" + cfg.string() + "\"");
    o.require(code == 0, "bench exit code " + std::to_string(code));
    if (code != 0) return;
    runs[r] = {read_file(dir / "run" / "results.csv"), read_file(dir / "run" / "results.json"),
               read_file(dir / "run" / "report.md")};
    if (r == 0) fs::rename(dir / "run", dir / "run_first");
  }
  o.require(runs[0].csv == runs[1].csv, "results.csv differs");
  o.require(runs[0].json == runs[1].json, "results.json differs");
  o.require(runs[0].md == runs[1].md, "report.md differs");
  first = runs[0];
}

// 9. Table layout on the bundled corpus.
void table_suite(Outcome& o, const BenchFiles& files) {
  if (files.md.empty()) {
    o.require(false, "no report");
    return;
  }
  std::vector<std::string> lines;
  std::stringstream ss(files.md);
  for (std::string line; std::getline(ss, line);) lines.push_back(line);
  const std::vector<std::string> labels = {"PSNR", "SSIM", "FSIM", "LPIPS-proxy ↓", "ODI Score ↓",
                                           "VIF", "Tenengrad sharpness", "Laplacian variance", "Brenner"};
  int tables = 0, dashes = 0;
  for (const auto& domain : synth_domains()) {
    auto it = std::find(lines.begin(), lines.end(), "## " + std::string(domain));
    if (it == lines.end()) {
      o.require(false, "missing table for " + std::string(domain));
      continue;
    }
    ++tables;
    const std::size_t start = static_cast<std::size_t>(it - lines.begin()) + 4;
    o.require(lines[start - 2].rfind("| Scale | Metric |", 0) == 0, "bad header for " + std::string(domain));
    int row = 0;
    for (int scale : {2, 3, 4}) {
      for (std::size_t k = 0; k < labels.size(); ++k, ++row) {
        const std::size_t idx = start + static_cast<std::size_t>(row);
        if (idx >= lines.size()) {
          o.require(false, "table for " + std::string(domain) + " is short");
          break;
        }
        const std::string& line = lines[idx];
        const std::string prefix =
            "| " + (k == 0 ? "×" + std::to_string(scale) : std::string()) + " | " + labels[k] + " |";
        o.require(line.rfind(prefix, 0) == 0, "row " + std::to_string(row) + " of " + std::string(domain));
        if (line.find("| -- |") != std::string::npos) ++dashes;
      }
    }
    const std::size_t after = start + 27;
    o.require(after >= lines.size() || lines[after].empty(), "extra rows after " + std::string(domain));
  }
  o.detail << tables << " tables, " << dashes << " rows with --";
  o.require(tables == 5, " expected 5 tables");
  o.require(dashes == 5 * 9, " expected the x3 SwinIR-lite column to be --");
}

// 10. Weight format.
void weights_suite(Outcome& o, const fs::path& dir) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Prng rng(9000 + seed);
    ModelWeights w;
    const int count = rng.uniform_int(0, 8);
    for (int t = 0; t < count; ++t) {
      std::vector<int> dims;
      const int rank = rng.uniform_int(1, 4);
      for (int r = 0; r < rank; ++r) dims.push_back(rng.uniform_int(1, 6));
      Tensor tensor(dims);
      for (float& v : tensor.data()) v = static_cast<float>(rng.normal() * std::pow(10.0, rng.uniform_int(-30, 30)));
      w.add("tensor_" + std::to_string(t) + "_" + std::to_string(rng.next() % 1000), std::move(tensor));
    }
    const fs::path p = dir / "fuzz.msrw";
    save_weights(w, p);
    const std::string bytes = read_file(p);
    const ModelWeights back = load_weights(p);
    save_weights(back, dir / "fuzz2.msrw");
    o.require(back == w && read_file(dir / "fuzz2.msrw") == bytes, "round trip " + std::to_string(seed));
  }
  ModelWeights sample;
  sample.add("conv.weight", Tensor({2, 1, 3, 3}, 0.5f));
  sample.add("conv.bias", Tensor({2}, -1.0f));
  const std::string good = encode_weights(sample);
  std::vector<std::string> bad;
  std::string magic = good;
  magic[1] = 'Z';
  bad.push_back(magic);
  for (std::size_t cut = 0; cut < good.size(); ++cut) bad.push_back(good.substr(0, cut));
  const ModelWeights sentinel = sample;
  for (const auto& bytes : bad) {
    write_file(dir / "bad.msrw", bytes);
    ModelWeights target = sentinel;
    bool format_error = false;
    try {
      target = load_weights(dir / "bad.msrw");
    } catch (const Error& e) {
      format_error = e.kind() == ErrorKind::format;
    }
    o.require(format_error, "corrupt file of " + std::to_string(bytes.size()) + " bytes not rejected as format error");
    o.require(target == sentinel, "partial state after a rejected load");
  }
}

}  // namespace

int main() {
  using clock = std::chrono::steady_clock;
  TempDir scratch;
  BenchFiles bench_files;
  struct Criterion {
    int id;
    std::string name;
    double limit_s;
    std::function<void(Outcome&)> fn;
  };
  const std::vector<Criterion> criteria = {
      {1, "metric identity suite", 10, identity_suite},
      {2, "oracle equivalence", 60, oracle_suite},
      {3, "monotonicity", 0, monotonicity_suite},
      {4, "SRCNN gradient check", 120, gradient_suite},
      {5, "SRCNN desk training", 300, training_suite},
      {6, "attention contracts", 0, attention_suite},
      {7, "loss formulas", 0, loss_suite},
      {8, "bench determinism", 0, [&](Outcome& o) { determinism_suite(o, scratch.path, bench_files); }},
      {9, "table structure", 0, [&](Outcome& o) { table_suite(o, bench_files); }},
      {10, "weight format", 0, [&](Outcome& o) { weights_suite(o, scratch.path); }},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    const auto t0 = clock::now();
    try {
      c.fn(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(clock::now() - t0).count();
    if (c.limit_s > 0) o.require(secs < c.limit_s, "runtime over " + fmt(c.limit_s) + " s");
    if (!o.ok) ++failures;
    std::cout << (o.ok ? "PASS" : "FAIL") << " criterion " << c.id << ": " << c.name << " (" << fmt(secs) << " s)";
    const std::string detail = o.detail.str();
    if (!detail.empty()) std::cout << " - " << detail;
    std::cout << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
