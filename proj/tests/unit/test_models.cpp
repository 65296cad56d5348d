#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "medsr/io.hpp"
#include "medsr/metrics.hpp"
#include "medsr/models.hpp"
#include "medsr/prng.hpp"
#include "medsr/resample.hpp"
#include "medsr/synth.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace medsr;
using namespace medsr::models;

namespace {

Tensor random_tensor(std::vector<int> dims, std::uint64_t seed, double scale = 1.0) {
  Tensor t(std::move(dims));
  Prng rng(seed);
  for (float& v : t.data()) v = static_cast<float>(scale * rng.normal());
  return t;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  if (a.dims() != b.dims()) return INFINITY;
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(double(a[i]) - b[i]));
  return m;
}

void zero(ModelWeights& w, const std::string& prefix) {
  for (auto& [name, t] : w.entries()) {
    if (name.rfind(prefix, 0) == 0) std::fill(t.data().begin(), t.data().end(), 0.0f);
  }
}

ModelWeights srcnn_identity(const SrcnnConfig& cfg) {
  ModelWeights w = init_srcnn(cfg, 0, 0.0);
  w.at("conv1.weight")[(cfg.k1 / 2) * cfg.k1 + cfg.k1 / 2] = 1.0f;
  w.at("conv2.weight")[(cfg.k2 / 2) * cfg.k2 + cfg.k2 / 2] = 1.0f;
  w.at("conv3.weight")[(cfg.k3 / 2) * cfg.k3 + cfg.k3 / 2] = 1.0f;
  return w;
}

// Attention weights large enough to make softmax rows far from uniform.
ModelWeights peaky_attention(int c, int window, int heads, std::uint64_t seed) {
  ModelWeights w;
  w.add("a.qkv.weight", random_tensor({3 * c, c}, seed, 1.0));
  w.add("a.qkv.bias", random_tensor({3 * c}, seed + 1, 0.2));
  w.add("a.relative_position_bias_table", random_tensor({(2 * window - 1) * (2 * window - 1), heads}, seed + 2, 1.0));
  w.add("a.proj.weight", random_tensor({c, c}, seed + 3, 0.3));
  w.add("a.proj.bias", random_tensor({c}, seed + 4, 0.1));
  return w;
}

}  // namespace

TEST_SUITE("models") {

TEST_CASE("srcnn config validation and init") {
  SrcnnConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.k1 = 4;
  CHECK(error_kind([&] { cfg.validate(); }) == ErrorKind::config);
  cfg = {};
  const ModelWeights w = init_srcnn(cfg, 1);
  CHECK(w.at("conv1.weight").dims() == std::vector<int>{64, 1, 9, 9});
  CHECK(w.at("conv2.weight").dims() == std::vector<int>{32, 64, 1, 1});
  CHECK(w.at("conv3.weight").dims() == std::vector<int>{1, 32, 5, 5});
  for (float b : w.at("conv1.bias").data()) CHECK(b == 0.0f);
  double sq = 0.0;
  for (float v : w.at("conv1.weight").data()) sq += double(v) * v;
  CHECK(std::sqrt(sq / w.at("conv1.weight").size()) == doctest::Approx(0.01).epsilon(0.1));
  CHECK(init_srcnn(cfg, 1) == w);
  CHECK(w.parameter_count() == 64 * 81 + 64 + 32 * 64 + 32 + 32 * 25 + 1);
}

TEST_CASE("srcnn forward examples") {
  SrcnnConfig cfg;
  const Image y = oracle::random_image(16, 16, 3);
  const Image zero_out = srcnn_forward(y, init_srcnn(cfg, 0, 0.0), cfg);
  for (float v : zero_out.pixels()) CHECK(v == 0.0f);

  CHECK(srcnn_forward(y, srcnn_identity(cfg), cfg) == y);

  ModelWeights w = init_srcnn(cfg, 7, 0.05);
  Prng rng(8);
  for (auto& [name, t] : w.entries()) {
    if (name.ends_with(".bias")) {
      for (float& v : t.data()) v = static_cast<float>(0.05 * rng.normal());
    }
  }
  const Image out = srcnn_forward(y, w, cfg);
  CHECK(max_abs_diff(out, oracle::srcnn(y, w, cfg)) < 1e-5);
  const auto dbl = srcnn_forward_double(y, w, cfg);
  for (std::size_t i = 0; i < out.size(); ++i) CHECK(std::abs(dbl[i] - out.data()[i]) < 1e-5);

  ModelWeights bad = w;
  bad.at("conv2.weight") = Tensor({32, 63, 1, 1});
  CHECK(error_kind([&] { srcnn_forward(y, bad, cfg); }) == ErrorKind::model);
}

TEST_CASE("srcnn loss examples") {
  SrcnnConfig cfg;
  cfg.c1 = 4;
  cfg.c2 = 3;
  const Image y = oracle::random_image(12, 12, 1);
  const auto id = srcnn_identity(cfg);
  const LossAndGrad exact = srcnn_loss_and_grad({{y, y}}, id, cfg);
  CHECK(exact.loss == 0.0);
  for (const auto& [name, g] : exact.grads.entries()) {
    for (float v : g.data()) CHECK(v == 0.0f);
  }

  const ModelWeights zeros = init_srcnn(cfg, 0, 0.0);
  const Image x = oracle::random_image(12, 12, 2);
  Image x2 = x;
  for (float& v : x2.pixels()) v *= 2.0f;
  const double l1 = srcnn_loss({{y, x}}, zeros, cfg);
  const double l2 = srcnn_loss({{y, x2}}, zeros, cfg);
  CHECK(l2 == doctest::Approx(4.0 * l1).epsilon(1e-12));
  double sq = 0.0;
  for (float v : x.pixels()) sq += double(v) * v;
  CHECK(l1 == doctest::Approx(sq).epsilon(1e-12));

  CHECK(srcnn_loss({{y, x}, {y, x2}}, zeros, cfg) == doctest::Approx((l1 + l2) / 2.0));
  CHECK(error_kind([&] { srcnn_loss({{y, Image(11, 12)}}, zeros, cfg); }) == ErrorKind::shape);
  CHECK(error_kind([&] { srcnn_loss({}, zeros, cfg); }) == ErrorKind::shape);
}

TEST_CASE("srcnn gradients match finite differences on a small net") {
  SrcnnConfig cfg;
  cfg.c1 = 6;
  cfg.c2 = 4;
  cfg.k1 = 5;
  cfg.k3 = 3;
  ModelWeights w = oracle::kink_free_srcnn(cfg, 11, 0.3, 1e-3);
  const std::vector<SrcnnSample> batch = {{oracle::random_image(10, 10, 1), oracle::random_image(10, 10, 2)},
                                          {oracle::random_image(10, 10, 3), oracle::random_image(10, 10, 4)}};
  const LossAndGrad lg = srcnn_loss_and_grad(batch, w, cfg);
  CHECK(lg.loss == doctest::Approx(srcnn_loss(batch, w, cfg)).epsilon(1e-12));
  double worst = 0.0;
  for (auto& [name, t] : w.entries()) {
    const Tensor& g = lg.grads.at(name);
    for (std::size_t i = 0; i < t.size(); ++i) {
      const float orig = t[i];
      t[i] = orig + 1e-3f;
      const double up_step = double(t[i]);
      const double up = srcnn_loss(batch, w, cfg);
      t[i] = orig - 1e-3f;
      const double down_step = double(t[i]);
      const double down = srcnn_loss(batch, w, cfg);
      t[i] = orig;
      const double numeric = (up - down) / (up_step - down_step);
      const double rel = std::abs(numeric - g[i]) / std::max({std::abs(numeric), std::abs(double(g[i])), 1e-6});
      worst = std::max(worst, rel);
    }
  }
  CHECK(worst < 1e-3);
}

TEST_CASE("srcnn training") {
  SrcnnConfig cfg;
  cfg.c1 = 8;
  cfg.c2 = 4;
  std::vector<SrcnnSample> samples;
  for (int i = 0; i < 3; ++i) {
    const Image hr = synth_image("brain", 40, 100 + i);
    samples.push_back({bicubic_upscale(resample(hr, 20, 20, ResampleKernel::bicubic, true), 2), hr});
  }
  TrainOptions opt;
  opt.iters = 0;
  opt.seed = 5;
  const TrainResult none = srcnn_train(samples, cfg, opt);
  CHECK(none.weights == init_srcnn(cfg, 5, opt.init_sigma));
  CHECK(none.losses.empty());
  CHECK(none.final_mse == none.initial_mse);

  opt.iters = 20;
  opt.batch_size = 2;
  opt.patch = 17;
  const TrainResult a = srcnn_train(samples, cfg, opt);
  const TrainResult b = srcnn_train(samples, cfg, opt);
  CHECK(encode_weights(a.weights) == encode_weights(b.weights));
  CHECK(a.losses.size() == 20);
  CHECK(a.final_mse < a.initial_mse);
  opt.seed = 6;
  CHECK(encode_weights(srcnn_train(samples, cfg, opt).weights) != encode_weights(a.weights));

  CHECK(error_kind([&] { srcnn_train(std::vector<SrcnnSample>{}, cfg, opt); }) == ErrorKind::config);
  TempDir dir;
  std::filesystem::create_directories(dir.path / "hr");
  CHECK(error_kind([&] { srcnn_train(dir.path, cfg, opt); }) == ErrorKind::config);
}

TEST_CASE("srcnn training writes a loss log") {
  SrcnnConfig cfg;
  cfg.c1 = 4;
  cfg.c2 = 2;
  const Image hr = synth_image("chest", 36, 3);
  std::vector<SrcnnSample> samples = {{bicubic_upscale(resample(hr, 18, 18, ResampleKernel::bicubic, true), 2), hr}};
  TempDir dir;
  TrainOptions opt;
  opt.iters = 5;
  opt.batch_size = 1;
  opt.loss_log = dir.path / "loss.csv";
  srcnn_train(samples, cfg, opt);
  const std::string log = read_file(dir.path / "loss.csv");
  CHECK(log.rfind("iter,loss\n", 0) == 0);
  CHECK(std::count(log.begin(), log.end(), '\n') == 6);
}

TEST_CASE("charbonnier") {
  const Image a = oracle::random_image(9, 9, 1);
  const Image b = oracle::random_image(9, 9, 2);
  CHECK(charbonnier(a, a, 1e-3) == 1e-3);
  CHECK(charbonnier(a, a, 0.25) == 0.25);
  CHECK(charbonnier(a, b, 1e-3) == charbonnier(b, a, 1e-3));
  const double eps = 1e-3;
  Image c = a;
  for (std::size_t i = 0; i < c.size(); ++i) c.pixels()[i] += (i % 2 ? 1.0f : -1.0f) * 100.0f * float(eps);
  double l1 = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) l1 += std::abs(double(c.data()[i]) - a.data()[i]);
  l1 /= double(c.size());
  CHECK(std::abs(charbonnier(c, a, eps) - l1) / l1 < 0.01);
  double direct = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double r = double(a.data()[i]) - b.data()[i];
    direct += std::sqrt(r * r + eps * eps);
  }
  CHECK(charbonnier(a, b, eps) == doctest::Approx(direct / double(a.size())).epsilon(1e-12));
  CHECK(error_kind([&] { charbonnier(a, b, 0.0); }) == ErrorKind::precondition);
}

TEST_CASE("window attention softmax rows and masking") {
  const int c = 8, heads = 2, window = 4;
  const Tensor x = random_tensor({c, 12, 12}, 3);
  const ModelWeights w = peaky_attention(c, window, heads, 10);
  for (bool shifted : {false, true}) {
    AttentionProbe probe;
    window_attention(x, w, "a", window, heads, shifted, &probe);
    CHECK(probe.windows == 9);
    CHECK(probe.tokens == 16);
    double leak = 0.0;
    for (int win = 0; win < probe.windows; ++win) {
      for (int h = 0; h < heads; ++h) {
        for (int q = 0; q < probe.tokens; ++q) {
          double sum = 0.0;
          for (int k = 0; k < probe.tokens; ++k) {
            sum += probe.at(win, h, q, k);
            if (probe.region[win * probe.tokens + q] != probe.region[win * probe.tokens + k]) {
              leak = std::max(leak, probe.at(win, h, q, k));
            }
          }
          CHECK(std::abs(sum - 1.0) <= 1e-6);
        }
      }
    }
    CHECK(leak <= 1e-7);
  }
}

TEST_CASE("uniform attention averages each window") {
  const int c = 4, window = 4;
  const Tensor x = random_tensor({c, 8, 8}, 4);
  ModelWeights w;
  Tensor qkv({3 * c, c});
  for (int i = 0; i < c; ++i) qkv[static_cast<std::size_t>(2 * c + i) * c + i] = 1.0f;
  Tensor proj({c, c});
  for (int i = 0; i < c; ++i) proj[static_cast<std::size_t>(i) * c + i] = 1.0f;
  w.add("a.qkv.weight", qkv);
  w.add("a.qkv.bias", Tensor({3 * c}));
  w.add("a.relative_position_bias_table", Tensor({49, 2}));
  w.add("a.proj.weight", proj);
  w.add("a.proj.bias", Tensor({c}));
  const Tensor out = window_attention(x, w, "a", window, 2, false);
  for (int ch = 0; ch < c; ++ch) {
    for (int wy = 0; wy < 2; ++wy) {
      for (int wx = 0; wx < 2; ++wx) {
        double mean = 0.0;
        for (int y = 0; y < 4; ++y) {
          for (int xx = 0; xx < 4; ++xx) mean += x.at(ch, wy * 4 + y, wx * 4 + xx);
        }
        mean /= 16.0;
        for (int y = 0; y < 4; ++y) {
          for (int xx = 0; xx < 4; ++xx) CHECK(out.at(ch, wy * 4 + y, wx * 4 + xx) == doctest::Approx(mean).epsilon(1e-5));
        }
      }
    }
  }
}

TEST_CASE("window attention matches brute-force oracle") {
  const int c = 16, heads = 2, window = 8;
  const Tensor x = random_tensor({c, 16, 16}, 5);
  const ModelWeights w = peaky_attention(c, window, heads, 20);
  for (bool shifted : {false, true}) {
    const Tensor got = window_attention(x, w, "a", window, heads, shifted);
    const Tensor want = oracle::window_attention(x, w, "a", window, heads, shifted);
    CHECK(max_abs_diff(got, want) < 1e-5);
  }
  const ModelWeights small = peaky_attention(8, 4, 2, 30);
  const Tensor x2 = random_tensor({8, 12, 8}, 6);
  CHECK(max_abs_diff(window_attention(x2, small, "a", 4, 2, true), oracle::window_attention(x2, small, "a", 4, 2, true)) <
        1e-5);
  CHECK(error_kind([&] { window_attention(x2, small, "a", 4, 3, true); }) == ErrorKind::model);
}

TEST_CASE("window attention pads odd sizes") {
  const ModelWeights w = peaky_attention(8, 4, 2, 40);
  const Tensor x = random_tensor({8, 10, 7}, 7);
  const Tensor out = window_attention(x, w, "a", 4, 2, true);
  CHECK(out.dims() == x.dims());
}

TEST_CASE("swinlite shapes and oracle") {
  for (int s : {2, 4}) {
    SwinLiteConfig cfg;
    cfg.scale = s;
    const ModelWeights w = init_swinlite(cfg, 3);
    const Image y = oracle::random_image(16, 16, 2);
    const Image out = swinlite_forward(y, w, cfg);
    CHECK(out.width() == 16 * s);
    CHECK(out.height() == 16 * s);
    if (s == 2) CHECK(max_abs_diff(out, oracle::swinlite(y, w, cfg)) < 1e-5);
  }
  SwinLiteConfig cfg;
  cfg.scale = 3;
  CHECK(error_kind([&] { cfg.validate(); }) == ErrorKind::config);
  CHECK_FALSE(swinlite_supports_scale(3));
}

TEST_CASE("swinlite oracle with strong weights") {
  SwinLiteConfig cfg;
  ModelWeights w = init_swinlite(cfg, 9);
  Prng rng(4);
  for (auto& [name, t] : w.entries()) {
    for (float& v : t.data()) v += static_cast<float>(0.2 * rng.normal());
  }
  const Image y = oracle::pattern_image(16, 16, 1);
  const Image want = oracle::swinlite(y, w, cfg);
  double peak = 1.0;
  for (float v : want.pixels()) peak = std::max(peak, double(std::abs(v)));
  CHECK(max_abs_diff(swinlite_forward(y, w, cfg), want) < 1e-5 * peak);
}

TEST_CASE("swinlite with zero deep branch reconstructs from shallow features") {
  SwinLiteConfig cfg;
  ModelWeights w = init_swinlite(cfg, 5);
  zero(w, "layers.");
  zero(w, "conv_after_body");
  const Image y = oracle::random_image(16, 16, 3);
  const Tensor f0 = swinlite_shallow(y, w, cfg);
  const Tensor deep = swinlite_deep(f0, w, cfg);
  for (float v : deep.data()) CHECK(v == 0.0f);
  CHECK(swinlite_forward(y, w, cfg) == swinlite_reconstruct(f0, w, cfg));
}

TEST_CASE("rrdb shapes") {
  for (int s : {2, 3, 4}) {
    RrdbLiteConfig cfg;
    cfg.scale = s;
    const Image y = oracle::random_image(10, 8, 1);
    const Image out = rrdb_forward(y, init_rrdblite(cfg, 1), cfg);
    CHECK(out.width() == 10 * s);
    CHECK(out.height() == 8 * s);
  }
  RrdbLiteConfig cfg;
  CHECK(cfg.upsample_factors() == std::vector<int>{2});
  cfg.scale = 3;
  CHECK(cfg.upsample_factors() == std::vector<int>{3});
  cfg.scale = 4;
  CHECK(cfg.upsample_factors() == std::vector<int>{2, 2});
  cfg.beta = 1.5;
  CHECK(error_kind([&] { cfg.validate(); }) == ErrorKind::config);
}

TEST_CASE("rrdb zeroed dense convs reduce to the conv-in/out path") {
  RrdbLiteConfig cfg;
  ModelWeights w = init_rrdblite(cfg, 2);
  zero(w, "body.");
  const Image y = oracle::random_image(12, 12, 4);
  const Tensor x = random_tensor({cfg.features, 12, 12}, 8);
  CHECK(rrdb_body(x, w, cfg) == x);

  RrdbLiteConfig bare = cfg;
  bare.rrdb_count = 0;
  ModelWeights stripped;
  for (const auto& [name, t] : w.entries()) {
    if (name.rfind("body.", 0) != 0) stripped.add(name, t);
  }
  CHECK(rrdb_forward(y, w, cfg) == rrdb_forward(y, stripped, bare));
}

TEST_CASE("rrdb beta zero is identity") {
  RrdbLiteConfig cfg;
  cfg.beta = 0.0;
  const ModelWeights w = init_rrdblite(cfg, 3);
  const Tensor x = random_tensor({cfg.features, 8, 8}, 9);
  CHECK(rrdb_body(x, w, cfg) == x);
}

TEST_CASE("unet discriminator") {
  const ModelWeights w = init_unet_discriminator(4);
  const Image x = oracle::random_image(16, 16, 5);
  const Tensor logits = unet_discriminator_forward(x, w);
  CHECK(logits.dims() == std::vector<int>{1, 16, 16});
  CHECK(max_abs_diff(logits, oracle::unet_discriminator(x, w)) < 1e-5);

  ModelWeights z = w;
  zero(z, "");
  const Tensor zl = unet_discriminator_forward(x, z);
  for (float v : zl.data()) {
    CHECK(v == 0.0f);
    CHECK(1.0 / (1.0 + std::exp(-double(v))) == 0.5);
  }
  CHECK(error_kind([&] { unet_discriminator_forward(Image(10, 16), w); }) == ErrorKind::shape);
}

TEST_CASE("composite loss") {
  const Image a = oracle::pattern_image(16, 16, 1);
  const Image b = oracle::pattern_image(16, 16, 2);
  const Tensor high({1, 16, 16}, 20.0f);
  const CompositeLoss same = composite_loss(a, a, high);
  CHECK(same.pixel == 0.0);
  CHECK(std::abs(same.perceptual) <= 1e-7);
  CHECK(same.gan == doctest::Approx(std::log1p(std::exp(-20.0))).epsilon(1e-9));
  CHECK(same.gan == doctest::Approx(2.06e-9).epsilon(0.01));
  CHECK(same.total == doctest::Approx(0.1 * same.gan + same.perceptual).epsilon(1e-9));

  const Tensor logits = random_tensor({1, 16, 16}, 3);
  double l1 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) l1 += std::abs(double(a.data()[i]) - b.data()[i]);
  l1 /= double(a.size());
  const CompositeLoss pix = composite_loss(b, a, logits, {1, 0, 0});
  CHECK(pix.total == pix.pixel);
  CHECK(pix.pixel == doctest::Approx(l1).epsilon(1e-12));
  CHECK(pix.perceptual == metrics::lpips_proxy(a, b));

  const CompositeLoss base = composite_loss(b, a, logits, {1, 1, 1});
  const CompositeLoss scaled = composite_loss(b, a, logits, {2.5, 0.5, 3.0});
  CHECK(scaled.total == doctest::Approx(2.5 * base.pixel + 0.5 * base.perceptual + 3.0 * base.gan).epsilon(1e-12));
  const CompositeLoss l3a = composite_loss(b, a, logits, {0, 0, 1});
  const CompositeLoss l3b = composite_loss(b, a, logits, {0, 0, 2});
  CHECK(l3b.total == doctest::Approx(2.0 * l3a.total).epsilon(1e-12));
  CHECK(error_kind([&] { composite_loss(a, Image(8, 8), logits); }) == ErrorKind::shape);
}

TEST_CASE("upscale dispatch") {
  const Image c(6, 5, 0.45f);
  const Image up = upscale(c, ModelKind::bicubic, nullptr, 3);
  CHECK(up.width() == 18);
  CHECK(up.height() == 15);
  for (float v : up.pixels()) CHECK(v == doctest::Approx(0.45).epsilon(1e-6));

  const Image lr = oracle::random_image(12, 8, 3);
  for (auto kind : {ModelKind::bicubic, ModelKind::srcnn, ModelKind::swinlite, ModelKind::rrdblite}) {
    for (int s : {2, 3, 4}) {
      if (!supports_scale(kind, s)) continue;
      const ModelWeights w = is_learned(kind) ? init_weights(kind, s, 1) : ModelWeights{};
      const Image out = upscale(lr, kind, &w, s);
      CHECK(out.width() == 12 * s);
      CHECK(out.height() == 8 * s);
    }
  }
  CHECK_FALSE(supports_scale(ModelKind::swinlite, 3));
  CHECK(error_kind([&] { upscale(lr, ModelKind::swinlite, nullptr, 2); }) == ErrorKind::model);
  CHECK(error_kind([&] { parse_model_kind("esrgan"); }) == ErrorKind::usage);

  SrcnnConfig cfg;
  const ModelWeights id = srcnn_identity(cfg);
  CHECK(max_abs_diff(upscale(lr, ModelKind::srcnn, &id, 2), bicubic_upscale(lr, 2)) < 1e-5);
}

TEST_CASE("forward passes are deterministic") {
  const Image y = oracle::random_image(16, 16, 9);
  for (auto kind : {ModelKind::srcnn, ModelKind::swinlite, ModelKind::rrdblite}) {
    const ModelWeights w = init_weights(kind, 2, 4);
    CHECK(upscale(y, kind, &w, 2) == upscale(y, kind, &w, 2));
    CHECK(init_weights(kind, 2, 4) == w);
  }
}

}  // TEST_SUITE
