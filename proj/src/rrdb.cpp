#include <cmath>

#include "medsr/models.hpp"
#include "medsr/nn.hpp"
#include "medsr/prng.hpp"
#include "model_init.hpp"

namespace medsr::models {

namespace {

std::string rdb_prefix(int r, int d) { return "body." + std::to_string(r) + ".rdb" + std::to_string(d); }

Tensor dense_block(const Tensor& x, const ModelWeights& w, const std::string& prefix, const RrdbLiteConfig& cfg) {
  std::vector<Tensor> feats;
  feats.reserve(static_cast<std::size_t>(cfg.dense_convs));
  Tensor last;
  for (int i = 1; i <= cfg.dense_convs; ++i) {
    std::vector<const Tensor*> parts{&x};
    for (const auto& f : feats) parts.push_back(&f);
    const Tensor in = nn::concat(parts);
    const bool final_conv = i == cfg.dense_convs;
    Tensor out = nn::conv2d<float>(in, w, prefix + ".conv" + std::to_string(i), final_conv ? cfg.features : cfg.growth, 3);
    if (final_conv) {
      last = std::move(out);
    } else {
      nn::leaky_relu_inplace(out);
      feats.push_back(std::move(out));
    }
  }
  Tensor result = x;
  nn::add_scaled(result, last, static_cast<float>(cfg.beta));
  return result;
}

}  // namespace

void RrdbLiteConfig::validate() const {
  if (features < 1 || growth < 1 || dense_convs < 1 || rrdb_count < 0) fail(ErrorKind::config, "invalid RRDB sizes");
  if (!(beta >= 0.0 && beta <= 1.0)) fail(ErrorKind::config, "residual scale must lie in [0, 1]");
  if (scale < 2 || scale > 4) fail(ErrorKind::config, "RRDB scale must be 2, 3 or 4");
}

std::vector<int> RrdbLiteConfig::upsample_factors() const {
  if (scale == 4) return {2, 2};
  return {scale};
}

ModelWeights init_rrdblite(const RrdbLiteConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Prng rng(seed);
  ModelWeights w;
  detail::add_conv(w, rng, "conv_first", cfg.features, 1, 3, 0.01, true);
  for (int r = 0; r < cfg.rrdb_count; ++r) {
    for (int d = 1; d <= 3; ++d) {
      for (int i = 1; i <= cfg.dense_convs; ++i) {
        const int cin = cfg.features + cfg.growth * (i - 1);
        const int cout = i == cfg.dense_convs ? cfg.features : cfg.growth;
        const double stddev = 0.1 * std::sqrt(2.0 / (cin * 9.0));
        detail::add_conv(w, rng, rdb_prefix(r, d) + ".conv" + std::to_string(i), cout, cin, 3, stddev, false);
      }
    }
  }
  detail::add_conv(w, rng, "conv_body", cfg.features, cfg.features, 3, 0.01, false);
  const auto factors = cfg.upsample_factors();
  for (std::size_t i = 0; i < factors.size(); ++i) {
    detail::add_conv(w, rng, "conv_up" + std::to_string(i + 1), cfg.features, cfg.features, 3, 0.01, true);
  }
  detail::add_conv(w, rng, "conv_last", 1, cfg.features, 3, 0.01, true);
  return w;
}

Tensor rrdb_body(const Tensor& x, const ModelWeights& w, const RrdbLiteConfig& cfg) {
  Tensor t = x;
  for (int r = 0; r < cfg.rrdb_count; ++r) {
    Tensor inner = t;
    for (int d = 1; d <= 3; ++d) inner = dense_block(inner, w, rdb_prefix(r, d), cfg);
    // t + beta * (chain(t) - t)
    nn::add_scaled(inner, t, -1.0f);
    nn::add_scaled(t, inner, static_cast<float>(cfg.beta));
  }
  return t;
}

Image rrdb_forward(const Image& y, const ModelWeights& w, const RrdbLiteConfig& cfg) {
  cfg.validate();
  Tensor f = nn::conv2d<float>(nn::from_image<float>(y), w, "conv_first", cfg.features, 3);
  Tensor trunk = nn::conv2d<float>(rrdb_body(f, w, cfg), w, "conv_body", cfg.features, 3);
  nn::add_scaled(f, trunk);
  const auto factors = cfg.upsample_factors();
  for (std::size_t i = 0; i < factors.size(); ++i) {
    f = nn::upsample_nearest(f, factors[i]);
    f = nn::conv2d<float>(f, w, "conv_up" + std::to_string(i + 1), cfg.features, 3);
    nn::leaky_relu_inplace(f);
  }
  return nn::to_image(nn::conv2d<float>(f, w, "conv_last", 1, 3));
}

ModelWeights init_unet_discriminator(std::uint64_t seed) {
  Prng rng(seed);
  ModelWeights w;
  const struct {
    const char* name;
    int cout, cin;
  } layers[] = {{"conv0", 8, 1}, {"enc1", 16, 8}, {"enc2", 32, 16}, {"mid", 32, 32},
                {"dec1", 16, 32}, {"dec2", 8, 16}, {"conv_out", 1, 8}};
  for (const auto& l : layers) {
    detail::add_conv(w, rng, l.name, l.cout, l.cin, 3, std::sqrt(2.0 / (l.cin * 9.0)), false);
  }
  return w;
}

Tensor unet_discriminator_forward(const Image& x, const ModelWeights& w) {
  if (x.width() % 4 != 0 || x.height() % 4 != 0) {
    fail(ErrorKind::shape, "discriminator input must have dimensions divisible by 4, got " +
                               std::to_string(x.width()) + "x" + std::to_string(x.height()));
  }
  auto act = [](Tensor t) {
    nn::leaky_relu_inplace(t);
    return t;
  };
  const Tensor x0 = act(nn::conv2d<float>(nn::from_image<float>(x), w, "conv0", 8, 3));
  const Tensor x1 = act(nn::conv2d<float>(x0, w, "enc1", 16, 3, 2));
  const Tensor x2 = act(nn::conv2d<float>(x1, w, "enc2", 32, 3, 2));
  const Tensor m = act(nn::conv2d<float>(x2, w, "mid", 32, 3));
  Tensor u1 = act(nn::conv2d<float>(nn::upsample_nearest(m, 2), w, "dec1", 16, 3));
  nn::add_scaled(u1, x1);
  Tensor u2 = act(nn::conv2d<float>(nn::upsample_nearest(u1, 2), w, "dec2", 8, 3));
  nn::add_scaled(u2, x0);
  return nn::conv2d<float>(u2, w, "conv_out", 1, 3);
}

}  // namespace medsr::models
