#include <cmath>
#include <limits>

#include "medsr/models.hpp"
#include "medsr/nn.hpp"
#include "medsr/prng.hpp"
#include "model_init.hpp"

namespace medsr::models {

namespace {

std::string block_prefix(int b, int l) {
  return "layers." + std::to_string(b) + ".blocks." + std::to_string(l);
}

// y = W x + b at every position of a (C, H, W) map; W is [out, in].
template <typename T>
nn::FeatureMap<T> linear(const nn::FeatureMap<T>& x, const Tensor& w, const Tensor& b) {
  const int cin = x.channels(), cout = w.dim(0);
  const std::size_t hw = static_cast<std::size_t>(x.height()) * x.width();
  nn::FeatureMap<T> out({cout, x.height(), x.width()});
  for (int o = 0; o < cout; ++o) {
    T* dst = out.channel(o);
    std::fill(dst, dst + hw, static_cast<T>(b[o]));
    for (int i = 0; i < cin; ++i) {
      const T wv = w[static_cast<std::size_t>(o) * cin + i];
      const T* src = x.channel(i);
      for (std::size_t p = 0; p < hw; ++p) dst[p] += wv * src[p];
    }
  }
  return out;
}

Tensor mlp(const Tensor& x, const ModelWeights& w, const std::string& prefix, int hidden) {
  const int c = x.channels();
  Tensor h = linear(x, w.expect(prefix + ".fc1.weight", {hidden, c}), w.expect(prefix + ".fc1.bias", {hidden}));
  for (auto& v : h.data()) v = nn::gelu(v);
  return linear(h, w.expect(prefix + ".fc2.weight", {c, hidden}), w.expect(prefix + ".fc2.bias", {c}));
}

// Region label of a row/column in a cyclically shifted map of size n.
int shift_region(int i, int n, int window, int shift) {
  if (i < n - window) return 0;
  if (i < n - shift) return 1;
  return 2;
}

Tensor swin_layer(const Tensor& x, const ModelWeights& w, const std::string& prefix, const SwinLiteConfig& cfg,
                  bool shifted) {
  const int c = cfg.embed_dim;
  Tensor h = layer_norm_channels(x, w.expect(prefix + ".norm1.weight", {c}), w.expect(prefix + ".norm1.bias", {c}));
  Tensor out = x;
  nn::add_scaled(out, window_attention(h, w, prefix + ".attn", cfg.window, cfg.heads, shifted));
  h = layer_norm_channels(out, w.expect(prefix + ".norm2.weight", {c}), w.expect(prefix + ".norm2.bias", {c}));
  nn::add_scaled(out, mlp(h, w, prefix + ".mlp", c * cfg.mlp_ratio));
  return out;
}

}  // namespace

void SwinLiteConfig::validate() const {
  if (embed_dim < 1 || heads < 1 || embed_dim % heads != 0) {
    fail(ErrorKind::config, "embed_dim must be a positive multiple of heads");
  }
  if (window < 2) fail(ErrorKind::config, "window must be at least 2");
  if (rstb_count < 0 || layers_per_rstb < 1 || mlp_ratio < 1) fail(ErrorKind::config, "invalid SwinLite depth");
  if (!swinlite_supports_scale(scale)) {
    fail(ErrorKind::config, "SwinLite supports scales 2 and 4, got " + std::to_string(scale));
  }
}

int SwinLiteConfig::upsample_stages() const { return scale == 4 ? 2 : 1; }

bool swinlite_supports_scale(int scale) noexcept { return scale == 2 || scale == 4; }

ModelWeights init_swinlite(const SwinLiteConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Prng rng(seed);
  const int e = cfg.embed_dim;
  const int table = (2 * cfg.window - 1) * (2 * cfg.window - 1);
  ModelWeights w;
  detail::add_conv(w, rng, "conv_first", e, 1, 3, 0.01, true);
  for (int b = 0; b < cfg.rstb_count; ++b) {
    for (int l = 0; l < cfg.layers_per_rstb; ++l) {
      const std::string p = block_prefix(b, l);
      w.add(p + ".norm1.weight", Tensor({e}, 1.0f));
      w.add(p + ".norm1.bias", Tensor({e}));
      w.add(p + ".attn.qkv.weight", detail::normal_tensor(rng, {3 * e, e}, 0.02));
      w.add(p + ".attn.qkv.bias", Tensor({3 * e}));
      w.add(p + ".attn.relative_position_bias_table", detail::normal_tensor(rng, {table, cfg.heads}, 0.02));
      w.add(p + ".attn.proj.weight", detail::normal_tensor(rng, {e, e}, 0.02));
      w.add(p + ".attn.proj.bias", Tensor({e}));
      w.add(p + ".norm2.weight", Tensor({e}, 1.0f));
      w.add(p + ".norm2.bias", Tensor({e}));
      w.add(p + ".mlp.fc1.weight", detail::normal_tensor(rng, {cfg.mlp_ratio * e, e}, 0.02));
      w.add(p + ".mlp.fc1.bias", Tensor({cfg.mlp_ratio * e}));
      w.add(p + ".mlp.fc2.weight", detail::normal_tensor(rng, {e, cfg.mlp_ratio * e}, 0.02));
      w.add(p + ".mlp.fc2.bias", Tensor({e}));
    }
    detail::add_conv(w, rng, "layers." + std::to_string(b) + ".conv", e, e, 3, 0.01, false);
  }
  detail::add_conv(w, rng, "conv_after_body", e, e, 3, 0.01, false);
  for (int i = 0; i < cfg.upsample_stages(); ++i) {
    detail::add_conv(w, rng, "upsample." + std::to_string(i), e, e, 3, 0.01, true);
  }
  detail::add_conv(w, rng, "conv_last", 1, e, 3, 0.01, true);
  return w;
}

Tensor layer_norm_channels(const Tensor& x, const Tensor& gamma, const Tensor& beta) {
  const int c = x.channels();
  if (gamma.size() != static_cast<std::size_t>(c) || beta.size() != static_cast<std::size_t>(c)) {
    fail(ErrorKind::model, "layer norm parameters do not match channel count");
  }
  const std::size_t hw = static_cast<std::size_t>(x.height()) * x.width();
  Tensor out(x.dims());
  for (std::size_t p = 0; p < hw; ++p) {
    double mean = 0.0;
    for (int ch = 0; ch < c; ++ch) mean += x[ch * hw + p];
    mean /= c;
    double var = 0.0;
    for (int ch = 0; ch < c; ++ch) {
      const double d = x[ch * hw + p] - mean;
      var += d * d;
    }
    var /= c;
    const double inv = 1.0 / std::sqrt(var + 1e-5);
    for (int ch = 0; ch < c; ++ch) {
      out[ch * hw + p] = static_cast<float>((x[ch * hw + p] - mean) * inv * gamma[ch] + beta[ch]);
    }
  }
  return out;
}

Tensor window_attention(const Tensor& x, const ModelWeights& w, const std::string& prefix, int window, int heads,
                        bool shifted, AttentionProbe* probe) {
  if (x.rank() != 3) fail(ErrorKind::shape, "window attention expects a (C, H, W) map");
  const int c = x.channels(), h = x.height(), wd = x.width();
  if (heads < 1 || c % heads != 0) {
    fail(ErrorKind::model, "channel count " + std::to_string(c) + " not divisible by " + std::to_string(heads) +
                               " heads");
  }
  if (window < 2) fail(ErrorKind::model, "window must be at least 2");
  const int d = c / heads;
  const int span = 2 * window - 1;
  const Tensor& qkv_w = w.expect(prefix + ".qkv.weight", {3 * c, c});
  const Tensor& qkv_b = w.expect(prefix + ".qkv.bias", {3 * c});
  const Tensor& table = w.expect(prefix + ".relative_position_bias_table", {span * span, heads});
  const Tensor& proj_w = w.expect(prefix + ".proj.weight", {c, c});
  const Tensor& proj_b = w.expect(prefix + ".proj.bias", {c});

  const int hp = (h + window - 1) / window * window;
  const int wp = (wd + window - 1) / window * window;
  const int shift = shifted ? window / 2 : 0;

  // Reflect-pad to whole windows, then roll by -shift.
  Tensor rolled({c, hp, wp});
  for (int ch = 0; ch < c; ++ch) {
    for (int y = 0; y < hp; ++y) {
      const int sy = border_index((y + shift) % hp, h, BorderMode::reflect);
      for (int xx = 0; xx < wp; ++xx) {
        rolled.at(ch, y, xx) = x.at(ch, sy, border_index((xx + shift) % wp, wd, BorderMode::reflect));
      }
    }
  }

  const auto qkv = linear(rolled.cast<double>(), qkv_w, qkv_b);
  const int n = window * window;
  const int wy_count = hp / window, wx_count = wp / window;
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  nn::FeatureMap<double> attended({c, hp, wp});

  if (probe) {
    probe->windows = wy_count * wx_count;
    probe->heads = heads;
    probe->tokens = n;
    probe->weights.assign(static_cast<std::size_t>(probe->windows) * heads * n * n, 0.0);
    probe->region.assign(static_cast<std::size_t>(probe->windows) * n, 0);
  }

  std::vector<int> ty(n), tx(n), region(n);
  std::vector<double> logits(n), weights(n);
  for (int wy = 0; wy < wy_count; ++wy) {
    for (int wx = 0; wx < wx_count; ++wx) {
      const int win_index = wy * wx_count + wx;
      for (int t = 0; t < n; ++t) {
        ty[t] = wy * window + t / window;
        tx[t] = wx * window + t % window;
        region[t] = shifted ? shift_region(ty[t], hp, window, shift) * 3 + shift_region(tx[t], wp, window, shift) : 0;
        if (probe) probe->region[static_cast<std::size_t>(win_index) * n + t] = region[t];
      }
      for (int head = 0; head < heads; ++head) {
        for (int qi = 0; qi < n; ++qi) {
          double max_logit = -std::numeric_limits<double>::infinity();
          for (int kj = 0; kj < n; ++kj) {
            if (region[qi] != region[kj]) continue;
            double dot = 0.0;
            for (int e = 0; e < d; ++e) {
              const int ch = head * d + e;
              dot += static_cast<double>(qkv.at(ch, ty[qi], tx[qi])) * qkv.at(c + ch, ty[kj], tx[kj]);
            }
            const int rel = (ty[qi] - ty[kj] + window - 1) * span + (tx[qi] - tx[kj] + window - 1);
            logits[kj] = dot * scale + table[static_cast<std::size_t>(rel) * heads + head];
            max_logit = std::max(max_logit, logits[kj]);
          }
          double total = 0.0;
          for (int kj = 0; kj < n; ++kj) {
            weights[kj] = region[qi] == region[kj] ? std::exp(logits[kj] - max_logit) : 0.0;
            total += weights[kj];
          }
          for (int kj = 0; kj < n; ++kj) weights[kj] /= total;
          if (probe) {
            const std::size_t base = ((static_cast<std::size_t>(win_index) * heads + head) * n + qi) * n;
            std::copy(weights.begin(), weights.end(), probe->weights.begin() + static_cast<std::ptrdiff_t>(base));
          }
          for (int e = 0; e < d; ++e) {
            const int ch = head * d + e;
            double acc = 0.0;
            for (int kj = 0; kj < n; ++kj) {
              if (weights[kj] != 0.0) acc += weights[kj] * qkv.at(2 * c + ch, ty[kj], tx[kj]);
            }
            attended.at(ch, ty[qi], tx[qi]) = acc;
          }
        }
      }
    }
  }

  const auto projected = linear(attended, proj_w, proj_b);
  Tensor out({c, h, wd});
  for (int ch = 0; ch < c; ++ch) {
    for (int y = 0; y < h; ++y) {
      for (int xx = 0; xx < wd; ++xx) {
        out.at(ch, y, xx) = static_cast<float>(projected.at(ch, (y - shift + hp) % hp, (xx - shift + wp) % wp));
      }
    }
  }
  return out;
}

Tensor swinlite_shallow(const Image& y, const ModelWeights& w, const SwinLiteConfig& cfg) {
  return nn::conv2d<float>(nn::from_image<float>(y), w, "conv_first", cfg.embed_dim, 3);
}

Tensor swinlite_deep(const Tensor& f0, const ModelWeights& w, const SwinLiteConfig& cfg) {
  Tensor t = f0;
  for (int b = 0; b < cfg.rstb_count; ++b) {
    Tensor inner = t;
    for (int l = 0; l < cfg.layers_per_rstb; ++l) inner = swin_layer(inner, w, block_prefix(b, l), cfg, l % 2 == 1);
    inner = nn::conv2d<float>(inner, w, "layers." + std::to_string(b) + ".conv", cfg.embed_dim, 3);
    nn::add_scaled(inner, t);
    t = std::move(inner);
  }
  return nn::conv2d<float>(t, w, "conv_after_body", cfg.embed_dim, 3);
}

Image swinlite_reconstruct(const Tensor& f, const ModelWeights& w, const SwinLiteConfig& cfg) {
  Tensor t = f;
  for (int i = 0; i < cfg.upsample_stages(); ++i) {
    t = nn::upsample_nearest(t, 2);
    t = nn::conv2d<float>(t, w, "upsample." + std::to_string(i), cfg.embed_dim, 3);
    nn::leaky_relu_inplace(t);
  }
  return nn::to_image(nn::conv2d<float>(t, w, "conv_last", 1, 3));
}

Image swinlite_forward(const Image& y, const ModelWeights& w, const SwinLiteConfig& cfg) {
  cfg.validate();
  const Tensor f0 = swinlite_shallow(y, w, cfg);
  Tensor f = swinlite_deep(f0, w, cfg);
  nn::add_scaled(f, f0);
  return swinlite_reconstruct(f, w, cfg);
}

}  // namespace medsr::models
