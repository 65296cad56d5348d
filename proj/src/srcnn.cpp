#include <algorithm>
#include <cmath>
#include <fstream>

#include "medsr/degrade.hpp"
#include "medsr/io.hpp"
#include "medsr/models.hpp"
#include "medsr/nn.hpp"
#include "medsr/prng.hpp"

namespace medsr::models {

namespace {

struct Layer {
  std::string name;
  int cout = 0, cin = 0, k = 0;
  std::vector<double> w, b;
};

std::array<Layer, 3> load_layers(const ModelWeights& weights, const SrcnnConfig& cfg) {
  const int dims[3][3] = {{cfg.c1, 1, cfg.k1}, {cfg.c2, cfg.c1, cfg.k2}, {1, cfg.c2, cfg.k3}};
  std::array<Layer, 3> layers;
  for (int i = 0; i < 3; ++i) {
    Layer& l = layers[i];
    l.name = "conv" + std::to_string(i + 1);
    l.cout = dims[i][0];
    l.cin = dims[i][1];
    l.k = dims[i][2];
    const Tensor& wt = weights.expect(l.name + ".weight", {l.cout, l.cin, l.k, l.k});
    const Tensor& bt = weights.expect(l.name + ".bias", {l.cout});
    l.w.assign(wt.data().begin(), wt.data().end());
    l.b.assign(bt.data().begin(), bt.data().end());
  }
  return layers;
}

struct Map {
  int c = 0, h = 0, w = 0;
  std::vector<double> v;
  Map() = default;
  Map(int c_, int h_, int w_) : c(c_), h(h_), w(w_), v(static_cast<std::size_t>(c_) * h_ * w_, 0.0) {}
  double* plane(int ch) { return v.data() + static_cast<std::size_t>(ch) * h * w; }
  const double* plane(int ch) const { return v.data() + static_cast<std::size_t>(ch) * h * w; }
};

Map from_image(const Image& img) {
  Map m(1, img.height(), img.width());
  auto px = img.pixels();
  std::copy(px.begin(), px.end(), m.v.begin());
  return m;
}

std::vector<int> reflect_indices(int n, int p) {
  std::vector<int> idx(static_cast<std::size_t>(n + 2 * p));
  for (int i = 0; i < n + 2 * p; ++i) idx[i] = border_index(i - p, n, BorderMode::reflect);
  return idx;
}

Map pad(const Map& in, int p) {
  if (p == 0) return in;
  Map out(in.c, in.h + 2 * p, in.w + 2 * p);
  const auto ys = reflect_indices(in.h, p);
  const auto xs = reflect_indices(in.w, p);
  for (int ch = 0; ch < in.c; ++ch) {
    const double* src = in.plane(ch);
    double* dst = out.plane(ch);
    for (int y = 0; y < out.h; ++y) {
      for (int x = 0; x < out.w; ++x) dst[y * out.w + x] = src[ys[y] * in.w + xs[x]];
    }
  }
  return out;
}

// Adjoint of pad(): folds padded gradients back onto their source pixels.
Map unpad(const Map& g, int h, int w, int p) {
  if (p == 0) return g;
  Map out(g.c, h, w);
  const auto ys = reflect_indices(h, p);
  const auto xs = reflect_indices(w, p);
  for (int ch = 0; ch < g.c; ++ch) {
    const double* src = g.plane(ch);
    double* dst = out.plane(ch);
    for (int y = 0; y < g.h; ++y) {
      for (int x = 0; x < g.w; ++x) dst[ys[y] * w + xs[x]] += src[y * g.w + x];
    }
  }
  return out;
}

Map conv_forward(const Map& padded, const Layer& l, int h, int w) {
  Map out(l.cout, h, w);
  for (int o = 0; o < l.cout; ++o) {
    double* dst = out.plane(o);
    std::fill(dst, dst + static_cast<std::size_t>(h) * w, l.b[o]);
    for (int i = 0; i < l.cin; ++i) {
      const double* src = padded.plane(i);
      for (int ky = 0; ky < l.k; ++ky) {
        for (int kx = 0; kx < l.k; ++kx) {
          const double wv = l.w[((static_cast<std::size_t>(o) * l.cin + i) * l.k + ky) * l.k + kx];
          for (int y = 0; y < h; ++y) {
            const double* row = src + static_cast<std::size_t>(y + ky) * padded.w + kx;
            double* orow = dst + static_cast<std::size_t>(y) * w;
            for (int x = 0; x < w; ++x) orow[x] += wv * row[x];
          }
        }
      }
    }
  }
  return out;
}

// Accumulates weight/bias gradients and returns the gradient w.r.t. the
// padded input (only when `want_input`).
Map conv_backward(const Map& padded, const Map& dout, const Layer& l, std::vector<double>& gw, std::vector<double>& gb,
                  bool want_input) {
  const int h = dout.h, w = dout.w;
  Map dpad;
  if (want_input) dpad = Map(padded.c, padded.h, padded.w);
  for (int o = 0; o < l.cout; ++o) {
    const double* g = dout.plane(o);
    double sum = 0.0;
    for (std::size_t i = 0; i < static_cast<std::size_t>(h) * w; ++i) sum += g[i];
    gb[o] += sum;
    for (int i = 0; i < l.cin; ++i) {
      const double* src = padded.plane(i);
      double* dsrc = want_input ? dpad.plane(i) : nullptr;
      for (int ky = 0; ky < l.k; ++ky) {
        for (int kx = 0; kx < l.k; ++kx) {
          const std::size_t wi = ((static_cast<std::size_t>(o) * l.cin + i) * l.k + ky) * l.k + kx;
          const double wv = l.w[wi];
          double acc = 0.0;
          for (int y = 0; y < h; ++y) {
            const std::size_t off = static_cast<std::size_t>(y + ky) * padded.w + kx;
            const double* row = src + off;
            const double* grow = g + static_cast<std::size_t>(y) * w;
            for (int x = 0; x < w; ++x) acc += grow[x] * row[x];
            if (dsrc) {
              double* drow = dsrc + off;
              for (int x = 0; x < w; ++x) drow[x] += wv * grow[x];
            }
          }
          gw[wi] += acc;
        }
      }
    }
  }
  return dpad;
}

void relu(Map& m) {
  for (double& v : m.v) v = v > 0.0 ? v : 0.0;
}

struct Trace {
  Map p0, p1, p2;  // padded layer inputs
  Map z1, z2;      // pre-activations
  Map out;
};

Trace forward_trace(const Image& y, const std::array<Layer, 3>& layers) {
  const int h = y.height(), w = y.width();
  Trace t;
  t.p0 = pad(from_image(y), layers[0].k / 2);
  t.z1 = conv_forward(t.p0, layers[0], h, w);
  Map a1 = t.z1;
  relu(a1);
  t.p1 = pad(a1, layers[1].k / 2);
  t.z2 = conv_forward(t.p1, layers[1], h, w);
  Map a2 = t.z2;
  relu(a2);
  t.p2 = pad(a2, layers[2].k / 2);
  t.out = conv_forward(t.p2, layers[2], h, w);
  return t;
}

void check_sample(const SrcnnSample& s) {
  if (!s.x.same_shape(s.y)) fail(ErrorKind::shape, "SRCNN sample input and target differ in size");
}

}  // namespace

void SrcnnConfig::validate() const {
  if (c1 < 1 || c2 < 1) fail(ErrorKind::config, "SRCNN channel counts must be positive");
  for (int k : {k1, k2, k3}) {
    if (k < 1 || k % 2 == 0) fail(ErrorKind::config, "SRCNN kernel sizes must be odd and positive");
  }
  if (scale < 2 || scale > 4) fail(ErrorKind::config, "SRCNN scale must be 2, 3 or 4");
}

ModelWeights init_srcnn(const SrcnnConfig& cfg, std::uint64_t seed, double sigma) {
  cfg.validate();
  Prng rng(seed);
  ModelWeights w;
  const int dims[3][3] = {{cfg.c1, 1, cfg.k1}, {cfg.c2, cfg.c1, cfg.k2}, {1, cfg.c2, cfg.k3}};
  for (int i = 0; i < 3; ++i) {
    Tensor wt({dims[i][0], dims[i][1], dims[i][2], dims[i][2]});
    for (auto& v : wt.data()) v = static_cast<float>(rng.normal() * sigma);
    const std::string name = "conv" + std::to_string(i + 1);
    w.add(name + ".weight", std::move(wt));
    w.add(name + ".bias", Tensor({dims[i][0]}));
  }
  return w;
}

Image srcnn_forward(const Image& y_upscaled, const ModelWeights& w, const SrcnnConfig& cfg) {
  auto f = nn::from_image<float>(y_upscaled);
  f = nn::conv2d<float>(f, w, "conv1", cfg.c1, cfg.k1);
  nn::relu_inplace(f);
  f = nn::conv2d<float>(f, w, "conv2", cfg.c2, cfg.k2);
  nn::relu_inplace(f);
  f = nn::conv2d<float>(f, w, "conv3", 1, cfg.k3);
  return nn::to_image(f);
}

std::vector<double> srcnn_forward_double(const Image& y_upscaled, const ModelWeights& w, const SrcnnConfig& cfg) {
  return forward_trace(y_upscaled, load_layers(w, cfg)).out.v;
}

double srcnn_loss(const std::vector<SrcnnSample>& batch, const ModelWeights& w, const SrcnnConfig& cfg) {
  if (batch.empty()) fail(ErrorKind::shape, "empty SRCNN batch");
  const auto layers = load_layers(w, cfg);
  double total = 0.0;
  for (const auto& s : batch) {
    check_sample(s);
    const Map out = forward_trace(s.y, layers).out;
    auto target = s.x.pixels();
    for (std::size_t i = 0; i < out.v.size(); ++i) {
      const double r = out.v[i] - target[i];
      total += r * r;
    }
  }
  return total / static_cast<double>(batch.size());
}

LossAndGrad srcnn_loss_and_grad(const std::vector<SrcnnSample>& batch, const ModelWeights& w,
                                const SrcnnConfig& cfg) {
  if (batch.empty()) fail(ErrorKind::shape, "empty SRCNN batch");
  const auto layers = load_layers(w, cfg);
  std::array<std::vector<double>, 3> gw, gb;
  for (int i = 0; i < 3; ++i) {
    gw[i].assign(layers[i].w.size(), 0.0);
    gb[i].assign(layers[i].b.size(), 0.0);
  }

  const double inv_n = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  for (const auto& s : batch) {
    check_sample(s);
    const int h = s.y.height(), wd = s.y.width();
    const Trace t = forward_trace(s.y, layers);
    auto target = s.x.pixels();

    Map d3(1, h, wd);
    for (std::size_t i = 0; i < d3.v.size(); ++i) {
      const double r = t.out.v[i] - target[i];
      loss += r * r * inv_n;
      d3.v[i] = 2.0 * r * inv_n;
    }

    Map d2 = unpad(conv_backward(t.p2, d3, layers[2], gw[2], gb[2], true), h, wd, layers[2].k / 2);
    for (std::size_t i = 0; i < d2.v.size(); ++i) {
      if (t.z2.v[i] <= 0.0) d2.v[i] = 0.0;
    }
    Map d1 = unpad(conv_backward(t.p1, d2, layers[1], gw[1], gb[1], true), h, wd, layers[1].k / 2);
    for (std::size_t i = 0; i < d1.v.size(); ++i) {
      if (t.z1.v[i] <= 0.0) d1.v[i] = 0.0;
    }
    conv_backward(t.p0, d1, layers[0], gw[0], gb[0], false);
  }

  LossAndGrad result;
  result.loss = loss;
  for (int i = 0; i < 3; ++i) {
    const auto& l = layers[i];
    result.grads.add(l.name + ".weight",
                     Tensor({l.cout, l.cin, l.k, l.k}, std::vector<float>(gw[i].begin(), gw[i].end())));
    result.grads.add(l.name + ".bias", Tensor({l.cout}, std::vector<float>(gb[i].begin(), gb[i].end())));
  }
  return result;
}

double srcnn_mse(const std::vector<SrcnnSample>& samples, const ModelWeights& w, const SrcnnConfig& cfg) {
  if (samples.empty()) fail(ErrorKind::shape, "no samples");
  const auto layers = load_layers(w, cfg);
  double sse = 0.0;
  std::size_t count = 0;
  for (const auto& s : samples) {
    check_sample(s);
    const Map out = forward_trace(s.y, layers).out;
    auto target = s.x.pixels();
    for (std::size_t i = 0; i < out.v.size(); ++i) {
      const double r = out.v[i] - target[i];
      sse += r * r;
    }
    count += out.v.size();
  }
  return sse / static_cast<double>(count);
}

std::vector<SrcnnSample> load_training_pairs(const std::filesystem::path& pairs_dir, int scale) {
  const auto hr_files = list_images(pairs_dir / "hr");
  if (hr_files.empty()) fail(ErrorKind::config, "no training pairs under " + (pairs_dir / "hr").string());
  std::vector<SrcnnSample> samples;
  for (const auto& hr_path : hr_files) {
    const auto lr_path = pairs_dir / "lr" / hr_path.filename();
    try {
      Image hr = load_image(hr_path);
      Image lr = load_image(lr_path);
      if (lr.width() * scale != hr.width() || lr.height() * scale != hr.height()) {
        fail(ErrorKind::shape, "LR size times scale does not match HR size");
      }
      samples.push_back({bicubic_upscale(lr, scale), std::move(hr)});
    } catch (const Error& e) {
      throw e.with_context(hr_path.filename().string());
    }
  }
  return samples;
}

TrainResult srcnn_train(const std::vector<SrcnnSample>& samples, const SrcnnConfig& cfg, const TrainOptions& opt) {
  cfg.validate();
  if (samples.empty()) fail(ErrorKind::config, "empty training corpus");
  if (opt.iters < 0 || opt.batch_size < 1 || opt.patch < 1 || !(opt.lr >= 0.0)) {
    fail(ErrorKind::config, "invalid training options");
  }
  for (const auto& s : samples) check_sample(s);

  TrainResult result;
  result.weights = init_srcnn(cfg, opt.seed, opt.init_sigma);
  result.initial_mse = srcnn_mse(samples, result.weights, cfg);

  Prng rng(opt.seed ^ 0x5DEECE66DULL);
  std::vector<std::vector<double>> velocity;
  for (const auto& [name, t] : result.weights.entries()) velocity.emplace_back(t.size(), 0.0);

  std::ofstream log;
  if (opt.loss_log) {
    log.open(*opt.loss_log);
    if (!log) fail(ErrorKind::io, "cannot write " + opt.loss_log->string());
    log << "iter,loss\n";
    log.precision(10);
  }

  std::vector<SrcnnSample> batch;
  for (int it = 0; it < opt.iters; ++it) {
    batch.clear();
    for (int b = 0; b < opt.batch_size; ++b) {
      const auto& s = samples[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(samples.size()) - 1))];
      const int pw = std::min(opt.patch, s.x.width());
      const int ph = std::min(opt.patch, s.x.height());
      const int x0 = rng.uniform_int(0, s.x.width() - pw);
      const int y0 = rng.uniform_int(0, s.x.height() - ph);
      batch.push_back({crop(s.y, x0, y0, pw, ph), crop(s.x, x0, y0, pw, ph)});
    }
    const LossAndGrad lg = srcnn_loss_and_grad(batch, result.weights, cfg);
    if (!std::isfinite(lg.loss)) fail(ErrorKind::model, "training diverged at iteration " + std::to_string(it));
    result.losses.push_back(lg.loss);
    if (log) log << it << "," << lg.loss << "\n";

    auto& entries = result.weights.entries();
    for (std::size_t e = 0; e < entries.size(); ++e) {
      Tensor& param = entries[e].second;
      const Tensor& grad = lg.grads.entries()[e].second;
      auto& vel = velocity[e];
      for (std::size_t i = 0; i < param.size(); ++i) {
        vel[i] = opt.momentum * vel[i] - opt.lr * grad[i];
        param[i] = static_cast<float>(param[i] + vel[i]);
      }
    }
  }
  result.final_mse = srcnn_mse(samples, result.weights, cfg);
  return result;
}

TrainResult srcnn_train(const std::filesystem::path& pairs_dir, const SrcnnConfig& cfg, const TrainOptions& opt) {
  return srcnn_train(load_training_pairs(pairs_dir, cfg.scale), cfg, opt);
}

}  // namespace medsr::models
