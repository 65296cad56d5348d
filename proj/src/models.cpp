#include <cmath>

#include "medsr/metrics.hpp"
#include "medsr/models.hpp"
#include "medsr/resample.hpp"

namespace medsr::models {

double charbonnier(const Image& x_hat, const Image& x, double eps) {
  if (!x_hat.same_shape(x)) fail(ErrorKind::shape, "charbonnier inputs differ in size");
  if (!(eps > 0.0)) fail(ErrorKind::precondition, "charbonnier eps must be positive");
  auto a = x_hat.pixels();
  auto b = x.pixels();
  double excess = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double r = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    const double r2 = r * r;
    excess += r2 / (std::sqrt(r2 + eps * eps) + eps);
  }
  return eps + excess / static_cast<double>(a.size());
}

CompositeLoss composite_loss(const Image& x_hat, const Image& x, const Tensor& d_logits_fake,
                             std::array<double, 3> lambdas) {
  if (!x_hat.same_shape(x)) fail(ErrorKind::shape, "composite loss inputs differ in size");
  if (d_logits_fake.size() == 0) fail(ErrorKind::shape, "discriminator logits are empty");
  CompositeLoss loss;
  auto a = x_hat.pixels();
  auto b = x.pixels();
  double l1 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) l1 += std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i]));
  loss.pixel = l1 / static_cast<double>(a.size());
  loss.perceptual = metrics::lpips_proxy(x, x_hat);
  double gan = 0.0;
  for (float logit : d_logits_fake.data()) {
    const double l = logit;
    gan += l > 0.0 ? std::log1p(std::exp(-l)) : -l + std::log1p(std::exp(l));
  }
  loss.gan = gan / static_cast<double>(d_logits_fake.size());
  loss.total = lambdas[0] * loss.pixel + lambdas[1] * loss.perceptual + lambdas[2] * loss.gan;
  return loss;
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "bicubic") return ModelKind::bicubic;
  if (name == "srcnn") return ModelKind::srcnn;
  if (name == "swinlite") return ModelKind::swinlite;
  if (name == "rrdblite") return ModelKind::rrdblite;
  fail(ErrorKind::usage, "unknown model '" + std::string(name) + "' (expected bicubic, srcnn, swinlite or rrdblite)");
}

std::string_view to_string(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::bicubic: return "bicubic";
    case ModelKind::srcnn: return "srcnn";
    case ModelKind::swinlite: return "swinlite";
    case ModelKind::rrdblite: return "rrdblite";
  }
  return "?";
}

bool is_learned(ModelKind kind) noexcept { return kind != ModelKind::bicubic; }

bool supports_scale(ModelKind kind, int scale) noexcept {
  if (scale < 2 || scale > 4) return false;
  return kind != ModelKind::swinlite || swinlite_supports_scale(scale);
}

ModelWeights init_weights(ModelKind kind, int scale, std::uint64_t seed) {
  switch (kind) {
    case ModelKind::srcnn: {
      SrcnnConfig cfg;
      cfg.scale = scale;
      return init_srcnn(cfg, seed);
    }
    case ModelKind::swinlite: {
      SwinLiteConfig cfg;
      cfg.scale = scale;
      return init_swinlite(cfg, seed);
    }
    case ModelKind::rrdblite: {
      RrdbLiteConfig cfg;
      cfg.scale = scale;
      return init_rrdblite(cfg, seed);
    }
    case ModelKind::bicubic: break;
  }
  return {};
}

Image bicubic_upscale(const Image& lr, int scale) {
  return resample(lr, lr.width() * scale, lr.height() * scale, ResampleKernel::bicubic, false);
}

Image upscale(const Image& lr, ModelKind kind, const ModelWeights* weights, int scale) {
  if (!supports_scale(kind, scale)) {
    fail(ErrorKind::config, std::string(to_string(kind)) + " does not support scale " + std::to_string(scale));
  }
  if (kind == ModelKind::bicubic) return bicubic_upscale(lr, scale);
  if (!weights || weights->empty()) fail(ErrorKind::model, std::string(to_string(kind)) + " needs weights");
  switch (kind) {
    case ModelKind::srcnn: {
      SrcnnConfig cfg;
      cfg.scale = scale;
      return srcnn_forward(bicubic_upscale(lr, scale), *weights, cfg);
    }
    case ModelKind::swinlite: {
      SwinLiteConfig cfg;
      cfg.scale = scale;
      return swinlite_forward(lr, *weights, cfg);
    }
    case ModelKind::rrdblite: {
      RrdbLiteConfig cfg;
      cfg.scale = scale;
      return rrdb_forward(lr, *weights, cfg);
    }
    case ModelKind::bicubic: break;
  }
  return bicubic_upscale(lr, scale);
}

}  // namespace medsr::models
