// Perceptual distance on a fixed, seed-frozen convolutional feature net.

#include <cmath>

#include "medsr/metrics.hpp"
#include "medsr/nn.hpp"
#include "medsr/prng.hpp"
#include "metrics_internal.hpp"

namespace medsr::metrics {

namespace {

constexpr int kStageChannels[3] = {8, 16, 32};
constexpr std::uint64_t kSeed = 0xD1CE;

}  // namespace

ModelWeights make_lpips_proxy_weights() {
  Prng rng(kSeed);
  ModelWeights w;
  int cin = 1;
  for (int s = 0; s < 3; ++s) {
    const int cout = kStageChannels[s];
    const double stddev = std::sqrt(2.0 / (cin * 9.0));
    Tensor weight({cout, cin, 3, 3});
    for (auto& v : weight.data()) v = static_cast<float>(rng.normal() * stddev);
    const std::string prefix = "stage" + std::to_string(s + 1);
    w.add(prefix + ".weight", std::move(weight));
    w.add(prefix + ".bias", Tensor({cout}));
    cin = cout;
  }
  return w;
}

const ModelWeights& lpips_proxy_weights() {
  static const ModelWeights weights = make_lpips_proxy_weights();
  return weights;
}

std::vector<Tensor> lpips_proxy_features(const Image& img) {
  detail::require_min_dim(img, 16, "lpips_proxy");
  const ModelWeights& w = lpips_proxy_weights();
  Tensor f = nn::from_image<float>(img);
  for (auto& v : f.data()) v = 2.0f * v - 1.0f;
  std::vector<Tensor> stages;
  for (int s = 0; s < 3; ++s) {
    f = nn::conv2d<float>(f, w, "stage" + std::to_string(s + 1), kStageChannels[s], 3);
    nn::relu_inplace(f);
    f = nn::avg_pool2(f);
    stages.push_back(f);
  }
  return stages;
}

double lpips_proxy_distance(const std::vector<Tensor>& a, const std::vector<Tensor>& b) {
  if (a.size() != b.size() || a.empty()) fail(ErrorKind::shape, "feature stacks differ in depth");
  constexpr double eps = 1e-10;
  double total = 0.0;
  for (std::size_t s = 0; s < a.size(); ++s) {
    const Tensor& fa = a[s];
    const Tensor& fb = b[s];
    if (fa.dims() != fb.dims()) fail(ErrorKind::shape, "feature maps differ in shape");
    const int c = fa.channels(), h = fa.height(), w = fa.width();
    double stage = 0.0;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double na = 0.0, nb = 0.0;
        for (int ch = 0; ch < c; ++ch) {
          na += static_cast<double>(fa.at(ch, y, x)) * fa.at(ch, y, x);
          nb += static_cast<double>(fb.at(ch, y, x)) * fb.at(ch, y, x);
        }
        na = std::sqrt(na) + eps;
        nb = std::sqrt(nb) + eps;
        for (int ch = 0; ch < c; ++ch) {
          const double d = fa.at(ch, y, x) / na - fb.at(ch, y, x) / nb;
          stage += d * d;
        }
      }
    }
    total += stage / (static_cast<double>(c) * h * w);
  }
  return total / static_cast<double>(a.size());
}

double lpips_proxy(const Image& ref, const Image& x) {
  detail::require_same_shape(ref, x);
  return lpips_proxy_distance(lpips_proxy_features(ref), lpips_proxy_features(x));
}

}  // namespace medsr::metrics
