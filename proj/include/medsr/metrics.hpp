#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "medsr/image.hpp"
#include "medsr/tensor.hpp"

namespace medsr::metrics {

// Full-reference metrics take (reference, candidate) of equal size and throw
// a shape error otherwise. Sharpness, FSIM and VIF work on the 0-255 scale;
// PSNR and SSIM on [0,1].

/// 10*log10(1/MSE); MSE below 1e-12 reports 100 dB.
double psnr(const Image& ref, const Image& x);

/// Gaussian-window SSIM (11x11, sigma 1.5, C1 = 0.01^2, C2 = 0.03^2), mean
/// over the window centers that fit entirely inside the image. Needs both
/// dimensions >= 11.
double ssim(const Image& ref, const Image& x);

/// Phase-congruency map of a [0,255] image: log-Gabor bank with 4 scales,
/// 4 orientations, min wavelength 6, multiplier 2, sigma_onf 0.55. The image
/// is reflect-padded to power-of-two dimensions before filtering and the
/// result cropped back.
std::vector<double> phase_congruency(const Image& img255);

/// FSIM with T1 = 0.85, T2 = 160 and Scharr gradients; needs dims >= 32.
double fsim(const Image& ref, const Image& x);

/// Pixel-domain VIF over 4 scales, sigma_n^2 = 2; needs dims >= 32.
double vif(const Image& ref, const Image& x);

/// Weights of the fixed perceptual feature net (3 x [3x3 conv, ReLU, 2x2
/// average pool], 8/16/32 channels), drawn from Prng(0xD1CE).
const ModelWeights& lpips_proxy_weights();
ModelWeights make_lpips_proxy_weights();

/// Stage outputs of the feature net for one image (input mapped to [-1,1]).
std::vector<Tensor> lpips_proxy_features(const Image& img);

/// Mean over stages of the mean squared difference between channel-unit-
/// normalized feature vectors. Needs dims >= 16.
double lpips_proxy(const Image& ref, const Image& x);
double lpips_proxy_distance(const std::vector<Tensor>& a, const std::vector<Tensor>& b);

/// Mean of Gx^2 + Gy^2 (3x3 Sobel) over interior pixels.
double tenengrad(const Image& x);
/// Population variance of the 4-neighbour Laplacian over interior pixels.
double laplacian_variance(const Image& x);
/// Mean of ((I(x+2,y)-I(x,y))^2 + (I(x,y+2)-I(x,y))^2)/2 where both exist.
double brenner(const Image& x);

/// Signed over/under-enhancement: (T_x - T_ref) / max(T_x, T_ref, 1e-9),
/// T = tenengrad. In [-1, 1]; 0 when sharpness matches.
double odi(const Image& ref, const Image& x);

struct MetricValue {
  std::string name;
  double value = 0.0;
  bool higher_is_better = true;

  friend bool operator==(const MetricValue&, const MetricValue&) = default;
};

/// All nine metrics in table order.
struct MetricReport {
  std::vector<MetricValue> values;

  double get(std::string_view name) const;
  /// {"psnr": ..., ...} in table order.
  std::string to_json() const;
  /// Values in table order, comma separated; csv_header() names them.
  std::string to_csv_row() const;
  static std::string csv_header();

  friend bool operator==(const MetricReport&, const MetricReport&) = default;
};

struct MetricInfo {
  std::string_view name;   // snake-case identifier
  std::string_view label;  // table row label
  bool higher_is_better;
  std::function<double(const Image&, const Image&)> fn;
};

/// Registry in the order PSNR, SSIM, FSIM, LPIPS, ODI, VIF, Tenengrad,
/// Laplacian variance, Brenner. No-reference metrics score the candidate.
const std::vector<MetricInfo>& registry();
const MetricInfo& find_metric(std::string_view name);

/// Runs every metric; a failure is rethrown with the metric name prefixed.
MetricReport evaluate_all(const Image& ref, const Image& x);
/// Runs the named subset, in registry order.
MetricReport evaluate(const Image& ref, const Image& x, const std::vector<std::string>& names);

}  // namespace medsr::metrics
