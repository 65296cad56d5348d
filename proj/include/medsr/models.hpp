#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "medsr/image.hpp"
#include "medsr/tensor.hpp"

namespace medsr::models {

// ---------------------------------------------------------------------------
// SRCNN

/// Three-layer pre-upsampling network. Weight names: conv1, conv2, conv3
/// (".weight" [out, in, k, k] and ".bias" [out]).
struct SrcnnConfig {
  int c1 = 64;
  int c2 = 32;
  int k1 = 9;
  int k2 = 1;
  int k3 = 5;
  int scale = 2;

  void validate() const;
};

/// Zero biases, weights ~ N(0, sigma^2) drawn in file order from Prng(seed).
ModelWeights init_srcnn(const SrcnnConfig& cfg, std::uint64_t seed, double sigma = 0.01);

/// conv9 -> ReLU -> conv1 -> ReLU -> conv5 on the already-upscaled input,
/// reflect padding, same-size output.
Image srcnn_forward(const Image& y_upscaled, const ModelWeights& w, const SrcnnConfig& cfg);

/// Double-precision forward pass (used by the gradient check and training).
std::vector<double> srcnn_forward_double(const Image& y_upscaled, const ModelWeights& w, const SrcnnConfig& cfg);

struct SrcnnSample {
  Image y;  // upscaled LR
  Image x;  // HR target, same size
};

struct LossAndGrad {
  double loss = 0.0;
  ModelWeights grads;  // same names and shapes as the weights
};

/// L = (1/N) sum_i ||F(Y_i) - X_i||^2, the squared norm summed over pixels.
/// Gradients are exact backpropagation in double precision.
LossAndGrad srcnn_loss_and_grad(const std::vector<SrcnnSample>& batch, const ModelWeights& w,
                                const SrcnnConfig& cfg);

/// Loss only, in double precision.
double srcnn_loss(const std::vector<SrcnnSample>& batch, const ModelWeights& w, const SrcnnConfig& cfg);

struct TrainOptions {
  int iters = 1000;
  double lr = 1e-4;
  double momentum = 0.9;
  int batch_size = 16;
  int patch = 33;
  std::uint64_t seed = 0;
  double init_sigma = 0.01;
  std::optional<std::filesystem::path> loss_log;  // CSV iter,loss
};

struct TrainResult {
  ModelWeights weights;
  std::vector<double> losses;  // one per iteration
  double initial_mse = 0.0;    // per-pixel MSE over the full training images
  double final_mse = 0.0;
};

/// Builds training samples from a make_pairs directory (hr/ and lr/): each
/// LR image is bicubic-upscaled to its HR partner's size.
std::vector<SrcnnSample> load_training_pairs(const std::filesystem::path& pairs_dir, int scale);

/// SGD with momentum on random patch batches. Patch positions come from
/// Prng(seed) after the weight draws, so a seed fixes the whole run.
TrainResult srcnn_train(const std::vector<SrcnnSample>& samples, const SrcnnConfig& cfg, const TrainOptions& opt);
TrainResult srcnn_train(const std::filesystem::path& pairs_dir, const SrcnnConfig& cfg, const TrainOptions& opt);

/// Per-pixel MSE of the network over whole samples.
double srcnn_mse(const std::vector<SrcnnSample>& samples, const ModelWeights& w, const SrcnnConfig& cfg);

// ---------------------------------------------------------------------------
// SwinIR-lite

/// Weight names:
///   conv_first                                  [E,1,3,3]
///   layers.{b}.blocks.{l}.norm1 / norm2         weight, bias [E]
///   layers.{b}.blocks.{l}.attn.qkv              [3E,E], [3E]
///   layers.{b}.blocks.{l}.attn.relative_position_bias_table [(2w-1)^2, heads]
///   layers.{b}.blocks.{l}.attn.proj             [E,E], [E]
///   layers.{b}.blocks.{l}.mlp.fc1 / fc2         [rE,E] / [E,rE]
///   layers.{b}.conv                             [E,E,3,3]
///   conv_after_body                             [E,E,3,3]
///   upsample.{i}                                [E,E,3,3], one per x2 stage
///   conv_last                                   [1,E,3,3]
/// Block l is shifted when l is odd.
struct SwinLiteConfig {
  int embed_dim = 16;
  int rstb_count = 2;
  int layers_per_rstb = 2;
  int window = 8;
  int heads = 2;
  int mlp_ratio = 2;
  int scale = 2;

  void validate() const;
  int upsample_stages() const;
};

bool swinlite_supports_scale(int scale) noexcept;

/// Small random weights plus a channel-0 pass-through in the shallow conv and
/// the reconstruction path, so an untrained network starts near a nearest
/// upsample of its input.
ModelWeights init_swinlite(const SwinLiteConfig& cfg, std::uint64_t seed);

/// Softmax rows captured by window_attention, window-major.
struct AttentionProbe {
  int windows = 0;
  int heads = 0;
  int tokens = 0;
  std::vector<double> weights;  // [window][head][query][key]
  std::vector<int> region;      // [window][token] shifted-window region label

  double at(int window, int head, int query, int key) const {
    return weights[((static_cast<std::size_t>(window) * heads + head) * tokens + query) * tokens + key];
  }
};

/// (Shifted) window multi-head self-attention over a (C, H, W) map. Inputs
/// whose size is not a multiple of the window are reflect-padded and the
/// result cropped. In shifted mode the map is rolled by -window/2, pairs of
/// tokens from different regions get exactly zero weight, and the result is
/// rolled back. `prefix` names the attention weights (prefix + ".qkv" ...).
Tensor window_attention(const Tensor& x, const ModelWeights& w, const std::string& prefix, int window, int heads,
                        bool shifted, AttentionProbe* probe = nullptr);

/// LayerNorm over channels at each position (eps 1e-5).
Tensor layer_norm_channels(const Tensor& x, const Tensor& gamma, const Tensor& beta);

/// Shallow features F_0 of an LR image.
Tensor swinlite_shallow(const Image& y, const ModelWeights& w, const SwinLiteConfig& cfg);
/// F_deep = conv_after_body(RSTB^K(F_0)).
Tensor swinlite_deep(const Tensor& f0, const ModelWeights& w, const SwinLiteConfig& cfg);
/// Reconstruction head applied to F_deep + F_0.
Image swinlite_reconstruct(const Tensor& f, const ModelWeights& w, const SwinLiteConfig& cfg);

Image swinlite_forward(const Image& y, const ModelWeights& w, const SwinLiteConfig& cfg);

// ---------------------------------------------------------------------------
// RRDB-lite generator and U-Net discriminator

/// Weight names:
///   conv_first                    [F,1,3,3]
///   body.{r}.rdb{1..3}.conv{i}    conv i of 5; in F+G(i-1), out G (F for i=5)
///   conv_body                     [F,F,3,3]
///   conv_up{1..}                  [F,F,3,3], one per upsample stage
///   conv_last                     [1,F,3,3]
struct RrdbLiteConfig {
  int features = 16;
  int rrdb_count = 2;
  int dense_convs = 5;
  int growth = 8;
  double beta = 0.2;
  int scale = 2;

  void validate() const;
  /// Upsample factors: x2 -> {2}, x3 -> {3}, x4 -> {2,2}.
  std::vector<int> upsample_factors() const;
};

/// Dense convs drawn from N(0, 2/fan_in) scaled by 0.1; conv_first and the
/// upsampling path start as channel-0 pass-throughs plus small noise.
ModelWeights init_rrdblite(const RrdbLiteConfig& cfg, std::uint64_t seed);

/// The RRDB stack between conv_first and conv_body.
Tensor rrdb_body(const Tensor& x, const ModelWeights& w, const RrdbLiteConfig& cfg);
Image rrdb_forward(const Image& y, const ModelWeights& w, const RrdbLiteConfig& cfg);

/// Weight names: conv0 [8,1], enc1 [16,8] stride 2, enc2 [32,16] stride 2,
/// mid [32,32], dec1 [16,32], dec2 [8,16], conv_out [1,8]; all 3x3.
ModelWeights init_unet_discriminator(std::uint64_t seed);

/// Per-pixel logits (1, H, W). H and W must be multiples of 4.
Tensor unet_discriminator_forward(const Image& x, const ModelWeights& w);

// ---------------------------------------------------------------------------
// Losses

/// Mean over pixels of sqrt(r^2 + eps^2), evaluated as
/// eps + mean(r^2 / (sqrt(r^2 + eps^2) + eps)) so a zero residual gives eps.
double charbonnier(const Image& x_hat, const Image& x, double eps = 1e-3);

struct CompositeLoss {
  double total = 0.0;
  double pixel = 0.0;       // mean |x - x_hat|
  double perceptual = 0.0;  // lpips_proxy(x, x_hat)
  double gan = 0.0;         // mean softplus(-logit), BCE against label 1
};

/// total = l1 * pixel + l2 * perceptual + l3 * gan.
CompositeLoss composite_loss(const Image& x_hat, const Image& x, const Tensor& d_logits_fake,
                             std::array<double, 3> lambdas = {1.0, 1.0, 0.1});

// ---------------------------------------------------------------------------
// Dispatch

enum class ModelKind { bicubic, srcnn, swinlite, rrdblite };

ModelKind parse_model_kind(std::string_view name);
std::string_view to_string(ModelKind kind) noexcept;
bool is_learned(ModelKind kind) noexcept;
bool supports_scale(ModelKind kind, int scale) noexcept;

/// Default weights for a learned model at `scale` from a seed.
ModelWeights init_weights(ModelKind kind, int scale, std::uint64_t seed);

/// LR -> SR at `scale`. srcnn bicubic-upscales first; the others upscale
/// internally. Learned models require weights (model error otherwise).
Image upscale(const Image& lr, ModelKind kind, const ModelWeights* weights, int scale);

/// Plain bicubic upscale to exactly (w*scale, h*scale).
Image bicubic_upscale(const Image& lr, int scale);

}  // namespace medsr::models
