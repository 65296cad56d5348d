#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "medsr/image.hpp"
#include "medsr/tensor.hpp"

// Building blocks for the SR networks and the perceptual feature net. All
// feature maps are rank-3 (C, H, W). Convolutions follow the deep-learning
// convention (cross-correlation, weight layout [out, in, kh, kw]).
namespace medsr::nn {

enum class Padding { reflect, zero };

template <typename T>
using FeatureMap = BasicTensor<T>;

template <typename T>
FeatureMap<T> from_image(const Image& img) {
  FeatureMap<T> f({1, img.height(), img.width()});
  auto px = img.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) f[i] = static_cast<T>(px[i]);
  return f;
}

/// Channel 0 of `f` as an image. Values are not clamped.
template <typename T>
Image to_image(const FeatureMap<T>& f) {
  std::vector<float> data(static_cast<std::size_t>(f.height()) * f.width());
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = static_cast<float>(f[i]);
  return Image(f.width(), f.height(), std::move(data));
}

/// Pads every channel by `pad` on each side.
template <typename T>
FeatureMap<T> pad(const FeatureMap<T>& in, int pad, Padding mode) {
  if (pad == 0) return in;
  const int c = in.channels(), h = in.height(), w = in.width();
  FeatureMap<T> out({c, h + 2 * pad, w + 2 * pad});
  const BorderMode border = mode == Padding::reflect ? BorderMode::reflect : BorderMode::zero;
  std::vector<int> xs(static_cast<std::size_t>(w + 2 * pad)), ys(static_cast<std::size_t>(h + 2 * pad));
  for (int x = 0; x < w + 2 * pad; ++x) xs[x] = border_index(x - pad, w, border);
  for (int y = 0; y < h + 2 * pad; ++y) ys[y] = border_index(y - pad, h, border);
  for (int ch = 0; ch < c; ++ch) {
    for (int y = 0; y < h + 2 * pad; ++y) {
      for (int x = 0; x < w + 2 * pad; ++x) {
        out.at(ch, y, x) = (xs[x] < 0 || ys[y] < 0) ? T(0) : in.at(ch, ys[y], xs[x]);
      }
    }
  }
  return out;
}

/// 2D convolution with square kernels, "same"-style padding of k/2 and the
/// given stride: output size is (H + 2*(k/2) - k) / stride + 1.
template <typename T>
FeatureMap<T> conv2d(const FeatureMap<T>& in, const BasicTensor<T>& weight, const BasicTensor<T>& bias,
                     int stride = 1, Padding mode = Padding::reflect) {
  if (weight.rank() != 4 || weight.dim(1) != in.channels() || weight.dim(2) != weight.dim(3) ||
      weight.dim(2) % 2 == 0) {
    fail(ErrorKind::model, "conv2d weight " + dims_to_string(weight.dims()) + " incompatible with input " +
                               dims_to_string(in.dims()));
  }
  const int cout = weight.dim(0), cin = weight.dim(1), k = weight.dim(2);
  if (bias.rank() != 1 || bias.dim(0) != cout) fail(ErrorKind::model, "conv2d bias does not match output channels");

  const int p = k / 2;
  const FeatureMap<T> src = pad(in, p, mode);
  const int ph = src.height(), pw = src.width();
  const int oh = (ph - k) / stride + 1;
  const int ow = (pw - k) / stride + 1;
  FeatureMap<T> out({cout, oh, ow});

  for (int o = 0; o < cout; ++o) {
    T* dst = out.channel(o);
    std::fill(dst, dst + static_cast<std::size_t>(oh) * ow, bias[o]);
    for (int i = 0; i < cin; ++i) {
      const T* plane = src.channel(i);
      for (int ky = 0; ky < k; ++ky) {
        for (int kx = 0; kx < k; ++kx) {
          const T wv = weight[((static_cast<std::size_t>(o) * cin + i) * k + ky) * k + kx];
          if (wv == T(0)) continue;
          for (int y = 0; y < oh; ++y) {
            const T* row = plane + static_cast<std::size_t>(y * stride + ky) * pw + kx;
            T* orow = dst + static_cast<std::size_t>(y) * ow;
            if (stride == 1) {
              for (int x = 0; x < ow; ++x) orow[x] += wv * row[x];
            } else {
              for (int x = 0; x < ow; ++x) orow[x] += wv * row[x * stride];
            }
          }
        }
      }
    }
  }
  return out;
}

template <typename T>
FeatureMap<T> conv2d(const FeatureMap<T>& in, const ModelWeights& w, const std::string& prefix, int cout, int k,
                     int stride = 1, Padding mode = Padding::reflect) {
  const Tensor& wt = w.expect(prefix + ".weight", {cout, in.channels(), k, k});
  const Tensor& bt = w.expect(prefix + ".bias", {cout});
  if constexpr (std::is_same_v<T, float>) {
    return conv2d<T>(in, wt, bt, stride, mode);
  } else {
    return conv2d<T>(in, wt.template cast<T>(), bt.template cast<T>(), stride, mode);
  }
}

template <typename T>
void relu_inplace(FeatureMap<T>& f) {
  for (auto& v : f.data()) v = v > T(0) ? v : T(0);
}

template <typename T>
void leaky_relu_inplace(FeatureMap<T>& f, T slope = T(0.2)) {
  for (auto& v : f.data()) v = v >= T(0) ? v : v * slope;
}

template <typename T>
FeatureMap<T> upsample_nearest(const FeatureMap<T>& in, int factor) {
  const int c = in.channels(), h = in.height(), w = in.width();
  FeatureMap<T> out({c, h * factor, w * factor});
  for (int ch = 0; ch < c; ++ch) {
    for (int y = 0; y < h * factor; ++y) {
      for (int x = 0; x < w * factor; ++x) out.at(ch, y, x) = in.at(ch, y / factor, x / factor);
    }
  }
  return out;
}

/// 2x2 mean pooling, stride 2; odd trailing rows/columns are dropped.
template <typename T>
FeatureMap<T> avg_pool2(const FeatureMap<T>& in) {
  const int c = in.channels(), h = in.height() / 2, w = in.width() / 2;
  if (h == 0 || w == 0) fail(ErrorKind::shape, "avg_pool2 input is smaller than 2x2");
  FeatureMap<T> out({c, h, w});
  for (int ch = 0; ch < c; ++ch) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        out.at(ch, y, x) = (in.at(ch, 2 * y, 2 * x) + in.at(ch, 2 * y, 2 * x + 1) + in.at(ch, 2 * y + 1, 2 * x) +
                            in.at(ch, 2 * y + 1, 2 * x + 1)) /
                           T(4);
      }
    }
  }
  return out;
}

/// Channel concatenation of maps with equal spatial size.
template <typename T>
FeatureMap<T> concat(const std::vector<const FeatureMap<T>*>& parts) {
  int c = 0;
  for (const auto* p : parts) c += p->channels();
  FeatureMap<T> out({c, parts.front()->height(), parts.front()->width()});
  auto it = out.data().begin();
  for (const auto* p : parts) it = std::copy(p->data().begin(), p->data().end(), it);
  return out;
}

/// a += s * b
template <typename T>
void add_scaled(FeatureMap<T>& a, const FeatureMap<T>& b, T s = T(1)) {
  if (a.dims() != b.dims()) fail(ErrorKind::shape, "feature map shapes differ in residual add");
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += s * b[i];
}

inline float gelu(float x) { return 0.5f * x * (1.0f + std::erf(x / std::sqrt(2.0f))); }

}  // namespace medsr::nn
