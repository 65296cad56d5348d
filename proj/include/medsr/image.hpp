#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace medsr {

/// Single-channel raster, row-major, nominal range [0,1].
///
/// Dimensions are at least 1x1 and every sample is finite; the constructors
/// enforce both. Pixel access is (x, y) with x the column.
class Image {
 public:
  Image(int width, int height, float fill = 0.0f);
  Image(int width, int height, std::vector<float> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }

  float operator()(int x, int y) const noexcept {
    return data_[static_cast<std::size_t>(y) * width_ + x];
  }
  float& operator()(int x, int y) noexcept { return data_[static_cast<std::size_t>(y) * width_ + x]; }

  std::span<const float> pixels() const noexcept { return data_; }
  std::span<float> pixels() noexcept { return data_; }
  const std::vector<float>& data() const noexcept { return data_; }

  bool same_shape(const Image& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int width_;
  int height_;
  std::vector<float> data_;
};

/// Filter taps, row-major, odd width and height so the support is centered.
class Kernel2D {
 public:
  Kernel2D(int kwidth, int kheight, std::vector<float> taps);

  static Kernel2D identity();
  static Kernel2D box(int size);

  int width() const noexcept { return kwidth_; }
  int height() const noexcept { return kheight_; }
  int center_x() const noexcept { return kwidth_ / 2; }
  int center_y() const noexcept { return kheight_ / 2; }

  float operator()(int i, int j) const noexcept { return taps_[static_cast<std::size_t>(j) * kwidth_ + i]; }
  std::span<const float> taps() const noexcept { return taps_; }

  /// Rotated by 180 degrees. correlate(img, k) == convolve2d(img, k.flipped()).
  Kernel2D flipped() const;

 private:
  int kwidth_;
  int kheight_;
  std::vector<float> taps_;
};

enum class BorderMode { clamp, reflect, zero };

/// Maps an out-of-range coordinate into [0, n). Returns -1 for `zero` when
/// the coordinate falls outside. `reflect` mirrors without repeating the edge
/// sample (-1 -> 1), and handles offsets larger than n by folding repeatedly.
int border_index(int i, int n, BorderMode mode) noexcept;

/// Linear scale by 255, no rounding. Sharpness metrics and FSIM/VIF constants
/// are defined on this scale.
Image to_byte_range(const Image& img);

/// Central crop to (w, h); both must not exceed the source dimensions.
Image crop_center(const Image& img, int w, int h);

/// Crop window starting at (x0, y0).
Image crop(const Image& img, int x0, int y0, int w, int h);

}  // namespace medsr
