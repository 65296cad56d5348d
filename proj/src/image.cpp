#include "medsr/image.hpp"

#include <cmath>
#include <string>

#include "medsr/error.hpp"

namespace medsr {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::usage: return "usage error";
    case ErrorKind::format: return "format error";
    case ErrorKind::io: return "I/O error";
    case ErrorKind::shape: return "shape error";
    case ErrorKind::precondition: return "precondition error";
    case ErrorKind::config: return "configuration error";
    case ErrorKind::degradation: return "degradation error";
    case ErrorKind::model: return "model error";
  }
  return "error";
}

namespace {

void check_finite(std::span<const float> values, const char* what) {
  for (float v : values) {
    if (!std::isfinite(v)) fail(ErrorKind::precondition, std::string(what) + " contains a non-finite value");
  }
}

}  // namespace

Image::Image(int width, int height, float fill) : width_(width), height_(height) {
  if (width < 1 || height < 1) {
    fail(ErrorKind::shape, "image dimensions must be positive, got " + std::to_string(width) + "x" +
                               std::to_string(height));
  }
  if (!std::isfinite(fill)) fail(ErrorKind::precondition, "image fill value is not finite");
  data_.assign(static_cast<std::size_t>(width) * height, fill);
}

Image::Image(int width, int height, std::vector<float> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width < 1 || height < 1) {
    fail(ErrorKind::shape, "image dimensions must be positive, got " + std::to_string(width) + "x" +
                               std::to_string(height));
  }
  if (data_.size() != static_cast<std::size_t>(width) * height) {
    fail(ErrorKind::shape, "image data length " + std::to_string(data_.size()) + " does not match " +
                               std::to_string(width) + "x" + std::to_string(height));
  }
  check_finite(data_, "image");
}

Kernel2D::Kernel2D(int kwidth, int kheight, std::vector<float> taps)
    : kwidth_(kwidth), kheight_(kheight), taps_(std::move(taps)) {
  if (kwidth < 1 || kheight < 1 || kwidth % 2 == 0 || kheight % 2 == 0) {
    fail(ErrorKind::shape, "kernel dimensions must be odd and positive");
  }
  if (taps_.size() != static_cast<std::size_t>(kwidth) * kheight) {
    fail(ErrorKind::shape, "kernel tap count does not match its dimensions");
  }
  check_finite(taps_, "kernel");
}

Kernel2D Kernel2D::identity() { return Kernel2D(1, 1, {1.0f}); }

Kernel2D Kernel2D::box(int size) {
  const auto n = static_cast<std::size_t>(size) * size;
  return Kernel2D(size, size, std::vector<float>(n, 1.0f / static_cast<float>(n)));
}

Kernel2D Kernel2D::flipped() const {
  std::vector<float> out(taps_.rbegin(), taps_.rend());
  return Kernel2D(kwidth_, kheight_, std::move(out));
}

int border_index(int i, int n, BorderMode mode) noexcept {
  if (i >= 0 && i < n) return i;
  switch (mode) {
    case BorderMode::zero: return -1;
    case BorderMode::clamp: return i < 0 ? 0 : n - 1;
    case BorderMode::reflect: {
      if (n == 1) return 0;
      const int period = 2 * (n - 1);
      int m = i % period;
      if (m < 0) m += period;
      return m < n ? m : period - m;
    }
  }
  return -1;
}

Image to_byte_range(const Image& img) {
  Image out = img;
  for (float& v : out.pixels()) v *= 255.0f;
  return out;
}

Image crop(const Image& img, int x0, int y0, int w, int h) {
  if (x0 < 0 || y0 < 0 || w < 1 || h < 1 || x0 + w > img.width() || y0 + h > img.height()) {
    fail(ErrorKind::shape, "crop window exceeds the image");
  }
  Image out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) out(x, y) = img(x0 + x, y0 + y);
  }
  return out;
}

Image crop_center(const Image& img, int w, int h) {
  return crop(img, (img.width() - w) / 2, (img.height() - h) / 2, w, h);
}

}  // namespace medsr
