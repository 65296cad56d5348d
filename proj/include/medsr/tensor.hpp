#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "medsr/error.hpp"

namespace medsr {

/// Dense row-major tensor. Feature maps are rank 3 (C, H, W); batched
/// tensors prepend N. Dimensions are positive.
template <typename T>
class BasicTensor {
 public:
  BasicTensor() = default;

  explicit BasicTensor(std::vector<int> dims, T fill = T(0)) : dims_(std::move(dims)) {
    data_.assign(count(dims_), fill);
  }

  BasicTensor(std::vector<int> dims, std::vector<T> data) : dims_(std::move(dims)), data_(std::move(data)) {
    if (data_.size() != count(dims_)) fail(ErrorKind::shape, "tensor data length does not match its dimensions");
  }

  static std::size_t count(const std::vector<int>& dims) {
    std::size_t n = 1;
    for (int d : dims) {
      if (d < 1) fail(ErrorKind::shape, "tensor dimensions must be positive");
      n *= static_cast<std::size_t>(d);
    }
    return n;
  }

  int rank() const noexcept { return static_cast<int>(dims_.size()); }
  int dim(int i) const noexcept { return dims_[static_cast<std::size_t>(i)]; }
  const std::vector<int>& dims() const noexcept { return dims_; }
  std::size_t size() const noexcept { return data_.size(); }

  std::vector<T>& data() noexcept { return data_; }
  const std::vector<T>& data() const noexcept { return data_; }
  T* ptr() noexcept { return data_.data(); }
  const T* ptr() const noexcept { return data_.data(); }

  T& operator[](std::size_t i) noexcept { return data_[i]; }
  const T& operator[](std::size_t i) const noexcept { return data_[i]; }

  // Rank-3 (C, H, W) access.
  int channels() const noexcept { return dims_[0]; }
  int height() const noexcept { return dims_[1]; }
  int width() const noexcept { return dims_[2]; }
  T& at(int c, int y, int x) noexcept {
    return data_[(static_cast<std::size_t>(c) * dims_[1] + y) * dims_[2] + x];
  }
  const T& at(int c, int y, int x) const noexcept {
    return data_[(static_cast<std::size_t>(c) * dims_[1] + y) * dims_[2] + x];
  }
  T* channel(int c) noexcept { return data_.data() + static_cast<std::size_t>(c) * dims_[1] * dims_[2]; }
  const T* channel(int c) const noexcept {
    return data_.data() + static_cast<std::size_t>(c) * dims_[1] * dims_[2];
  }

  template <typename U>
  BasicTensor<U> cast() const {
    return BasicTensor<U>(dims_, std::vector<U>(data_.begin(), data_.end()));
  }

  friend bool operator==(const BasicTensor&, const BasicTensor&) = default;

 private:
  std::vector<int> dims_;
  std::vector<T> data_;
};

using Tensor = BasicTensor<float>;

std::string dims_to_string(const std::vector<int>& dims);

/// Named tensors in file order. Names are unique.
class ModelWeights {
 public:
  void add(std::string name, Tensor tensor);

  bool contains(std::string_view name) const noexcept;
  const Tensor& at(std::string_view name) const;
  Tensor& at(std::string_view name);
  /// Like at(), but also requires the given dimensions (model error otherwise).
  const Tensor& expect(std::string_view name, const std::vector<int>& dims) const;

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const std::vector<std::pair<std::string, Tensor>>& entries() const noexcept { return entries_; }
  std::vector<std::pair<std::string, Tensor>>& entries() noexcept { return entries_; }

  std::size_t parameter_count() const noexcept;

  friend bool operator==(const ModelWeights&, const ModelWeights&) = default;

 private:
  std::vector<std::pair<std::string, Tensor>> entries_;
};

/// MSRW container:
///   "MSRW", u32-LE version (1), u32-LE tensor count, then per tensor
///   u16-LE name length, UTF-8 name, u8 rank, rank x u32-LE dims,
///   product(dims) float32-LE values. No padding.
std::string encode_weights(const ModelWeights& weights);
/// Parses a complete MSRW image. Throws a format error (and returns nothing)
/// on bad magic/version, truncation, trailing bytes, or duplicate names.
ModelWeights decode_weights(const std::string& bytes, const std::string& origin = "<memory>");

ModelWeights load_weights(const std::filesystem::path& path);
void save_weights(const ModelWeights& weights, const std::filesystem::path& path);

}  // namespace medsr
