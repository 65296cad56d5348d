#include "medsr/tensor.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <unordered_set>

#include "medsr/io.hpp"

namespace medsr {

std::string dims_to_string(const std::vector<int>& dims) {
  std::string s = "[";
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(dims[i]);
  }
  return s + "]";
}

void ModelWeights::add(std::string name, Tensor tensor) {
  if (contains(name)) fail(ErrorKind::model, "duplicate weight name '" + name + "'");
  entries_.emplace_back(std::move(name), std::move(tensor));
}

bool ModelWeights::contains(std::string_view name) const noexcept {
  return std::any_of(entries_.begin(), entries_.end(), [&](const auto& e) { return e.first == name; });
}

const Tensor& ModelWeights::at(std::string_view name) const {
  for (const auto& [n, t] : entries_) {
    if (n == name) return t;
  }
  fail(ErrorKind::model, "missing weight '" + std::string(name) + "'");
}

Tensor& ModelWeights::at(std::string_view name) {
  return const_cast<Tensor&>(std::as_const(*this).at(name));
}

const Tensor& ModelWeights::expect(std::string_view name, const std::vector<int>& dims) const {
  const Tensor& t = at(name);
  if (t.dims() != dims) {
    fail(ErrorKind::model, "weight '" + std::string(name) + "' has shape " + dims_to_string(t.dims()) +
                               ", expected " + dims_to_string(dims));
  }
  return t;
}

std::size_t ModelWeights::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.second.size();
  return n;
}

namespace {

constexpr std::uint32_t kWeightsVersion = 1;

template <typename U>
void put_le(std::string& out, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

class ByteReader {
 public:
  ByteReader(const std::string& bytes, const std::string& origin) : bytes_(bytes), origin_(origin) {}

  template <typename U>
  U get() {
    need(sizeof(U));
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      v |= static_cast<U>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(U);
    return v;
  }

  std::string take(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) fail(ErrorKind::format, origin_ + ": truncated weight file");
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  const std::string& bytes_;
  const std::string& origin_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_weights(const ModelWeights& weights) {
  std::string out = "MSRW";
  put_le<std::uint32_t>(out, kWeightsVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(weights.size()));
  for (const auto& [name, tensor] : weights.entries()) {
    if (name.size() > 0xFFFF) fail(ErrorKind::model, "weight name too long: " + name.substr(0, 32));
    if (tensor.rank() > 0xFF) fail(ErrorKind::model, "tensor rank too large for '" + name + "'");
    put_le<std::uint16_t>(out, static_cast<std::uint16_t>(name.size()));
    out += name;
    out.push_back(static_cast<char>(tensor.rank()));
    for (int d : tensor.dims()) put_le<std::uint32_t>(out, static_cast<std::uint32_t>(d));
    for (float v : tensor.data()) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
  }
  return out;
}

ModelWeights decode_weights(const std::string& bytes, const std::string& origin) {
  ByteReader r(bytes, origin);
  if (r.take(4) != "MSRW") fail(ErrorKind::format, origin + ": bad magic, not an MSRW file");
  const auto version = r.get<std::uint32_t>();
  if (version != kWeightsVersion) fail(ErrorKind::format, origin + ": unsupported MSRW version " + std::to_string(version));
  const auto count = r.get<std::uint32_t>();

  ModelWeights weights;
  std::unordered_set<std::string> seen;
  for (std::uint32_t t = 0; t < count; ++t) {
    const auto name_len = r.get<std::uint16_t>();
    std::string name = r.take(name_len);
    const auto rank = r.get<std::uint8_t>();
    if (rank == 0) fail(ErrorKind::format, origin + ": tensor '" + name + "' has rank 0");
    std::vector<int> dims(rank);
    std::size_t n = 1;
    for (auto& d : dims) {
      const auto v = r.get<std::uint32_t>();
      if (v == 0 || v > 0x7FFFFFFF) fail(ErrorKind::format, origin + ": tensor '" + name + "' has an invalid dimension");
      d = static_cast<int>(v);
      n *= v;
      // The payload must fit in what is left, which also bounds the allocation.
      if (n > r.remaining() / 4) fail(ErrorKind::format, origin + ": truncated weight file");
    }
    r.need(n * 4);
    std::vector<float> data(n);
    for (auto& v : data) v = std::bit_cast<float>(r.get<std::uint32_t>());
    if (!seen.insert(name).second) fail(ErrorKind::format, origin + ": duplicate tensor name '" + name + "'");
    weights.add(std::move(name), Tensor(std::move(dims), std::move(data)));
  }
  if (r.remaining() != 0) fail(ErrorKind::format, origin + ": trailing bytes after last tensor");
  return weights;
}

ModelWeights load_weights(const std::filesystem::path& path) { return decode_weights(read_file(path), path.string()); }

void save_weights(const ModelWeights& weights, const std::filesystem::path& path) {
  write_file(path, encode_weights(weights));
}

}  // namespace medsr
