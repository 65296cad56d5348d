#include "medsr/io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "medsr/error.hpp"

namespace medsr {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) fail(ErrorKind::io, "read failed for " + path.string());
  return std::move(ss).str();
}

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::io, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::io, "write failed for " + path.string());
}

namespace {

class PnmReader {
 public:
  PnmReader(const std::string& bytes, const std::string& origin) : bytes_(bytes), origin_(origin) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  long header_int(const char* field) {
    skip_space_and_comments();
    return parse_uint(field, ErrorKind::format);
  }

  long ascii_sample() {
    skip_space_and_comments();
    if (pos_ >= bytes_.size()) fail(ErrorKind::io, origin_ + ": truncated ASCII payload");
    return parse_uint("sample", ErrorKind::format);
  }

  std::size_t pos() const { return pos_; }
  void advance(std::size_t n) { pos_ += n; }
  const std::string& bytes() const { return bytes_; }
  const std::string& origin() const { return origin_; }

 private:
  long parse_uint(const char* field, ErrorKind kind) {
    long value = 0;
    std::size_t digits = 0;
    while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > 1'000'000'000L) fail(kind, origin_ + ": " + field + " out of range");
      ++pos_;
      ++digits;
    }
    if (digits == 0) fail(kind, origin_ + ": malformed header, expected " + field);
    return value;
  }

  const std::string& bytes_;
  std::string origin_;
  std::size_t pos_ = 0;
};

}  // namespace

Image decode_pnm(const std::string& bytes, const std::string& origin) {
  if (bytes.size() < 2 || bytes[0] != 'P') fail(ErrorKind::format, origin + ": missing PNM magic");
  const char kind = bytes[1];
  const bool binary = kind == '5' || kind == '6';
  const bool color = kind == '3' || kind == '6';
  if (kind != '2' && kind != '3' && kind != '5' && kind != '6') {
    fail(ErrorKind::format, origin + ": unsupported magic P" + std::string(1, kind));
  }

  PnmReader reader(bytes, origin);
  reader.advance(2);
  const long width = reader.header_int("width");
  const long height = reader.header_int("height");
  const long maxval = reader.header_int("maxval");
  if (width < 1 || height < 1) fail(ErrorKind::format, origin + ": non-positive dimensions");
  if (maxval < 1 || maxval > 65535) fail(ErrorKind::format, origin + ": maxval must be in 1..65535");
  if (width * height > (1L << 28)) fail(ErrorKind::format, origin + ": image too large");

  const int channels = color ? 3 : 1;
  const std::size_t count = static_cast<std::size_t>(width) * height * channels;
  std::vector<double> samples(count);
  if (binary) {
    // Exactly one whitespace byte separates the header from the payload.
    if (reader.pos() >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[reader.pos()]))) {
      fail(ErrorKind::format, origin + ": malformed header terminator");
    }
    reader.advance(1);
    const std::size_t bps = maxval > 255 ? 2 : 1;
    if (bytes.size() - reader.pos() < count * bps) fail(ErrorKind::io, origin + ": truncated payload");
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + reader.pos());
    for (std::size_t i = 0; i < count; ++i) {
      const unsigned v = bps == 2 ? (static_cast<unsigned>(p[2 * i]) << 8) | p[2 * i + 1] : p[i];
      if (v > static_cast<unsigned>(maxval)) fail(ErrorKind::format, origin + ": sample exceeds maxval");
      samples[i] = v;
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      const long v = reader.ascii_sample();
      if (v > maxval) fail(ErrorKind::format, origin + ": sample exceeds maxval");
      samples[i] = static_cast<double>(v);
    }
  }

  std::vector<float> data(static_cast<std::size_t>(width) * height);
  const double inv = 1.0 / static_cast<double>(maxval);
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (color) {
      const double luma = 0.299 * samples[3 * i] + 0.587 * samples[3 * i + 1] + 0.114 * samples[3 * i + 2];
      data[i] = static_cast<float>(luma * inv);
    } else {
      data[i] = static_cast<float>(samples[i] * inv);
    }
  }
  return Image(static_cast<int>(width), static_cast<int>(height), std::move(data));
}

Image load_pgm(const fs::path& path) { return decode_pnm(read_file(path), path.string()); }

std::string encode_pgm(const Image& img) {
  std::string out = "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
  const std::size_t header = out.size();
  out.resize(header + img.size());
  auto pixels = img.pixels();
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    const double v = std::clamp(static_cast<double>(pixels[i]), 0.0, 1.0);
    out[header + i] = static_cast<char>(static_cast<unsigned char>(std::floor(v * 255.0 + 0.5)));
  }
  return out;
}

void save_pgm(const Image& img, const fs::path& path) { write_file(path, encode_pgm(img)); }

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

void save_msrf(const Image& img, const fs::path& path) {
  std::string out = "MSRF";
  put_u32(out, static_cast<std::uint32_t>(img.width()));
  put_u32(out, static_cast<std::uint32_t>(img.height()));
  out.reserve(out.size() + 4 * img.size());
  for (float v : img.pixels()) put_u32(out, std::bit_cast<std::uint32_t>(v));
  write_file(path, out);
}

Image load_msrf(const fs::path& path) {
  const std::string bytes = read_file(path);
  if (bytes.size() < 12 || bytes.compare(0, 4, "MSRF") != 0) fail(ErrorKind::format, path.string() + ": bad MSRF magic");
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::uint32_t w = get_u32(p + 4);
  const std::uint32_t h = get_u32(p + 8);
  if (w == 0 || h == 0 || w > (1u << 16) || h > (1u << 16)) fail(ErrorKind::format, path.string() + ": bad MSRF dimensions");
  const std::size_t n = static_cast<std::size_t>(w) * h;
  if (bytes.size() != 12 + 4 * n) fail(ErrorKind::io, path.string() + ": MSRF payload size mismatch");
  std::vector<float> data(n);
  for (std::size_t i = 0; i < n; ++i) data[i] = std::bit_cast<float>(get_u32(p + 12 + 4 * i));
  return Image(static_cast<int>(w), static_cast<int>(h), std::move(data));
}

Image load_image(const fs::path& path) {
  return path.extension() == ".msrf" ? load_msrf(path) : load_pgm(path);
}

void save_image(const Image& img, const fs::path& path) {
  if (path.extension() == ".msrf") {
    save_msrf(img, path);
  } else {
    save_pgm(img, path);
  }
}

}  // namespace medsr
