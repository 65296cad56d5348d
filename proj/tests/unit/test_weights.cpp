#include <doctest.h>

#include <bit>
#include <cstring>

#include "medsr/io.hpp"
#include "medsr/prng.hpp"
#include "medsr/tensor.hpp"
#include "test_util.hpp"

using namespace medsr;

namespace {

std::string u32(std::uint32_t v) {
  std::string s(4, '\0');
  for (int i = 0; i < 4; ++i) s[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  return s;
}

ModelWeights fuzz_weights(std::uint64_t seed) {
  Prng rng(seed);
  ModelWeights w;
  const int count = rng.uniform_int(0, 6);
  for (int t = 0; t < count; ++t) {
    const int rank = rng.uniform_int(1, 4);
    std::vector<int> dims;
    for (int r = 0; r < rank; ++r) dims.push_back(rng.uniform_int(1, 5));
    Tensor tensor(dims);
    for (float& v : tensor.data()) {
      // Raw bit patterns, excluding NaN/Inf, exercise every float encoding.
      std::uint32_t bits = static_cast<std::uint32_t>(rng.next());
      if (((bits >> 23) & 0xFF) == 0xFF) bits &= ~(1u << 30);
      v = std::bit_cast<float>(bits);
    }
    std::string name = "t" + std::to_string(t);
    const int extra = rng.uniform_int(0, 20);
    for (int i = 0; i < extra; ++i) name += static_cast<char>('a' + rng.uniform_int(0, 25));
    w.add(name, std::move(tensor));
  }
  return w;
}

}  // namespace

TEST_SUITE("weights") {

TEST_CASE("empty model is 12 bytes") {
  const std::string bytes = encode_weights(ModelWeights{});
  CHECK(bytes == "MSRW" + u32(1) + u32(0));
  CHECK(decode_weights(bytes).empty());
}

TEST_CASE("hand-laid single tensor") {
  ModelWeights w;
  w.add("w1", Tensor({2, 2}, std::vector<float>{1, 2, 3, 4}));
  std::string expected = "MSRW" + u32(1) + u32(1);
  expected += std::string("\x02\x00", 2) + "w1";
  expected += '\x02';
  expected += u32(2) + u32(2);
  for (std::uint32_t f : {0x3F800000u, 0x40000000u, 0x40400000u, 0x40800000u}) expected += u32(f);
  CHECK(encode_weights(w) == expected);
  CHECK(decode_weights(expected) == w);

  TempDir dir;
  save_weights(w, dir.path / "w.msrw");
  CHECK(read_file(dir.path / "w.msrw") == expected);
  CHECK(load_weights(dir.path / "w.msrw") == w);
}

TEST_CASE("fuzzed round trips are bit exact") {
  TempDir dir;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const ModelWeights w = fuzz_weights(seed);
    const std::string bytes = encode_weights(w);
    const ModelWeights back = decode_weights(bytes);
    CHECK(encode_weights(back) == bytes);
    REQUIRE(back.size() == w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
      CHECK(back.entries()[i].first == w.entries()[i].first);
      CHECK(std::memcmp(back.entries()[i].second.ptr(), w.entries()[i].second.ptr(), 4 * w.entries()[i].second.size()) ==
            0);
    }
  }
}

TEST_CASE("corrupt files are rejected") {
  ModelWeights w;
  w.add("a", Tensor({3}, std::vector<float>{1, 2, 3}));
  w.add("b", Tensor({1, 2}, std::vector<float>{4, 5}));
  const std::string good = encode_weights(w);

  std::string magic = good;
  magic[0] = 'X';
  CHECK(error_kind([&] { decode_weights(magic); }) == ErrorKind::format);
  std::string version = good;
  version[4] = 2;
  CHECK(error_kind([&] { decode_weights(version); }) == ErrorKind::format);
  for (std::size_t cut = 0; cut < good.size(); ++cut) {
    CHECK(error_kind([&] { decode_weights(good.substr(0, cut)); }) == ErrorKind::format);
  }
  CHECK(error_kind([&] { decode_weights(good + "x"); }) == ErrorKind::format);

  ModelWeights dup_src;
  dup_src.add("a", Tensor({1}));
  dup_src.add("c", Tensor({1}));
  std::string dup = encode_weights(dup_src);
  dup[dup.find('c')] = 'a';
  CHECK(error_kind([&] { decode_weights(dup); }) == ErrorKind::format);

  TempDir dir;
  write_file(dir.path / "bad.msrw", magic);
  CHECK(error_kind([&] { load_weights(dir.path / "bad.msrw"); }) == ErrorKind::format);
  CHECK(error_kind([&] { load_weights(dir.path / "missing.msrw"); }) == ErrorKind::io);
}

TEST_CASE("model weights container") {
  ModelWeights w;
  w.add("x", Tensor({2, 3}));
  CHECK(error_kind([&] { w.add("x", Tensor({1})); }) == ErrorKind::model);
  CHECK(error_kind([&] { w.at("y"); }) == ErrorKind::model);
  CHECK(error_kind([&] { w.expect("x", {3, 2}); }) == ErrorKind::model);
  CHECK(w.expect("x", {2, 3}).size() == 6);
  CHECK(w.parameter_count() == 6);
  CHECK(error_kind([] { Tensor({2, 0}); }) == ErrorKind::shape);
  CHECK(error_kind([] { Tensor({2}, std::vector<float>{1}); }) == ErrorKind::shape);
}

}  // TEST_SUITE
