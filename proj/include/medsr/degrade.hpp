#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "medsr/image.hpp"
#include "medsr/prng.hpp"

namespace medsr {

enum class DegradationProfile { classical, high_order };

DegradationProfile parse_profile(std::string_view name);
std::string_view to_string(DegradationProfile profile) noexcept;

/// How an HR image becomes its LR partner.
///
/// `classical` applies the fixed parameters below around an antialiased
/// bicubic downsample (with the defaults it is the plain downsample).
/// `high_order` ignores them and draws two rounds of parameters from `seed`.
struct DegradationSpec {
  DegradationProfile profile = DegradationProfile::classical;
  int scale = 2;
  double blur_sigma = 0.0;
  double noise_sigma = 0.0;  // on the 0-255 scale
  std::optional<int> compression_quality;
  std::uint64_t seed = 0;

  /// Throws a configuration error if a field is out of range.
  void validate() const;
};

/// Separable Gaussian, radius ceil(3*sigma), taps renormalized to sum 1,
/// reflect borders. sigma == 0 returns the input.
Image gaussian_blur(const Image& img, double sigma);

/// The normalized 1D taps gaussian_blur uses, length 2*ceil(3*sigma)+1.
std::vector<double> gaussian_taps(double sigma);

/// out = clamp(img + n/255, 0, 1) with n ~ N(0, sigma255^2), one draw per
/// pixel in row-major order.
Image add_gaussian_noise(const Image& img, double sigma255, Prng& rng);

/// JPEG-style luminance quantization: 8x8 orthonormal DCT-II on the level
/// shifted 0-255 signal, quantize with the standard luminance table scaled by
/// the IJG quality law, dequantize, inverse DCT, clamp. Partial edge blocks
/// are padded by replicating the last row/column.
Image dct_compress(const Image& img, int quality);

/// The IJG-scaled quantization table (row-major 8x8) for `quality`.
std::array<int, 64> quantization_table(int quality);

/// Largest central crop whose dimensions are multiples of `scale`.
Image crop_to_multiple(const Image& img, int scale);

/// HR -> LR per the degradation settings. The input is first center-cropped to a multiple of
/// the scale; the output is exactly (cropped size) / scale.
Image degrade(const Image& img, const DegradationSpec& spec);

/// Seed used for a corpus file: spec seed XOR FNV-1a(filename).
std::uint64_t per_image_seed(std::uint64_t seed, std::string_view filename) noexcept;

/// Writes out_dir/hr/NAME.pgm (cropped HR) and out_dir/lr/NAME.pgm for each
/// PNM file in corpus_dir, plus out_dir/manifest.json. Files are processed in
/// name order. Returns the number of pairs.
std::size_t make_pairs(const std::filesystem::path& corpus_dir, const DegradationSpec& spec,
                       const std::filesystem::path& out_dir, int threads = 1);

/// Sorted list of PNM files (.pgm/.ppm/.pnm) directly inside `dir`.
std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir);

}  // namespace medsr
