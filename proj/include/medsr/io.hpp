#pragma once

#include <filesystem>
#include <string>

#include "medsr/image.hpp"

namespace medsr {

/// Reads binary (P5) or ASCII (P2) PGM with maxval up to 65535; samples are
/// divided by maxval. PPM (P6/P3) is accepted too and reduced to BT.601 luma.
Image load_pgm(const std::filesystem::path& path);

/// Parses PGM/PPM bytes already in memory. `origin` names the source in errors.
Image decode_pnm(const std::string& bytes, const std::string& origin = "<memory>");

/// Binary P5, maxval 255, byte = floor(clamp(v,0,1)*255 + 0.5).
void save_pgm(const Image& img, const std::filesystem::path& path);
std::string encode_pgm(const Image& img);

/// Lossless raw raster: "MSRF", u32-LE width, u32-LE height, then
/// width*height float32-LE samples, row-major.
Image load_msrf(const std::filesystem::path& path);
void save_msrf(const Image& img, const std::filesystem::path& path);

/// Dispatches on extension: .msrf is raw float, anything else is PNM.
Image load_image(const std::filesystem::path& path);
void save_image(const Image& img, const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& bytes);

}  // namespace medsr
