#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "medsr/image.hpp"

namespace medsr {

/// Domains of the procedural phantom corpus: brain, chest, renal, nephro,
/// spine.
const std::vector<std::string_view>& synth_domains();

/// One size x size phantom in [0,1] for `domain`. Smooth anatomy-like shapes
/// plus domain texture (speckle for renal, bright calculi for nephro, ...).
/// Deterministic in (domain, size, seed).
Image synth_image(std::string_view domain, int size, std::uint64_t seed);

/// Writes dir/<domain>/<domain>_NN.pgm for every domain. Returns the number
/// of files written.
std::size_t write_synth_corpus(const std::filesystem::path& dir, int images_per_domain, int size, std::uint64_t seed);

}  // namespace medsr
