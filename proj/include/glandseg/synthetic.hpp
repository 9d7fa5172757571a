#pragma once

#include <cstdint>
#include <filesystem>

#include "glandseg/pipeline.hpp"

namespace glandseg::synthetic {

/// Bright smooth elliptical "glands" (3 to 6, intensity about 200 +/- 10) on a
/// darker checkerboard-modulated background (about 90 +/- 30). Deterministic in `seed`.
TrainingPair generate(std::uint64_t seed, int width = 256, int height = 256);

/// Writes `count` generated images per split into `dir` using the GlaS naming
/// scheme (`<split>_<n>.bmp`, `<split>_<n>_anno.bmp`) plus a Grade.csv.
void write_dataset(const std::filesystem::path& dir, const std::string& split, int count, std::uint64_t seed,
                   int width = 256, int height = 256);

}  // namespace glandseg::synthetic
