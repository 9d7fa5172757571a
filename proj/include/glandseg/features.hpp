#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "glandseg/imaging.hpp"

namespace glandseg {

/// Window geometry and binning used at one level of the cascade.
struct LevelConfig {
  int window = 21;      ///< patch side in pixels
  int filter = 7;       ///< mean/std filter side (odd)
  int bins1d = 32;      ///< intensity histogram bins per channel
  int bins2d = 8;       ///< bins per axis of the mean/std histogram
  int glcm_levels = 8;  ///< gray levels of the co-occurrence matrix

  void validate() const;
  /// 3*bins1d + 3*bins2d^2 + 3*14.
  int feature_dim() const;

  friend bool operator==(const LevelConfig&, const LevelConfig&) = default;
};

inline constexpr int kHaralickCount = 14;

using FeatureVector = std::vector<double>;
using RealImage = Raster<double>;

/// One color channel of `img` restricted to `patch`.
GrayImage extract_channel(const ImageRGB& img, const PatchRef& patch, int channel);

/// Bin index floor(v * bins / 256).
std::vector<std::uint32_t> channel_histogram(const GrayImage& patch, int bins);

/// Box mean over an m x m window with replicate padding at the patch border.
RealImage mean_filter(const GrayImage& patch, int m);
/// Population standard deviation over an m x m replicate-padded window.
RealImage std_filter(const GrayImage& patch, int m);

/// Joint histogram of (mean, std) pixel pairs, flattened mean-major.
/// The mean axis spans [0, 256), the std axis [0, 128]; overflow goes to the top bin.
std::vector<std::uint32_t> hist2d(const RealImage& mean, const RealImage& std, int bins);

enum class Direction { Deg0, Deg45, Deg90, Deg135 };
inline constexpr std::array<Direction, 4> kAllDirections = {Direction::Deg0, Direction::Deg45,
                                                            Direction::Deg90, Direction::Deg135};

/// Pixel offset (dx, dy) of the neighbour for a direction; y grows downward.
std::array<int, 2> direction_offset(Direction d);

/// Symmetric, normalized gray-level co-occurrence matrix at distance 1.
struct Glcm {
  int levels = 0;
  bool valid = false;  ///< false when the patch has no pixel pair along the direction
  std::vector<double> p;

  double operator()(int i, int j) const { return p[static_cast<std::size_t>(i) * levels + j]; }
};

Glcm glcm(const GrayImage& patch, int levels, Direction direction);

/// The 14 Haralick statistics of a single valid matrix, in the classical order.
std::array<double, kHaralickCount> haralick_features(const Glcm& m);

/// Haralick statistics averaged over the valid matrices. Throws on none.
std::array<double, kHaralickCount> haralick14(std::span<const Glcm> matrices);

/// Feature vector of the `cfg.window`-sided patch at `patch`:
/// [Fr | Fg | Fb | Hist2D R | Hist2D G | Hist2D B | Haralick R | Haralick G | Haralick B].
FeatureVector assemble_features(const ImageRGB& img, const PatchRef& patch, const LevelConfig& cfg);
FeatureVector assemble_features(const ImageRGB& patch, const LevelConfig& cfg);

}  // namespace glandseg
