#pragma once

#include <array>

#include "glandseg/imaging.hpp"

namespace glandseg {

/// Decorrelated log-chromatic coordinates (l, alpha, beta).
struct Lab {
  double l = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
};

using LabImage = Raster<Lab>;

/// Per-channel mean and population standard deviation in lab space.
struct ChannelStats {
  std::array<double, 3> mean{};
  std::array<double, 3> std{};

  friend bool operator==(const ChannelStats&, const ChannelStats&) = default;
};

inline constexpr double kStdFloor = 1e-6;

Lab rgb_to_lab(Rgb p);
Rgb lab_to_rgb(const Lab& p);

LabImage rgb_to_lab(const ImageRGB& img);
ImageRGB lab_to_rgb(const LabImage& lab);

/// Standard deviations are clamped below at `kStdFloor`.
ChannelStats channel_stats(const LabImage& lab);
inline ChannelStats channel_stats(const ImageRGB& img) { return channel_stats(rgb_to_lab(img)); }

/// Matches each lab channel's mean and spread to `target`, staying in lab space.
LabImage match_stats(const LabImage& src, const ChannelStats& target);

/// Reinhard color transfer of `src` onto `target` statistics.
ImageRGB reinhard_normalize(const ImageRGB& src, const ChannelStats& target);

}  // namespace glandseg
