#pragma once

#include <string_view>

#include "glandseg/imaging.hpp"

namespace glandseg {

enum class StructuringElement { Octagon, Disk, Diamond, SphereProjection };

std::string_view to_string(StructuringElement e);
StructuringElement structuring_element_from_string(std::string_view text);

struct PostprocParams {
  double gaussian_sigma = 1.4;
  double low_threshold = 0.1;   ///< fraction of the maximum gradient magnitude
  double high_threshold = 0.3;  ///< fraction of the maximum gradient magnitude
  StructuringElement element = StructuringElement::Octagon;
  int element_radius = 3;

  void validate() const;
};

/// Offsets (dx, dy) covered by a structuring element centered on the origin.
/// Octagon: |dx|,|dy| <= r and |dx|+|dy| <= 4r/3 (r a multiple of 3).
/// Disk: dx^2+dy^2 <= r^2. Diamond: |dx|+|dy| <= r. The sphere element is
/// the planar footprint of a ball, i.e. the disk.
std::vector<std::pair<int, int>> structuring_offsets(StructuringElement e, int radius);

/// Canny detector on the mask rendered as a 0/255 image.
BinaryMask canny_edges(const BinaryMask& mask, const PostprocParams& params);

BinaryMask dilate(const BinaryMask& input, StructuringElement e, int radius);

/// mask OR dilate(canny_edges(mask)).
BinaryMask postprocess(const BinaryMask& mask, const PostprocParams& params);

}  // namespace glandseg
