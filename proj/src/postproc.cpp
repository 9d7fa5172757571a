#include "glandseg/postproc.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace glandseg {

std::string_view to_string(StructuringElement e) {
  switch (e) {
    case StructuringElement::Octagon:
      return "octagon";
    case StructuringElement::Disk:
      return "disk";
    case StructuringElement::Diamond:
      return "diamond";
    case StructuringElement::SphereProjection:
      return "sphere";
  }
  return "?";
}

StructuringElement structuring_element_from_string(std::string_view text) {
  if (text == "octagon") return StructuringElement::Octagon;
  if (text == "disk") return StructuringElement::Disk;
  if (text == "diamond") return StructuringElement::Diamond;
  if (text == "sphere") return StructuringElement::SphereProjection;
  throw std::invalid_argument("unknown structuring element '" + std::string(text) + "'");
}

void PostprocParams::validate() const {
  if (!(gaussian_sigma > 0.0)) throw std::invalid_argument("gaussian sigma must be positive");
  if (!(low_threshold > 0.0 && low_threshold < high_threshold && high_threshold <= 1.0)) {
    throw std::invalid_argument("thresholds must satisfy 0 < low < high <= 1");
  }
  if (element_radius < 1) throw std::invalid_argument("element radius must be >= 1");
  if (element == StructuringElement::Octagon && element_radius % 3 != 0) {
    throw std::invalid_argument("octagon radius must be a multiple of 3");
  }
}

std::vector<std::pair<int, int>> structuring_offsets(StructuringElement e, int r) {
  if (r < 1) throw std::invalid_argument("element radius must be >= 1");
  if (e == StructuringElement::Octagon && r % 3 != 0) {
    throw std::invalid_argument("octagon radius must be a multiple of 3");
  }
  std::vector<std::pair<int, int>> out;
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      const int l1 = std::abs(dx) + std::abs(dy);
      bool inside = false;
      switch (e) {
        case StructuringElement::Octagon:
          inside = 3 * l1 <= 4 * r;
          break;
        case StructuringElement::Disk:
        case StructuringElement::SphereProjection:
          inside = dx * dx + dy * dy <= r * r;
          break;
        case StructuringElement::Diamond:
          inside = l1 <= r;
          break;
      }
      if (inside) out.emplace_back(dx, dy);
    }
  }
  return out;
}

namespace {

using Field = Raster<double>;

Field gaussian_blur(const Field& in, double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double norm = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-(i * i) / (2.0 * sigma * sigma));
    norm += k[i + radius];
  }
  for (double& v : k) v /= norm;

  const int w = in.width();
  const int h = in.height();
  Field tmp(w, h);
  Field out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int i = -radius; i <= radius; ++i) s += k[i + radius] * in(std::clamp(x + i, 0, w - 1), y);
      tmp(x, y) = s;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int i = -radius; i <= radius; ++i) s += k[i + radius] * tmp(x, std::clamp(y + i, 0, h - 1));
      out(x, y) = s;
    }
  }
  return out;
}

// Unit step toward the gradient direction, quantized to one of 8 compass
// directions (y grows downward, as in the raster).
std::array<int, 2> gradient_step(double gx, double gy) {
  static constexpr std::array<std::array<int, 2>, 8> kSteps = {
      {{1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1}}};
  const double a = std::atan2(gy, gx);
  int k = static_cast<int>(std::lround(a / (std::numbers::pi / 4.0)));
  k = ((k % 8) + 8) % 8;
  return kSteps[static_cast<std::size_t>(k)];
}

}  // namespace

BinaryMask canny_edges(const BinaryMask& mask, const PostprocParams& params) {
  params.validate();
  const int w = mask.width();
  const int h = mask.height();
  BinaryMask edges(w, h, 0);
  if (mask.empty()) return edges;

  Field img(w, h);
  for (std::size_t i = 0; i < mask.size(); ++i) img.data()[i] = mask.data()[i] != 0 ? 255.0 : 0.0;
  const Field s = gaussian_blur(img, params.gaussian_sigma);

  Field gx(w, h), gy(w, h), mag(w, h);
  auto at = [&](int x, int y) { return s(std::clamp(x, 0, w - 1), std::clamp(y, 0, h - 1)); };
  double max_mag = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double dx = (at(x + 1, y - 1) + 2.0 * at(x + 1, y) + at(x + 1, y + 1)) -
                        (at(x - 1, y - 1) + 2.0 * at(x - 1, y) + at(x - 1, y + 1));
      const double dy = (at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1)) -
                        (at(x - 1, y - 1) + 2.0 * at(x, y - 1) + at(x + 1, y - 1));
      gx(x, y) = dx;
      gy(x, y) = dy;
      mag(x, y) = std::hypot(dx, dy);
      max_mag = std::max(max_mag, mag(x, y));
    }
  }
  if (max_mag <= 0.0) return edges;

  // Non-maximum suppression. A plateau of two equal maxima across a step keeps
  // only the pixel on the bright side; `tol` absorbs rounding asymmetry.
  const double tol = 1e-9 * max_mag;
  auto mag_at = [&](int x, int y) { return mag(std::clamp(x, 0, w - 1), std::clamp(y, 0, h - 1)); };
  Field thin(w, h, 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double m = mag(x, y);
      if (m <= tol) continue;
      const auto [sx, sy] = gradient_step(gx(x, y), gy(x, y));
      const double ahead = mag_at(x + sx, y + sy);
      const double behind = mag_at(x - sx, y - sy);
      if (m > ahead + tol && m >= behind - tol) thin(x, y) = m;
    }
  }

  const double high = params.high_threshold * max_mag;
  const double low = params.low_threshold * max_mag;
  std::vector<std::pair<int, int>> stack;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (thin(x, y) >= high) {
        edges(x, y) = 1;
        stack.emplace_back(x, y);
      }
    }
  }
  while (!stack.empty()) {
    const auto [x, y] = stack.back();
    stack.pop_back();
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const int nx = x + dx;
        const int ny = y + dy;
        if (nx < 0 || ny < 0 || nx >= w || ny >= h || edges(nx, ny)) continue;
        if (thin(nx, ny) >= low) {
          edges(nx, ny) = 1;
          stack.emplace_back(nx, ny);
        }
      }
    }
  }
  return edges;
}

BinaryMask dilate(const BinaryMask& input, StructuringElement e, int radius) {
  const auto offsets = structuring_offsets(e, radius);
  BinaryMask out(input.width(), input.height(), 0);
  for (int y = 0; y < input.height(); ++y) {
    for (int x = 0; x < input.width(); ++x) {
      if (!input(x, y)) continue;
      for (const auto& [dx, dy] : offsets) {
        const int nx = x + dx;
        const int ny = y + dy;
        if (nx >= 0 && ny >= 0 && nx < input.width() && ny < input.height()) out(nx, ny) = 1;
      }
    }
  }
  return out;
}

BinaryMask postprocess(const BinaryMask& mask, const PostprocParams& params) {
  params.validate();
  const BinaryMask band = dilate(canny_edges(mask, params), params.element, params.element_radius);
  BinaryMask out = mask;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = (mask.data()[i] | band.data()[i]) != 0;
  return out;
}

}  // namespace glandseg
