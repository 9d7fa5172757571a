#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string_view>
#include <utility>
#include <vector>

namespace glandseg {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Row-major raster with a single value type per pixel.
///
/// `ImageRGB`, `BinaryMask` and `LabelImage` are instantiations; the
/// geometry helpers (padding, cropping) are written once against this.
template <typename T>
class Raster {
 public:
  using value_type = T;

  Raster() = default;
  Raster(int width, int height, T fill = T{})
      : width_(width), height_(height) {
    if (width < 0 || height < 0) {
      throw std::invalid_argument("negative raster dimensions");
    }
    data_.assign(static_cast<std::size_t>(width) * height, fill);
  }
  Raster(int width, int height, std::vector<T> data)
      : width_(width), height_(height), data_(std::move(data)) {
    if (width < 0 || height < 0 ||
        data_.size() != static_cast<std::size_t>(width) * height) {
      throw std::invalid_argument("raster data length does not match dimensions");
    }
  }

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return data_.empty(); }
  std::size_t size() const { return data_.size(); }

  T& operator()(int x, int y) { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const { return data_[index(x, y)]; }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using ImageRGB = Raster<Rgb>;
/// Values are 0 (non-gland, black) or 1 (gland, white).
using BinaryMask = Raster<std::uint8_t>;
/// Integer-labeled annotation as stored on disk (gland instance ids, 0 = background).
using LabelImage = Raster<std::uint32_t>;
using GrayImage = Raster<std::uint8_t>;

/// Enumerator order is the forest's vote tie-break order.
enum class Label : std::uint8_t { Gland = 0, Mix = 1, NonGland = 2 };

inline constexpr int kLabelCount = 3;

std::string_view to_string(Label label);
Label label_from_string(std::string_view text);

/// Square window located in a (padded) raster.
struct PatchRef {
  int x0 = 0;
  int y0 = 0;
  int w = 0;

  friend bool operator==(const PatchRef&, const PatchRef&) = default;
};

BinaryMask binarize_ground_truth(const LabelImage& annotation);

/// Smallest multiple of `w` that is >= `n`.
int padded_extent(int n, int w);

/// Replicate-pads on the right and bottom up to multiples of `w`.
template <typename T>
Raster<T> pad_replicate(const Raster<T>& img, int w) {
  if (w < 1) throw std::invalid_argument("window size must be >= 1");
  if (img.empty()) throw std::invalid_argument("empty input");
  const int pw = padded_extent(img.width(), w);
  const int ph = padded_extent(img.height(), w);
  if (pw == img.width() && ph == img.height()) return img;
  Raster<T> out(pw, ph);
  for (int y = 0; y < ph; ++y) {
    const int sy = y < img.height() ? y : img.height() - 1;
    for (int x = 0; x < pw; ++x) {
      const int sx = x < img.width() ? x : img.width() - 1;
      out(x, y) = img(sx, sy);
    }
  }
  return out;
}

template <typename T>
Raster<T> crop(const Raster<T>& img, int x0, int y0, int width, int height) {
  if (x0 < 0 || y0 < 0 || width < 0 || height < 0 || x0 + width > img.width() ||
      y0 + height > img.height()) {
    throw std::out_of_range("crop rectangle outside raster");
  }
  Raster<T> out(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) out(x, y) = img(x0 + x, y0 + y);
  }
  return out;
}

/// Non-overlapping row-major tiling; dimensions must be multiples of `w`.
std::vector<PatchRef> patch_grid(int width, int height, int w);

/// Per-axis child offsets inside a parent window of side `parent`.
/// When `child` does not divide `parent`, a final tile is placed flush with
/// the far edge and overlaps its predecessor.
std::vector<int> sub_patch_offsets(int parent, int child);

/// Cartesian product of `sub_patch_offsets` placed inside `parent`, row-major.
std::vector<PatchRef> sub_patches(const PatchRef& parent, int child);

/// Gland if every pixel is white, NonGland if every pixel is black, else Mix.
Label patch_label(const BinaryMask& mask, const PatchRef& region);
Label patch_label(const BinaryMask& mask);

/// Gland when white pixels strictly outnumber black ones, NonGland otherwise.
Label majority_label(const BinaryMask& mask, const PatchRef& region);
Label majority_label(const BinaryMask& mask);

}  // namespace glandseg
