#pragma once

#include <filesystem>

#include "glandseg/imaging.hpp"

namespace glandseg::io {

/// Reads a BMP (8-bit palettized, 24-bit, 32-bit) or PNG raster as RGB.
/// Gray and palettized sources are expanded.
ImageRGB read_rgb(const std::filesystem::path& path);

/// Reads an annotation raster as integer labels. Palettized files yield the
/// palette index, gray files the gray value (8 or 16 bit), and color files
/// the packed 0xRRGGBB value, so zero always means background.
LabelImage read_labels(const std::filesystem::path& path);

/// Width and height without decoding pixel data.
std::pair<int, int> read_dimensions(const std::filesystem::path& path);

/// Single-channel 8-bit PNG with values 0 or 255.
void write_mask_png(const std::filesystem::path& path, const BinaryMask& mask);
void write_rgb_png(const std::filesystem::path& path, const ImageRGB& img);

/// Uncompressed 24-bit BMP.
void write_rgb_bmp(const std::filesystem::path& path, const ImageRGB& img);
/// 8-bit palettized BMP with a gray palette; each pixel stores its label
/// (labels must be < 256).
void write_label_bmp(const std::filesystem::path& path, const LabelImage& labels);

}  // namespace glandseg::io
