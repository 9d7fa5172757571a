#include "glandseg/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>
#include <stdexcept>
#include <string>

namespace glandseg::io {

namespace {

std::runtime_error file_error(const std::filesystem::path& path, const std::string& what) {
  return std::runtime_error(path.string() + ": " + what);
}

std::vector<std::uint8_t> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw file_error(path, "cannot open file");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool is_png(const std::vector<std::uint8_t>& bytes) {
  static constexpr std::array<std::uint8_t, 8> sig = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
  return bytes.size() >= sig.size() && std::equal(sig.begin(), sig.end(), bytes.begin());
}

bool is_bmp(const std::vector<std::uint8_t>& bytes) {
  return bytes.size() >= 2 && bytes[0] == 'B' && bytes[1] == 'M';
}

// ---------------------------------------------------------------------------
// BMP

std::uint32_t le32(const std::vector<std::uint8_t>& b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | static_cast<std::uint32_t>(b[at + 1]) << 8 |
         static_cast<std::uint32_t>(b[at + 2]) << 16 | static_cast<std::uint32_t>(b[at + 3]) << 24;
}
std::uint16_t le16(const std::vector<std::uint8_t>& b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | b[at + 1] << 8);
}

// Decoded BMP: either palette indices (bpp 8) or packed RGB values.
struct BmpPixels {
  int width = 0;
  int height = 0;
  int bpp = 0;
  std::vector<Rgb> palette;
  std::vector<std::uint32_t> values;  // index (8 bpp) or 0xRRGGBB
};

BmpPixels decode_bmp(const std::vector<std::uint8_t>& b, const std::filesystem::path& path) {
  if (b.size() < 54) throw file_error(path, "truncated BMP header");
  const std::uint32_t data_offset = le32(b, 10);
  const std::uint32_t dib_size = le32(b, 14);
  if (dib_size < 40) throw file_error(path, "unsupported BMP header (core headers not supported)");
  const auto width = static_cast<std::int32_t>(le32(b, 18));
  const auto raw_height = static_cast<std::int32_t>(le32(b, 22));
  const int bpp = le16(b, 28);
  const std::uint32_t compression = le32(b, 30);
  std::uint32_t colors_used = le32(b, 46);

  if (width <= 0 || raw_height == 0) throw file_error(path, "invalid BMP dimensions");
  if (bpp != 8 && bpp != 24 && bpp != 32) {
    throw file_error(path, "unsupported BMP bit depth " + std::to_string(bpp));
  }
  if (compression != 0 && !(compression == 3 && bpp == 32)) {
    throw file_error(path, "compressed BMP not supported");
  }

  BmpPixels px;
  px.width = width;
  const bool bottom_up = raw_height > 0;
  px.height = bottom_up ? raw_height : -raw_height;
  px.bpp = bpp;

  if (bpp == 8) {
    if (colors_used == 0) colors_used = 256;
    const std::size_t pal_at = 14 + dib_size;
    if (pal_at + 4 * colors_used > b.size()) throw file_error(path, "truncated BMP palette");
    px.palette.resize(colors_used);
    for (std::uint32_t i = 0; i < colors_used; ++i) {
      const std::size_t at = pal_at + 4 * i;
      px.palette[i] = {b[at + 2], b[at + 1], b[at]};
    }
  }

  const std::size_t stride = (static_cast<std::size_t>(width) * bpp / 8 + 3) & ~std::size_t{3};
  if (data_offset + stride * px.height > b.size()) throw file_error(path, "truncated BMP pixel data");

  px.values.resize(static_cast<std::size_t>(width) * px.height);
  const int step = bpp / 8;
  for (int y = 0; y < px.height; ++y) {
    const int src_row = bottom_up ? px.height - 1 - y : y;
    const std::size_t row_at = data_offset + stride * src_row;
    for (int x = 0; x < width; ++x) {
      const std::size_t at = row_at + static_cast<std::size_t>(x) * step;
      std::uint32_t v = 0;
      if (bpp == 8) {
        v = b[at];
        if (v >= px.palette.size()) throw file_error(path, "BMP palette index out of range");
      } else {
        v = static_cast<std::uint32_t>(b[at + 2]) << 16 | static_cast<std::uint32_t>(b[at + 1]) << 8 | b[at];
      }
      px.values[static_cast<std::size_t>(y) * width + x] = v;
    }
  }
  return px;
}

Rgb unpack(std::uint32_t v) {
  return {static_cast<std::uint8_t>(v >> 16), static_cast<std::uint8_t>(v >> 8),
          static_cast<std::uint8_t>(v)};
}

// ---------------------------------------------------------------------------
// PNG

struct PngReadState {
  const std::vector<std::uint8_t>* bytes = nullptr;
  std::size_t pos = 0;
};

void png_read_from_memory(png_structp png, png_bytep out, png_size_t n) {
  auto* st = static_cast<PngReadState*>(png_get_io_ptr(png));
  if (st->pos + n > st->bytes->size()) png_error(png, "unexpected end of PNG data");
  std::memcpy(out, st->bytes->data() + st->pos, n);
  st->pos += n;
}

enum class PngTarget { Rgb, Labels };

struct PngDecoded {
  int width = 0;
  int height = 0;
  int channels = 0;
  int bytes_per_sample = 1;
  bool palette_indices = false;
  std::vector<std::uint8_t> pixels;
};

// All C++ objects touched after setjmp live in `out` and `state`, which are
// owned by the caller, so a longjmp never skips a destructor.
bool decode_png_raw(png_structp png, png_infop info, PngReadState& state, PngTarget target,
                    PngDecoded& out) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_set_read_fn(png, &state, png_read_from_memory);
  png_read_info(png, info);

  const png_byte color = png_get_color_type(png, info);
  const png_byte depth = png_get_bit_depth(png, info);

  if (target == PngTarget::Rgb) {
    png_set_expand(png);
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_set_gray_to_rgb(png);
  } else if (color == PNG_COLOR_TYPE_PALETTE) {
    png_set_packing(png);
    out.palette_indices = true;
  } else {
    if (depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    if (color & PNG_COLOR_MASK_COLOR) png_set_strip_16(png);
  }
  png_read_update_info(png, info);

  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  out.channels = png_get_channels(png, info);
  out.bytes_per_sample = png_get_bit_depth(png, info) == 16 ? 2 : 1;
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  out.pixels.resize(rowbytes * out.height);
  for (int y = 0; y < out.height; ++y) {
    png_read_row(png, out.pixels.data() + rowbytes * y, nullptr);
  }
  png_read_end(png, nullptr);
  return true;
}

PngDecoded decode_png(const std::vector<std::uint8_t>& bytes, const std::filesystem::path& path,
                      PngTarget target) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (png == nullptr) throw file_error(path, "libpng initialisation failed");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw file_error(path, "libpng initialisation failed");
  }
  PngReadState state{&bytes, 0};
  PngDecoded out;
  const bool ok = decode_png_raw(png, info, state, target, out);
  png_destroy_read_struct(&png, &info, nullptr);
  if (!ok) throw file_error(path, "corrupt or truncated PNG");
  return out;
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f != nullptr) std::fclose(f);
  }
};

bool encode_png_raw(png_structp png, png_infop info, std::FILE* f, int width, int height,
                    int color_type, const std::vector<std::uint8_t>& pixels, int channels) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_init_io(png, f);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
               color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t rowbytes = static_cast<std::size_t>(width) * channels;
  for (int y = 0; y < height; ++y) {
    png_write_row(png, const_cast<png_bytep>(pixels.data() + rowbytes * y));
  }
  png_write_end(png, nullptr);
  return true;
}

void encode_png(const std::filesystem::path& path, int width, int height, int color_type,
                const std::vector<std::uint8_t>& pixels, int channels) {
  std::unique_ptr<std::FILE, FileCloser> f(std::fopen(path.string().c_str(), "wb"));
  if (!f) throw file_error(path, "cannot open for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (png == nullptr) throw file_error(path, "libpng initialisation failed");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    throw file_error(path, "libpng initialisation failed");
  }
  const bool ok = encode_png_raw(png, info, f.get(), width, height, color_type, pixels, channels);
  png_destroy_write_struct(&png, &info);
  if (!ok) throw file_error(path, "PNG encoding failed");
}

void put_le32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void put_le16(std::vector<std::uint8_t>& b, std::uint16_t v) {
  b.push_back(static_cast<std::uint8_t>(v));
  b.push_back(static_cast<std::uint8_t>(v >> 8));
}

std::vector<std::uint8_t> bmp_header(int width, int height, int bpp, std::uint32_t palette_entries) {
  const std::size_t stride = (static_cast<std::size_t>(width) * bpp / 8 + 3) & ~std::size_t{3};
  const std::uint32_t data_offset = 14 + 40 + 4 * palette_entries;
  const auto image_size = static_cast<std::uint32_t>(stride * height);
  std::vector<std::uint8_t> b;
  b.push_back('B');
  b.push_back('M');
  put_le32(b, data_offset + image_size);
  put_le32(b, 0);
  put_le32(b, data_offset);
  put_le32(b, 40);
  put_le32(b, static_cast<std::uint32_t>(width));
  put_le32(b, static_cast<std::uint32_t>(height));
  put_le16(b, 1);
  put_le16(b, static_cast<std::uint16_t>(bpp));
  put_le32(b, 0);
  put_le32(b, image_size);
  put_le32(b, 2835);
  put_le32(b, 2835);
  put_le32(b, palette_entries);
  put_le32(b, 0);
  return b;
}

void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& b) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw file_error(path, "cannot open for writing");
  out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
  if (!out) throw file_error(path, "write failed");
}

}  // namespace

ImageRGB read_rgb(const std::filesystem::path& path) {
  const auto bytes = slurp(path);
  if (is_bmp(bytes)) {
    const BmpPixels px = decode_bmp(bytes, path);
    ImageRGB img(px.width, px.height);
    for (std::size_t i = 0; i < px.values.size(); ++i) {
      img.data()[i] = px.bpp == 8 ? px.palette[px.values[i]] : unpack(px.values[i]);
    }
    return img;
  }
  if (is_png(bytes)) {
    const PngDecoded d = decode_png(bytes, path, PngTarget::Rgb);
    ImageRGB img(d.width, d.height);
    for (std::size_t i = 0; i < img.size(); ++i) {
      img.data()[i] = {d.pixels[3 * i], d.pixels[3 * i + 1], d.pixels[3 * i + 2]};
    }
    return img;
  }
  throw file_error(path, "unrecognised image format (expected BMP or PNG)");
}

LabelImage read_labels(const std::filesystem::path& path) {
  const auto bytes = slurp(path);
  if (is_bmp(bytes)) {
    BmpPixels px = decode_bmp(bytes, path);
    return LabelImage(px.width, px.height, std::move(px.values));
  }
  if (is_png(bytes)) {
    const PngDecoded d = decode_png(bytes, path, PngTarget::Labels);
    LabelImage labels(d.width, d.height);
    const std::size_t sample = static_cast<std::size_t>(d.bytes_per_sample);
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const std::uint8_t* p = d.pixels.data() + i * d.channels * sample;
      std::uint32_t v = 0;
      if (d.channels >= 3) {
        v = static_cast<std::uint32_t>(p[0]) << 16 | static_cast<std::uint32_t>(p[1]) << 8 | p[2];
      } else if (sample == 2) {
        v = static_cast<std::uint32_t>(p[0]) << 8 | p[1];
      } else {
        v = p[0];
      }
      labels.data()[i] = v;
    }
    return labels;
  }
  throw file_error(path, "unrecognised image format (expected BMP or PNG)");
}

std::pair<int, int> read_dimensions(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw file_error(path, "cannot open file");
  std::vector<std::uint8_t> head(32);
  in.read(reinterpret_cast<char*>(head.data()), static_cast<std::streamsize>(head.size()));
  head.resize(static_cast<std::size_t>(in.gcount()));
  if (is_bmp(head) && head.size() >= 26) {
    const auto h = static_cast<std::int32_t>(le32(head, 22));
    return {static_cast<int>(le32(head, 18)), h < 0 ? -h : h};
  }
  if (is_png(head) && head.size() >= 24) {
    auto be32 = [&](std::size_t at) {
      return static_cast<int>(static_cast<std::uint32_t>(head[at]) << 24 | head[at + 1] << 16 |
                              head[at + 2] << 8 | head[at + 3]);
    };
    return {be32(16), be32(20)};
  }
  throw file_error(path, "unrecognised image format (expected BMP or PNG)");
}

void write_mask_png(const std::filesystem::path& path, const BinaryMask& mask) {
  std::vector<std::uint8_t> px(mask.size());
  for (std::size_t i = 0; i < px.size(); ++i) px[i] = mask.data()[i] != 0 ? 255 : 0;
  encode_png(path, mask.width(), mask.height(), PNG_COLOR_TYPE_GRAY, px, 1);
}

void write_rgb_png(const std::filesystem::path& path, const ImageRGB& img) {
  std::vector<std::uint8_t> px;
  px.reserve(img.size() * 3);
  for (const Rgb& p : img.data()) {
    px.push_back(p.r);
    px.push_back(p.g);
    px.push_back(p.b);
  }
  encode_png(path, img.width(), img.height(), PNG_COLOR_TYPE_RGB, px, 3);
}

void write_rgb_bmp(const std::filesystem::path& path, const ImageRGB& img) {
  auto b = bmp_header(img.width(), img.height(), 24, 0);
  const std::size_t pad = (4 - (static_cast<std::size_t>(img.width()) * 3) % 4) % 4;
  for (int y = img.height() - 1; y >= 0; --y) {
    for (int x = 0; x < img.width(); ++x) {
      const Rgb& p = img(x, y);
      b.push_back(p.b);
      b.push_back(p.g);
      b.push_back(p.r);
    }
    b.insert(b.end(), pad, 0);
  }
  write_bytes(path, b);
}

void write_label_bmp(const std::filesystem::path& path, const LabelImage& labels) {
  auto b = bmp_header(labels.width(), labels.height(), 8, 256);
  for (int i = 0; i < 256; ++i) {
    const auto v = static_cast<std::uint8_t>(i);
    b.insert(b.end(), {v, v, v, 0});
  }
  const std::size_t pad = (4 - static_cast<std::size_t>(labels.width()) % 4) % 4;
  for (int y = labels.height() - 1; y >= 0; --y) {
    for (int x = 0; x < labels.width(); ++x) {
      if (labels(x, y) > 255) throw file_error(path, "label value does not fit an 8-bit BMP");
      b.push_back(static_cast<std::uint8_t>(labels(x, y)));
    }
    b.insert(b.end(), pad, 0);
  }
  write_bytes(path, b);
}

}  // namespace glandseg::io
