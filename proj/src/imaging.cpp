#include "glandseg/imaging.hpp"

#include <string>

namespace glandseg {

std::string_view to_string(Label label) {
  switch (label) {
    case Label::Gland:
      return "Gland";
    case Label::Mix:
      return "Mix";
    case Label::NonGland:
      return "NonGland";
  }
  return "?";
}

Label label_from_string(std::string_view text) {
  if (text == "Gland") return Label::Gland;
  if (text == "Mix") return Label::Mix;
  if (text == "NonGland") return Label::NonGland;
  throw std::invalid_argument("unknown label '" + std::string(text) + "'");
}

BinaryMask binarize_ground_truth(const LabelImage& annotation) {
  if (annotation.empty()) throw std::invalid_argument("empty input");
  BinaryMask mask(annotation.width(), annotation.height());
  const auto& src = annotation.data();
  auto& dst = mask.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] != 0 ? 1 : 0;
  return mask;
}

int padded_extent(int n, int w) {
  if (w < 1) throw std::invalid_argument("window size must be >= 1");
  return (n + w - 1) / w * w;
}

std::vector<PatchRef> patch_grid(int width, int height, int w) {
  if (w < 1) throw std::invalid_argument("window size must be >= 1");
  if (width % w != 0 || height % w != 0) {
    throw std::invalid_argument("unpadded input");
  }
  std::vector<PatchRef> grid;
  grid.reserve(static_cast<std::size_t>(width / w) * (height / w));
  for (int y = 0; y < height; y += w) {
    for (int x = 0; x < width; x += w) grid.push_back({x, y, w});
  }
  return grid;
}

std::vector<int> sub_patch_offsets(int parent, int child) {
  if (child < 1 || child > parent) {
    throw std::invalid_argument("child window must satisfy 1 <= child <= parent");
  }
  std::vector<int> offsets;
  int off = 0;
  for (; off + child <= parent; off += child) offsets.push_back(off);
  if (offsets.back() + child < parent) offsets.push_back(parent - child);
  return offsets;
}

std::vector<PatchRef> sub_patches(const PatchRef& parent, int child) {
  const auto offs = sub_patch_offsets(parent.w, child);
  std::vector<PatchRef> out;
  out.reserve(offs.size() * offs.size());
  for (int dy : offs) {
    for (int dx : offs) out.push_back({parent.x0 + dx, parent.y0 + dy, child});
  }
  return out;
}

namespace {

struct Count {
  std::size_t white = 0;
  std::size_t total = 0;
};

Count count_white(const BinaryMask& mask, int x0, int y0, int w, int h) {
  if (w <= 0 || h <= 0) throw std::invalid_argument("empty region");
  if (x0 < 0 || y0 < 0 || x0 + w > mask.width() || y0 + h > mask.height()) {
    throw std::out_of_range("region outside mask");
  }
  Count c;
  c.total = static_cast<std::size_t>(w) * h;
  for (int y = y0; y < y0 + h; ++y) {
    for (int x = x0; x < x0 + w; ++x) c.white += mask(x, y) != 0;
  }
  return c;
}

Label purity(Count c) {
  if (c.white == c.total) return Label::Gland;
  if (c.white == 0) return Label::NonGland;
  return Label::Mix;
}

Label majority(Count c) {
  return c.white > c.total - c.white ? Label::Gland : Label::NonGland;
}

}  // namespace

Label patch_label(const BinaryMask& mask, const PatchRef& r) {
  return purity(count_white(mask, r.x0, r.y0, r.w, r.w));
}

Label patch_label(const BinaryMask& mask) {
  return purity(count_white(mask, 0, 0, mask.width(), mask.height()));
}

Label majority_label(const BinaryMask& mask, const PatchRef& r) {
  return majority(count_white(mask, r.x0, r.y0, r.w, r.w));
}

Label majority_label(const BinaryMask& mask) {
  return majority(count_white(mask, 0, 0, mask.width(), mask.height()));
}

}  // namespace glandseg
