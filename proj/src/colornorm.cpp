#include "glandseg/colornorm.hpp"

#include <algorithm>
#include <cmath>

namespace glandseg {

namespace {

using Mat3 = std::array<std::array<double, 3>, 3>;

// Reinhard et al. RGB -> LMS cone-response matrix, with each row rescaled to
// sum to one so that achromatic RGB lands exactly on the l axis (the published
// constants are off by up to 0.27% and leave gray with a small alpha/beta).
constexpr Mat3 kRgbToLmsRaw = {{{0.3811, 0.5783, 0.0402},
                                {0.1967, 0.7244, 0.0782},
                                {0.0241, 0.1288, 0.8444}}};

Mat3 row_normalized(const Mat3& m) {
  Mat3 out = m;
  for (auto& row : out) {
    const double s = row[0] + row[1] + row[2];
    for (double& v : row) v /= s;
  }
  return out;
}

Mat3 inverse(const Mat3& m) {
  const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                     m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                     m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  Mat3 inv{};
  inv[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / det;
  inv[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / det;
  inv[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / det;
  inv[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) / det;
  inv[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / det;
  inv[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / det;
  inv[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) / det;
  inv[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / det;
  inv[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / det;
  return inv;
}

const Mat3& rgb_to_lms() {
  static const Mat3 m = row_normalized(kRgbToLmsRaw);
  return m;
}

const Mat3& lms_to_rgb() {
  static const Mat3 m = inverse(rgb_to_lms());
  return m;
}

std::array<double, 3> apply(const Mat3& m, const std::array<double, 3>& v) {
  return {m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
          m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
          m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2]};
}

const double kInvSqrt3 = 1.0 / std::sqrt(3.0);
const double kInvSqrt6 = 1.0 / std::sqrt(6.0);
const double kInvSqrt2 = 1.0 / std::sqrt(2.0);
constexpr double kMinChannel = 1.0 / 255.0;

std::uint8_t to_level(double unit) {
  const double v = std::clamp(unit * 255.0, 0.0, 255.0);
  return static_cast<std::uint8_t>(std::lround(v));
}

}  // namespace

Lab rgb_to_lab(Rgb p) {
  const std::array<double, 3> rgb = {std::max(p.r / 255.0, kMinChannel),
                                     std::max(p.g / 255.0, kMinChannel),
                                     std::max(p.b / 255.0, kMinChannel)};
  const auto lms = apply(rgb_to_lms(), rgb);
  const double L = std::log10(lms[0]);
  const double M = std::log10(lms[1]);
  const double S = std::log10(lms[2]);
  return {(L + M + S) * kInvSqrt3, (L + M - 2.0 * S) * kInvSqrt6, (L - M) * kInvSqrt2};
}

Rgb lab_to_rgb(const Lab& p) {
  const double a = p.l * kInvSqrt3;
  const double b = p.alpha * kInvSqrt6;
  const double c = p.beta * kInvSqrt2;
  // Saturate the exponent so extreme inputs clamp rather than overflow.
  auto exp10 = [](double v) { return std::pow(10.0, std::clamp(v, -30.0, 30.0)); };
  const std::array<double, 3> lms = {exp10(a + b + c), exp10(a + b - c), exp10(a - 2.0 * b)};
  const auto rgb = apply(lms_to_rgb(), lms);
  return {to_level(rgb[0]), to_level(rgb[1]), to_level(rgb[2])};
}

LabImage rgb_to_lab(const ImageRGB& img) {
  LabImage out(img.width(), img.height());
  for (std::size_t i = 0; i < img.size(); ++i) out.data()[i] = rgb_to_lab(img.data()[i]);
  return out;
}

ImageRGB lab_to_rgb(const LabImage& lab) {
  ImageRGB out(lab.width(), lab.height());
  for (std::size_t i = 0; i < lab.size(); ++i) out.data()[i] = lab_to_rgb(lab.data()[i]);
  return out;
}

ChannelStats channel_stats(const LabImage& lab) {
  if (lab.empty()) throw std::invalid_argument("empty input");
  const auto n = static_cast<double>(lab.size());
  ChannelStats st;
  for (const Lab& p : lab.data()) {
    st.mean[0] += p.l;
    st.mean[1] += p.alpha;
    st.mean[2] += p.beta;
  }
  for (double& m : st.mean) m /= n;
  std::array<double, 3> ss{};
  for (const Lab& p : lab.data()) {
    const double d0 = p.l - st.mean[0];
    const double d1 = p.alpha - st.mean[1];
    const double d2 = p.beta - st.mean[2];
    ss[0] += d0 * d0;
    ss[1] += d1 * d1;
    ss[2] += d2 * d2;
  }
  for (int c = 0; c < 3; ++c) st.std[c] = std::max(std::sqrt(ss[c] / n), kStdFloor);
  return st;
}

LabImage match_stats(const LabImage& src, const ChannelStats& target) {
  const ChannelStats s = channel_stats(src);
  std::array<double, 3> gain{};
  for (int c = 0; c < 3; ++c) gain[c] = target.std[c] / s.std[c];
  LabImage out(src.width(), src.height());
  for (std::size_t i = 0; i < src.size(); ++i) {
    const Lab& p = src.data()[i];
    out.data()[i] = {(p.l - s.mean[0]) * gain[0] + target.mean[0],
                     (p.alpha - s.mean[1]) * gain[1] + target.mean[1],
                     (p.beta - s.mean[2]) * gain[2] + target.mean[2]};
  }
  return out;
}

ImageRGB reinhard_normalize(const ImageRGB& src, const ChannelStats& target) {
  return lab_to_rgb(match_stats(rgb_to_lab(src), target));
}

}  // namespace glandseg
