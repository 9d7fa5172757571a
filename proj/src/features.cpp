#include "glandseg/features.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace glandseg {

void LevelConfig::validate() const {
  if (window < 1) throw std::invalid_argument("level window must be >= 1");
  if (filter < 1 || filter % 2 == 0) throw std::invalid_argument("filter window must be odd and >= 1");
  if (bins1d < 2 || bins1d > 256) throw std::invalid_argument("bins1d must be in [2, 256]");
  if (bins2d < 2 || bins2d > 256) throw std::invalid_argument("bins2d must be in [2, 256]");
  if (glcm_levels < 2 || glcm_levels > 256) throw std::invalid_argument("glcm_levels must be in [2, 256]");
}

int LevelConfig::feature_dim() const {
  return 3 * bins1d + 3 * bins2d * bins2d + 3 * kHaralickCount;
}

GrayImage extract_channel(const ImageRGB& img, const PatchRef& patch, int channel) {
  if (patch.x0 < 0 || patch.y0 < 0 || patch.w < 1 || patch.x0 + patch.w > img.width() ||
      patch.y0 + patch.w > img.height()) {
    throw std::out_of_range("patch outside image");
  }
  GrayImage out(patch.w, patch.w);
  for (int y = 0; y < patch.w; ++y) {
    for (int x = 0; x < patch.w; ++x) {
      const Rgb& p = img(patch.x0 + x, patch.y0 + y);
      out(x, y) = channel == 0 ? p.r : channel == 1 ? p.g : p.b;
    }
  }
  return out;
}

std::vector<std::uint32_t> channel_histogram(const GrayImage& patch, int bins) {
  if (patch.empty()) throw std::invalid_argument("empty patch");
  std::vector<std::uint32_t> h(static_cast<std::size_t>(bins), 0);
  for (std::uint8_t v : patch.data()) ++h[static_cast<std::size_t>(v) * bins / 256];
  return h;
}

namespace {

// Summed-area tables of values and squared values over the replicate-padded
// patch. Sums are exact integers, so the derived means and variances agree
// with direct window summation up to the final division.
struct WindowSums {
  int width = 0;
  int height = 0;
  int radius = 0;
  std::vector<std::int64_t> sum;
  std::vector<std::int64_t> sq;

  WindowSums(const GrayImage& patch, int m) : width(patch.width()), height(patch.height()), radius(m / 2) {
    const int pw = width + 2 * radius + 1;
    const int ph = height + 2 * radius + 1;
    sum.assign(static_cast<std::size_t>(pw) * ph, 0);
    sq.assign(sum.size(), 0);
    for (int y = 1; y < ph; ++y) {
      const int sy = std::clamp(y - 1 - radius, 0, height - 1);
      for (int x = 1; x < pw; ++x) {
        const int sx = std::clamp(x - 1 - radius, 0, width - 1);
        const std::int64_t v = patch(sx, sy);
        const std::size_t i = static_cast<std::size_t>(y) * pw + x;
        sum[i] = v + sum[i - 1] + sum[i - pw] - sum[i - pw - 1];
        sq[i] = v * v + sq[i - 1] + sq[i - pw] - sq[i - pw - 1];
      }
    }
  }

  // Window centered at (x, y) covers padded rows/cols [x, x + 2r].
  std::pair<std::int64_t, std::int64_t> at(int x, int y) const {
    const int pw = width + 2 * radius + 1;
    const int d = 2 * radius + 1;
    auto rect = [&](const std::vector<std::int64_t>& t) {
      const std::size_t a = static_cast<std::size_t>(y) * pw + x;
      const std::size_t b = static_cast<std::size_t>(y) * pw + x + d;
      const std::size_t c = static_cast<std::size_t>(y + d) * pw + x;
      const std::size_t e = static_cast<std::size_t>(y + d) * pw + x + d;
      return t[e] - t[b] - t[c] + t[a];
    };
    return {rect(sum), rect(sq)};
  }
};

void check_filter_args(const GrayImage& patch, int m) {
  if (m < 1 || m % 2 == 0) throw std::invalid_argument("filter window must be odd and >= 1");
  if (patch.empty()) throw std::invalid_argument("empty patch");
}

}  // namespace

RealImage mean_filter(const GrayImage& patch, int m) {
  check_filter_args(patch, m);
  const WindowSums sums(patch, m);
  const double n = static_cast<double>(m) * m;
  RealImage out(patch.width(), patch.height());
  for (int y = 0; y < patch.height(); ++y) {
    for (int x = 0; x < patch.width(); ++x) out(x, y) = static_cast<double>(sums.at(x, y).first) / n;
  }
  return out;
}

RealImage std_filter(const GrayImage& patch, int m) {
  check_filter_args(patch, m);
  const WindowSums sums(patch, m);
  const std::int64_t n = static_cast<std::int64_t>(m) * m;
  const double n2 = static_cast<double>(n) * static_cast<double>(n);
  RealImage out(patch.width(), patch.height());
  for (int y = 0; y < patch.height(); ++y) {
    for (int x = 0; x < patch.width(); ++x) {
      const auto [s, q] = sums.at(x, y);
      const std::int64_t scaled_var = n * q - s * s;  // n^2 * variance, exact
      out(x, y) = std::sqrt(static_cast<double>(scaled_var) / n2);
    }
  }
  return out;
}

std::vector<std::uint32_t> hist2d(const RealImage& mean, const RealImage& std, int bins) {
  if (mean.width() != std.width() || mean.height() != std.height()) {
    throw std::invalid_argument("mean and std images differ in size");
  }
  constexpr double kMeanRange = 256.0;
  constexpr double kStdRange = 128.0;
  std::vector<std::uint32_t> h(static_cast<std::size_t>(bins) * bins, 0);
  auto bin_of = [bins](double v, double range) {
    const auto b = static_cast<int>(std::floor(v * bins / range));
    return std::clamp(b, 0, bins - 1);
  };
  for (std::size_t i = 0; i < mean.size(); ++i) {
    const int mb = bin_of(mean.data()[i], kMeanRange);
    const int sb = bin_of(std.data()[i], kStdRange);
    ++h[static_cast<std::size_t>(mb) * bins + sb];
  }
  return h;
}

std::array<int, 2> direction_offset(Direction d) {
  switch (d) {
    case Direction::Deg0:
      return {1, 0};
    case Direction::Deg45:
      return {1, -1};
    case Direction::Deg90:
      return {0, -1};
    case Direction::Deg135:
      return {-1, -1};
  }
  return {0, 0};
}

Glcm glcm(const GrayImage& patch, int levels, Direction direction) {
  if (levels < 2 || levels > 256) throw std::invalid_argument("glcm levels must be in [2, 256]");
  Glcm m;
  m.levels = levels;
  m.p.assign(static_cast<std::size_t>(levels) * levels, 0.0);

  const auto [dx, dy] = direction_offset(direction);
  std::vector<std::uint64_t> counts(m.p.size(), 0);
  std::uint64_t total = 0;
  auto quant = [levels](std::uint8_t v) { return static_cast<std::size_t>(v) * levels / 256; };
  for (int y = 0; y < patch.height(); ++y) {
    const int ny = y + dy;
    if (ny < 0 || ny >= patch.height()) continue;
    for (int x = 0; x < patch.width(); ++x) {
      const int nx = x + dx;
      if (nx < 0 || nx >= patch.width()) continue;
      const std::size_t a = quant(patch(x, y));
      const std::size_t b = quant(patch(nx, ny));
      ++counts[a * levels + b];
      ++counts[b * levels + a];
      total += 2;
    }
  }
  if (total == 0) return m;
  m.valid = true;
  const auto denom = static_cast<double>(total);
  for (std::size_t i = 0; i < counts.size(); ++i) m.p[i] = static_cast<double>(counts[i]) / denom;
  return m;
}

namespace {

double plogp(double p) { return p > 0.0 ? p * std::log2(p) : 0.0; }

// Eigenvalues of a small dense symmetric matrix by cyclic Jacobi rotations.
std::vector<double> symmetric_eigenvalues(std::vector<double> a, int n) {
  auto at = [&](int i, int j) -> double& { return a[static_cast<std::size_t>(i) * n + j]; };
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    double diag = 0.0;
    for (int i = 0; i < n; ++i) {
      diag += at(i, i) * at(i, i);
      for (int j = i + 1; j < n; ++j) off += at(i, j) * at(i, j);
    }
    if (off <= 1e-30 * std::max(diag, 1e-300)) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = at(p, q);
        if (apq == 0.0) continue;
        const double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = at(k, p);
          const double akq = at(k, q);
          at(k, p) = c * akp - s * akq;
          at(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = at(p, k);
          const double aqk = at(q, k);
          at(p, k) = c * apk - s * aqk;
          at(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) ev[static_cast<std::size_t>(i)] = at(i, i);
  return ev;
}

// Square root of the second largest eigenvalue of
// Q(i,j) = sum_k p(i,k) p(j,k) / (px(i) py(k)), evaluated on the symmetric
// similar matrix D^{1/2} Q D^{-1/2} over levels with non-zero marginals.
double maximal_correlation(const Glcm& m, const std::vector<double>& px, const std::vector<double>& py) {
  std::vector<int> rows;
  std::vector<int> cols;
  for (int i = 0; i < m.levels; ++i) {
    if (px[i] > 0.0) rows.push_back(i);
    if (py[i] > 0.0) cols.push_back(i);
  }
  const int n = static_cast<int>(rows.size());
  if (n < 2) return 0.0;
  std::vector<double> s(static_cast<std::size_t>(n) * n, 0.0);
  for (int a = 0; a < n; ++a) {
    for (int b = a; b < n; ++b) {
      double acc = 0.0;
      for (int k : cols) acc += m(rows[a], k) * m(rows[b], k) / py[k];
      acc /= std::sqrt(px[rows[a]] * px[rows[b]]);
      s[static_cast<std::size_t>(a) * n + b] = acc;
      s[static_cast<std::size_t>(b) * n + a] = acc;
    }
  }
  auto ev = symmetric_eigenvalues(std::move(s), n);
  std::sort(ev.begin(), ev.end(), std::greater<>());
  return std::sqrt(std::max(ev[1], 0.0));
}

constexpr double kDegenerate = 1e-12;

}  // namespace

std::array<double, kHaralickCount> haralick_features(const Glcm& m) {
  if (!m.valid) throw std::invalid_argument("degenerate patch");
  const int g = m.levels;
  std::vector<double> px(g, 0.0), py(g, 0.0);
  std::vector<double> psum(2 * g - 1, 0.0);  // index k-2 for k = i+j in [2, 2g]
  std::vector<double> pdiff(g, 0.0);

  double asm_ = 0.0, idm = 0.0, hxy = 0.0, sum_ij = 0.0;
  for (int i = 0; i < g; ++i) {
    for (int j = 0; j < g; ++j) {
      const double p = m(i, j);
      px[i] += p;
      py[j] += p;
      psum[i + j] += p;
      pdiff[std::abs(i - j)] += p;
      asm_ += p * p;
      idm += p / (1.0 + (i - j) * (i - j));
      hxy -= plogp(p);
      sum_ij += (i + 1.0) * (j + 1.0) * p;
    }
  }

  double mux = 0.0, muy = 0.0;
  for (int i = 0; i < g; ++i) {
    mux += (i + 1.0) * px[i];
    muy += (i + 1.0) * py[i];
  }
  double varx = 0.0, vary = 0.0, hx = 0.0, hy = 0.0;
  for (int i = 0; i < g; ++i) {
    varx += (i + 1.0 - mux) * (i + 1.0 - mux) * px[i];
    vary += (i + 1.0 - muy) * (i + 1.0 - muy) * py[i];
    hx -= plogp(px[i]);
    hy -= plogp(py[i]);
  }
  const double sdx = std::sqrt(varx);
  const double sdy = std::sqrt(vary);

  double contrast = 0.0, diff_mean = 0.0, diff_entropy = 0.0;
  for (int k = 0; k < g; ++k) {
    contrast += static_cast<double>(k) * k * pdiff[k];
    diff_mean += k * pdiff[k];
    diff_entropy -= plogp(pdiff[k]);
  }
  double diff_var = 0.0;
  for (int k = 0; k < g; ++k) diff_var += (k - diff_mean) * (k - diff_mean) * pdiff[k];

  double sum_avg = 0.0, sum_entropy = 0.0;
  for (int k = 0; k < 2 * g - 1; ++k) {
    sum_avg += (k + 2.0) * psum[k];
    sum_entropy -= plogp(psum[k]);
  }
  double sum_var = 0.0;
  for (int k = 0; k < 2 * g - 1; ++k) sum_var += (k + 2.0 - sum_avg) * (k + 2.0 - sum_avg) * psum[k];

  double hxy1 = 0.0, hxy2 = 0.0;
  for (int i = 0; i < g; ++i) {
    for (int j = 0; j < g; ++j) {
      const double q = px[i] * py[j];
      if (q <= 0.0) continue;
      const double lq = std::log2(q);
      hxy1 -= m(i, j) * lq;
      hxy2 -= q * lq;
    }
  }

  const double correlation =
      (sdx <= kDegenerate || sdy <= kDegenerate) ? 0.0 : (sum_ij - mux * muy) / (sdx * sdy);
  const double hmax = std::max(hx, hy);
  const double imc1 = hmax <= kDegenerate ? 0.0 : (hxy - hxy1) / hmax;
  const double imc2 = std::sqrt(std::max(0.0, 1.0 - std::exp(-2.0 * (hxy2 - hxy))));

  return {asm_,        contrast,  correlation,  varx,     idm,  sum_avg, sum_var,
          sum_entropy, hxy,       diff_var,     diff_entropy, imc1, imc2,
          maximal_correlation(m, px, py)};
}

std::array<double, kHaralickCount> haralick14(std::span<const Glcm> matrices) {
  std::array<double, kHaralickCount> avg{};
  int used = 0;
  for (const Glcm& m : matrices) {
    if (!m.valid) continue;
    const auto f = haralick_features(m);
    for (int i = 0; i < kHaralickCount; ++i) avg[i] += f[i];
    ++used;
  }
  if (used == 0) throw std::invalid_argument("degenerate patch");
  for (double& v : avg) v /= used;
  return avg;
}

FeatureVector assemble_features(const ImageRGB& img, const PatchRef& patch, const LevelConfig& cfg) {
  if (patch.w != cfg.window) {
    throw std::invalid_argument("patch side " + std::to_string(patch.w) + " does not match level window " +
                                std::to_string(cfg.window));
  }
  FeatureVector fv(static_cast<std::size_t>(cfg.feature_dim()), 0.0);
  const std::size_t hist_at = 0;
  const std::size_t hist2_at = 3 * static_cast<std::size_t>(cfg.bins1d);
  const std::size_t hara_at = hist2_at + 3 * static_cast<std::size_t>(cfg.bins2d) * cfg.bins2d;
  const std::size_t b2 = static_cast<std::size_t>(cfg.bins2d) * cfg.bins2d;

  for (int c = 0; c < 3; ++c) {
    const GrayImage ch = extract_channel(img, patch, c);

    const auto h1 = channel_histogram(ch, cfg.bins1d);
    std::copy(h1.begin(), h1.end(), fv.begin() + hist_at + c * h1.size());

    const auto h2 = hist2d(mean_filter(ch, cfg.filter), std_filter(ch, cfg.filter), cfg.bins2d);
    std::copy(h2.begin(), h2.end(), fv.begin() + hist2_at + c * b2);

    std::array<Glcm, 4> mats;
    for (std::size_t d = 0; d < kAllDirections.size(); ++d) mats[d] = glcm(ch, cfg.glcm_levels, kAllDirections[d]);
    const auto hara = haralick14(mats);
    std::copy(hara.begin(), hara.end(), fv.begin() + hara_at + c * kHaralickCount);
  }
  return fv;
}

FeatureVector assemble_features(const ImageRGB& patch, const LevelConfig& cfg) {
  if (patch.width() != cfg.window || patch.height() != cfg.window) {
    throw std::invalid_argument("patch size does not match level window");
  }
  return assemble_features(patch, PatchRef{0, 0, cfg.window}, cfg);
}

}  // namespace glandseg
