#include <gtest/gtest.h>

#include "glandseg/colornorm.hpp"
#include "oracles.hpp"

using namespace glandseg;

namespace {

// Direct lab conversion: row-normalized Reinhard cone matrix, log10, decorrelating rotation.
Eigen::Vector3d oracle_lab(double r, double g, double b) {
  Eigen::Matrix3d m;
  m << 0.3811, 0.5783, 0.0402, 0.1967, 0.7244, 0.0782, 0.0241, 0.1288, 0.8444;
  for (int i = 0; i < 3; ++i) m.row(i) /= m.row(i).sum();
  Eigen::Vector3d rgb(std::max(r / 255.0, 1.0 / 255.0), std::max(g / 255.0, 1.0 / 255.0),
                      std::max(b / 255.0, 1.0 / 255.0));
  const Eigen::Vector3d lms = (m * rgb).array().log10();
  Eigen::Matrix3d rot;
  rot << 1, 1, 1, 1, 1, -2, 1, -1, 0;
  const Eigen::Vector3d scale(1 / std::sqrt(3.0), 1 / std::sqrt(6.0), 1 / std::sqrt(2.0));
  return scale.asDiagonal() * (rot * lms);
}

}  // namespace

TEST(RgbToLab, BlackIsFinite) {
  const Lab p = rgb_to_lab(Rgb{0, 0, 0});
  EXPECT_TRUE(std::isfinite(p.l) && std::isfinite(p.alpha) && std::isfinite(p.beta));
}

TEST(RgbToLab, GrayIsAchromatic) {
  for (int v : {1, 50, 128, 200, 255}) {
    const auto u = static_cast<std::uint8_t>(v);
    const Lab p = rgb_to_lab(Rgb{u, u, u});
    EXPECT_LT(std::abs(p.alpha), 1e-6) << v;
    EXPECT_LT(std::abs(p.beta), 1e-6) << v;
  }
}

TEST(RgbToLab, MatchesMatrixOracle) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> d(0, 255);
  for (int i = 0; i < 1000; ++i) {
    const Rgb p{static_cast<std::uint8_t>(d(rng)), static_cast<std::uint8_t>(d(rng)),
                static_cast<std::uint8_t>(d(rng))};
    const Lab got = rgb_to_lab(p);
    const Eigen::Vector3d want = oracle_lab(p.r, p.g, p.b);
    EXPECT_NEAR(got.l, want[0], 1e-12);
    EXPECT_NEAR(got.alpha, want[1], 1e-12);
    EXPECT_NEAR(got.beta, want[2], 1e-12);
  }
}

TEST(LabToRgb, RoundTripWithinOneLevel) {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> d(0, 255);
  for (int i = 0; i < 10000; ++i) {
    const Rgb p{static_cast<std::uint8_t>(d(rng)), static_cast<std::uint8_t>(d(rng)),
                static_cast<std::uint8_t>(d(rng))};
    const Rgb q = lab_to_rgb(rgb_to_lab(p));
    // Zero channels are clamped to one level before the log, so they come back as 0 or 1.
    EXPECT_LE(std::abs(int(p.r) - int(q.r)), 1);
    EXPECT_LE(std::abs(int(p.g) - int(q.g)), 1);
    EXPECT_LE(std::abs(int(p.b) - int(q.b)), 1);
  }
}

TEST(LabToRgb, OutOfGamutClamps) {
  const Rgb hi = lab_to_rgb(Lab{50.0, 0.0, 0.0});
  EXPECT_EQ(hi, (Rgb{255, 255, 255}));
  const Rgb lo = lab_to_rgb(Lab{-50.0, 0.0, 0.0});
  EXPECT_EQ(lo, (Rgb{0, 0, 0}));
  const Rgb mixed = lab_to_rgb(Lab{0.0, 40.0, -40.0});
  for (int c : {int(mixed.r), int(mixed.g), int(mixed.b)}) EXPECT_TRUE(c == 0 || c == 255);
}

TEST(LabToRgb, ConstantLabGivesConstantColor) {
  const ImageRGB img = lab_to_rgb(LabImage(6, 4, Lab{}));
  for (const Rgb& p : img.data()) EXPECT_EQ(p, img.data().front());
}

TEST(ChannelStats, ConstantImageClampsStd) {
  const ChannelStats s = channel_stats(LabImage(5, 5, Lab{1.0, 2.0, 3.0}));
  EXPECT_DOUBLE_EQ(s.mean[0], 1.0);
  EXPECT_DOUBLE_EQ(s.mean[2], 3.0);
  for (double v : s.std) EXPECT_EQ(v, kStdFloor);
}

TEST(ChannelStats, TwoPixelClosedForm) {
  LabImage lab(2, 1);
  lab(0, 0) = Lab{1.0, -2.0, 0.5};
  lab(1, 0) = Lab{3.0, 4.0, 0.5};
  const ChannelStats s = channel_stats(lab);
  EXPECT_DOUBLE_EQ(s.mean[0], 2.0);
  EXPECT_DOUBLE_EQ(s.std[0], 1.0);
  EXPECT_DOUBLE_EQ(s.mean[1], 1.0);
  EXPECT_DOUBLE_EQ(s.std[1], 3.0);
  EXPECT_EQ(s.std[2], kStdFloor);
}

TEST(ChannelStats, MatchesTwoPassOracle) {
  std::mt19937_64 rng(9);
  const LabImage lab = rgb_to_lab(oracle::random_rgb(rng, 64, 64));
  const ChannelStats s = channel_stats(lab);
  for (int c = 0; c < 3; ++c) {
    auto get = [c](const Lab& p) { return c == 0 ? p.l : c == 1 ? p.alpha : p.beta; };
    double mean = 0.0;
    for (const Lab& p : lab.data()) mean += get(p);
    mean /= static_cast<double>(lab.size());
    double ss = 0.0;
    for (const Lab& p : lab.data()) ss += (get(p) - mean) * (get(p) - mean);
    const double sd = std::sqrt(ss / static_cast<double>(lab.size()));
    EXPECT_TRUE(oracle::close_rel(s.mean[c], mean, 1e-9)) << c;
    EXPECT_TRUE(oracle::close_rel(s.std[c], sd, 1e-9)) << c;
  }
}

TEST(ChannelStats, EmptyThrows) { EXPECT_THROW(channel_stats(LabImage{}), std::invalid_argument); }

TEST(Reinhard, OwnStatsIsNearIdentity) {
  std::mt19937_64 rng(10);
  const ImageRGB img = oracle::random_rgb(rng, 48, 40);
  const ImageRGB out = reinhard_normalize(img, channel_stats(img));
  for (std::size_t i = 0; i < img.size(); ++i) {
    EXPECT_LE(std::abs(int(img.data()[i].r) - int(out.data()[i].r)), 2);
    EXPECT_LE(std::abs(int(img.data()[i].g) - int(out.data()[i].g)), 2);
    EXPECT_LE(std::abs(int(img.data()[i].b) - int(out.data()[i].b)), 2);
  }
}

TEST(Reinhard, ConstantSourceLandsOnTargetMeans) {
  ChannelStats target;
  target.mean = {-0.3, 0.02, -0.01};
  target.std = {0.2, 0.05, 0.03};
  const ImageRGB out = reinhard_normalize(ImageRGB(4, 4, Rgb{90, 60, 120}), target);
  const Eigen::Vector3d m(target.mean[0], target.mean[1], target.mean[2]);
  const Rgb want = lab_to_rgb(Lab{m[0], m[1], m[2]});
  for (const Rgb& p : out.data()) EXPECT_EQ(p, want);
}

TEST(Reinhard, DoublingTargetStdDoublesDeviations) {
  std::mt19937_64 rng(11);
  const LabImage lab = rgb_to_lab(oracle::random_rgb(rng, 16, 16));
  ChannelStats t;
  t.mean = {0.1, 0.0, 0.0};
  t.std = {0.1, 0.02, 0.03};
  ChannelStats t2 = t;
  for (double& s : t2.std) s *= 2.0;
  const LabImage a = match_stats(lab, t);
  const LabImage b = match_stats(lab, t2);
  for (std::size_t i = 0; i < lab.size(); ++i) {
    EXPECT_NEAR(b.data()[i].l - t.mean[0], 2.0 * (a.data()[i].l - t.mean[0]), 1e-12);
    EXPECT_NEAR(b.data()[i].alpha - t.mean[1], 2.0 * (a.data()[i].alpha - t.mean[1]), 1e-12);
    EXPECT_NEAR(b.data()[i].beta - t.mean[2], 2.0 * (a.data()[i].beta - t.mean[2]), 1e-12);
  }
}

TEST(Reinhard, IdempotentUpToQuantization) {
  std::mt19937_64 rng(12);
  const ImageRGB src = oracle::random_rgb(rng, 32, 32);
  const ChannelStats target = channel_stats(oracle::random_rgb(rng, 32, 32));
  const ImageRGB once = reinhard_normalize(src, target);
  const ImageRGB twice = reinhard_normalize(once, target);
  for (std::size_t i = 0; i < once.size(); ++i) {
    EXPECT_LE(std::abs(int(once.data()[i].r) - int(twice.data()[i].r)), 2);
    EXPECT_LE(std::abs(int(once.data()[i].g) - int(twice.data()[i].g)), 2);
    EXPECT_LE(std::abs(int(once.data()[i].b) - int(twice.data()[i].b)), 2);
  }
  EXPECT_EQ(reinhard_normalize(src, target), once);
}
