#include <gtest/gtest.h>

#include "glandseg/imaging.hpp"
#include "oracles.hpp"

using namespace glandseg;

TEST(Binarize, AllZeroAnnotationGivesBlackMask) {
  const BinaryMask m = binarize_ground_truth(LabelImage(7, 5, 0u));
  for (auto v : m.data()) EXPECT_EQ(v, 0);
}

TEST(Binarize, NonzeroLabelsBecomeWhite) {
  LabelImage a(4, 1, std::vector<std::uint32_t>{0, 1, 2, 7});
  const BinaryMask m = binarize_ground_truth(a);
  EXPECT_EQ(m.data(), (std::vector<std::uint8_t>{0, 1, 1, 1}));
}

TEST(Binarize, EmptyInputThrows) { EXPECT_THROW(binarize_ground_truth(LabelImage{}), std::invalid_argument); }

TEST(Padding, CeilingToWindowMultiple) {
  const ImageRGB img(775, 522);
  const ImageRGB p = pad_replicate(img, 21);
  EXPECT_EQ(p.width(), 777);
  EXPECT_EQ(p.height(), 525);
}

TEST(Padding, ExactMultipleIsUnchanged) {
  std::mt19937_64 rng(1);
  const ImageRGB img = oracle::random_rgb(rng, 100, 100);
  EXPECT_EQ(pad_replicate(img, 20), img);
}

TEST(Padding, SinglePixelReplicates) {
  ImageRGB img(1, 1, Rgb{10, 20, 30});
  const ImageRGB p = pad_replicate(img, 5);
  ASSERT_EQ(p.width(), 5);
  ASSERT_EQ(p.height(), 5);
  for (const Rgb& v : p.data()) EXPECT_EQ(v, (Rgb{10, 20, 30}));
}

TEST(Padding, ReplicatesLastRowAndColumn) {
  std::mt19937_64 rng(2);
  const GrayImage g = oracle::random_gray(rng, 7, 4);
  const GrayImage p = pad_replicate(g, 5);
  ASSERT_EQ(p.width(), 10);
  ASSERT_EQ(p.height(), 5);
  for (int y = 0; y < 5; ++y) {
    for (int x = 0; x < 10; ++x) EXPECT_EQ(p(x, y), g(std::min(x, 6), std::min(y, 3)));
  }
  EXPECT_EQ(crop(p, 0, 0, 7, 4), g);
}

TEST(Padding, RejectsBadInput) {
  EXPECT_THROW(pad_replicate(GrayImage{}, 5), std::invalid_argument);
  EXPECT_THROW(pad_replicate(GrayImage(3, 3), 0), std::invalid_argument);
}

TEST(PatchGrid, CountsAndOrder) {
  EXPECT_EQ(patch_grid(777, 525, 21).size(), 925u);
  const auto one = patch_grid(21, 21, 21);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0], (PatchRef{0, 0, 21}));
  const auto g = patch_grid(40, 40, 10);
  ASSERT_EQ(g.size(), 16u);
  EXPECT_EQ(g.front(), (PatchRef{0, 0, 10}));
  EXPECT_EQ(g[1], (PatchRef{10, 0, 10}));
  EXPECT_EQ(g.back(), (PatchRef{30, 30, 10}));
}

TEST(PatchGrid, UnpaddedInputThrows) {
  try {
    patch_grid(22, 21, 21);
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("unpadded input"), std::string::npos);
  }
}

TEST(SubPatches, OffsetsOverlapAtEnd) {
  EXPECT_EQ(sub_patch_offsets(21, 11), (std::vector<int>{0, 10}));
  EXPECT_EQ(sub_patch_offsets(40, 20), (std::vector<int>{0, 20}));
  EXPECT_EQ(sub_patch_offsets(11, 5), (std::vector<int>{0, 5, 6}));
  EXPECT_EQ(sub_patch_offsets(5, 5), (std::vector<int>{0}));
}

TEST(SubPatches, CoverParentAndStayInside) {
  for (int parent : {21, 11, 40, 20, 10}) {
    for (int child = 1; child <= parent; ++child) {
      const auto offs = sub_patch_offsets(parent, child);
      std::vector<int> cover(static_cast<std::size_t>(parent), 0);
      for (int o : offs) {
        ASSERT_GE(o, 0);
        ASSERT_LE(o + child, parent);
        for (int i = 0; i < child; ++i) ++cover[static_cast<std::size_t>(o + i)];
      }
      for (int c : cover) EXPECT_GE(c, 1) << parent << "/" << child;
    }
  }
}

TEST(SubPatches, CartesianProductPlacedInParent) {
  const auto s = sub_patches(PatchRef{21, 42, 21}, 11);
  ASSERT_EQ(s.size(), 4u);
  EXPECT_EQ(s[0], (PatchRef{21, 42, 11}));
  EXPECT_EQ(s[1], (PatchRef{31, 42, 11}));
  EXPECT_EQ(s[2], (PatchRef{21, 52, 11}));
  EXPECT_EQ(s[3], (PatchRef{31, 52, 11}));
  EXPECT_EQ(sub_patches(PatchRef{0, 0, 11}, 5).size(), 9u);
}

TEST(PatchLabel, PureAndMixed) {
  EXPECT_EQ(patch_label(BinaryMask(21, 21, 1)), Label::Gland);
  EXPECT_EQ(patch_label(BinaryMask(21, 21, 0)), Label::NonGland);
  BinaryMask m(21, 21, 0);
  m(10, 10) = 1;
  EXPECT_EQ(patch_label(m), Label::Mix);
}

TEST(PatchLabel, RegionOverload) {
  BinaryMask m(42, 21, 0);
  for (int y = 0; y < 21; ++y) {
    for (int x = 21; x < 42; ++x) m(x, y) = 1;
  }
  EXPECT_EQ(patch_label(m, {0, 0, 21}), Label::NonGland);
  EXPECT_EQ(patch_label(m, {21, 0, 21}), Label::Gland);
  EXPECT_EQ(patch_label(m, {11, 0, 21}), Label::Mix);
}

TEST(MajorityLabel, StrictMajorityIsGland) {
  auto with_ones = [](int side, int ones) {
    BinaryMask m(side, side, 0);
    for (int i = 0; i < ones; ++i) m.data()[static_cast<std::size_t>(i)] = 1;
    return m;
  };
  EXPECT_EQ(majority_label(with_ones(5, 13)), Label::Gland);
  EXPECT_EQ(majority_label(with_ones(5, 12)), Label::NonGland);
  EXPECT_EQ(majority_label(with_ones(4, 8)), Label::NonGland);
  EXPECT_EQ(majority_label(with_ones(4, 9), PatchRef{0, 0, 4}), Label::Gland);
}

TEST(Labels, StringRoundTrip) {
  for (Label l : {Label::Gland, Label::Mix, Label::NonGland}) EXPECT_EQ(label_from_string(to_string(l)), l);
  EXPECT_THROW(label_from_string("purple"), std::invalid_argument);
}

TEST(Raster, RejectsMismatchedData) {
  EXPECT_THROW(GrayImage(3, 3, std::vector<std::uint8_t>(8)), std::invalid_argument);
  EXPECT_THROW(GrayImage(-1, 3), std::invalid_argument);
  EXPECT_THROW(crop(GrayImage(3, 3), 1, 1, 3, 1), std::out_of_range);
}
