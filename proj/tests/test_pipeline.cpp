#include <gtest/gtest.h>

#include "glandseg/log.hpp"
#include "glandseg/metrics.hpp"
#include "glandseg/model_io.hpp"
#include "glandseg/pipeline.hpp"
#include "glandseg/synthetic.hpp"
#include "oracles.hpp"

using namespace glandseg;

namespace {

// Forest whose trees are single leaves with the given votes.
RandomForest leaf_forest(const std::vector<Label>& votes, int dim) {
  RandomForest f;
  f.feature_dim = dim;
  for (Label l : votes) {
    DecisionTree t;
    TreeNode n;
    n.counts[static_cast<int>(l)] = 1;
    t.nodes.push_back(n);
    f.trees.push_back(t);
    if (std::find(f.class_set.begin(), f.class_set.end(), l) == f.class_set.end()) f.class_set.push_back(l);
  }
  std::sort(f.class_set.begin(), f.class_set.end());
  f.params.trees = static_cast<int>(votes.size());
  f.params.features_per_split = 1;
  return f;
}

HierarchicalModel manual_model(const std::vector<std::optional<LevelModel>>& levels) {
  HierarchicalModel m;
  m.config.normalize = false;
  m.target_stats.std = {1.0, 1.0, 1.0};
  m.levels = levels;
  return m;
}

constexpr int kDim = 330;

struct QuietLog {
  LogSink previous = set_log_sink([](LogLevel, std::string_view) {});
  ~QuietLog() { set_log_sink(previous); }
};

PipelineConfig fast_config() {
  PipelineConfig cfg;
  cfg.train.trees = 8;
  return cfg;
}

TrainingPair square_pair(int size, int x0, int y0, int side) {
  TrainingPair p;
  p.name = "square";
  p.image = ImageRGB(size, size, Rgb{40, 40, 40});
  p.mask = BinaryMask(size, size, 0);
  for (int y = y0; y < y0 + side; ++y) {
    for (int x = x0; x < x0 + side; ++x) {
      p.image(x, y) = Rgb{220, 220, 220};
      p.mask(x, y) = 1;
    }
  }
  return p;
}

}  // namespace

TEST(LabelGrid, Cases) {
  for (Label l : label_grid(BinaryMask(42, 21, 1), 21)) EXPECT_EQ(l, Label::Gland);
  for (Label l : label_grid(BinaryMask(42, 21, 0), 21)) EXPECT_EQ(l, Label::NonGland);
  BinaryMask one(63, 42, 0);
  one(30, 30) = 1;
  const auto g = label_grid(one, 21);
  ASSERT_EQ(g.size(), 6u);
  EXPECT_EQ(std::count(g.begin(), g.end(), Label::Mix), 1);
  EXPECT_EQ(g[4], Label::Mix);
  EXPECT_EQ(std::count(g.begin(), g.end(), Label::NonGland), 5);
}

TEST(PipelineConfig, Validation) {
  PipelineConfig cfg;
  cfg.validate();
  EXPECT_EQ(cfg.levels.size(), 3u);
  EXPECT_EQ(cfg.levels[1].window, 11);
  EXPECT_EQ(cfg.levels[2].filter, 3);
  cfg.levels = PipelineConfig::make_levels({21, 21}, {7, 5});
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  EXPECT_THROW(PipelineConfig::make_levels({21, 11}, {7}), std::invalid_argument);
  EXPECT_THROW(prediction_mode_from_string("coarse"), std::invalid_argument);
  EXPECT_EQ(classifier_from_string("knn"), ClassifierKind::Knn);
}

TEST(Predict, PureGlandLeafPaintsEverything) {
  const auto m = manual_model({leaf_forest({Label::Gland}, kDim), std::nullopt, std::nullopt});
  std::mt19937_64 rng(50);
  const BinaryMask out = predict_image(m, oracle::random_rgb(rng, 50, 37));
  EXPECT_EQ(out.width(), 50);
  EXPECT_EQ(out.height(), 37);
  for (auto v : out.data()) EXPECT_EQ(v, 1);
}

TEST(Predict, PureNonGlandLeafPaintsNothing) {
  const auto m = manual_model({leaf_forest({Label::NonGland}, kDim), std::nullopt, std::nullopt});
  std::mt19937_64 rng(51);
  EXPECT_EQ(predict_image(m, oracle::random_rgb(rng, 30, 30)), BinaryMask(30, 30, 0));
}

TEST(Predict, MixWithoutDeeperLevelFallsBackToVotes) {
  std::mt19937_64 rng(52);
  const ImageRGB img = oracle::random_rgb(rng, 21, 21);
  const auto white = manual_model({leaf_forest({Label::Mix, Label::Mix, Label::Gland}, kDim), std::nullopt,
                                   std::nullopt});
  EXPECT_EQ(predict_image(white, img), BinaryMask(21, 21, 1));
  const auto tie = manual_model({leaf_forest({Label::Mix, Label::Mix, Label::Mix, Label::Gland, Label::NonGland},
                                             kDim),
                                 std::nullopt, std::nullopt});
  EXPECT_EQ(predict_image(tie, img), BinaryMask(21, 21, 0));
}

TEST(Predict, MixDescendsToNextLevel) {
  std::mt19937_64 rng(53);
  const ImageRGB img = oracle::random_rgb(rng, 42, 21);
  const auto m = manual_model({leaf_forest({Label::Mix}, kDim), leaf_forest({Label::Gland}, kDim), std::nullopt});
  for (PredictionMode mode : {PredictionMode::Fine, PredictionMode::CoarseMajority}) {
    const Prediction p = predict_detailed(m, img, mode);
    for (auto v : p.mask.data()) EXPECT_EQ(v, 1);
    EXPECT_EQ(p.level0_labels, (std::vector<Label>{Label::Mix, Label::Mix}));
  }
}

TEST(Predict, DimensionMismatchThrows) {
  auto m = manual_model({leaf_forest({Label::Gland}, 12), std::nullopt, std::nullopt});
  EXPECT_THROW(predict_image(m, ImageRGB(21, 21)), std::invalid_argument);
  m = manual_model({leaf_forest({Label::Gland}, kDim), std::nullopt, leaf_forest({Label::Mix}, kDim)});
  EXPECT_THROW(m.validate(), std::invalid_argument);
  m = manual_model({std::nullopt, std::nullopt, std::nullopt});
  EXPECT_THROW(m.validate(), std::invalid_argument);
}

TEST(Train, AllWhiteAnnotationsLeaveDeeperLevelsAbsent) {
  QuietLog quiet;
  std::vector<std::string> warnings;
  set_log_sink([&](LogLevel l, std::string_view s) {
    if (l == LogLevel::Warning) warnings.emplace_back(s);
  });
  std::mt19937_64 rng(54);
  std::vector<TrainingPair> data;
  for (int i = 0; i < 2; ++i) data.push_back({"w", oracle::random_rgb(rng, 42, 42), BinaryMask(42, 42, 1)});
  const HierarchicalModel m = train_hierarchical(data, fast_config());
  ASSERT_TRUE(m.levels[0].has_value());
  EXPECT_FALSE(m.levels[1].has_value());
  EXPECT_FALSE(m.levels[2].has_value());
  EXPECT_EQ(warnings.size(), 2u);
  EXPECT_EQ(predict_image(m, oracle::random_rgb(rng, 40, 40)), BinaryMask(40, 40, 1));
}

TEST(Train, MixCountMatchesGeometricOracle) {
  QuietLog quiet;
  PipelineConfig cfg = fast_config();
  cfg.normalize = false;
  for (auto [x0, y0] : {std::pair{21, 21}, std::pair{10, 10}, std::pair{0, 5}, std::pair{30, 21}}) {
    const TrainingPair p = square_pair(105, x0, y0, 42);
    const auto samples = collect_training_samples({p}, cfg, ChannelStats{});
    int want = 0;
    for (int ty = 0; ty < 105; ty += 21) {
      for (int tx = 0; tx < 105; tx += 21) {
        const int ix = std::max(0, std::min(tx + 21, x0 + 42) - std::max(tx, x0));
        const int iy = std::max(0, std::min(ty + 21, y0 + 42) - std::max(ty, y0));
        const int inter = ix * iy;
        want += inter > 0 && inter < 21 * 21;
      }
    }
    EXPECT_EQ(std::count(samples[0].labels.begin(), samples[0].labels.end(), Label::Mix), want)
        << x0 << "," << y0;
    EXPECT_EQ(samples[0].labels.size(), 25u);
    // Each level-0 Mix patch contributes four 11-pixel children.
    EXPECT_EQ(samples[1].labels.size(), 4u * static_cast<std::size_t>(want));
    for (Label l : samples[2].labels) EXPECT_NE(l, Label::Mix);
  }
}

TEST(Train, DeterministicAndSeedSensitive) {
  QuietLog quiet;
  std::vector<TrainingPair> data = {synthetic::generate(1, 96, 96), synthetic::generate(2, 96, 96)};
  PipelineConfig cfg = fast_config();
  const std::string a = serialize_model(train_hierarchical(data, cfg));
  EXPECT_EQ(a, serialize_model(train_hierarchical(data, cfg)));
  cfg.train.threads = 3;
  EXPECT_EQ(a, serialize_model(train_hierarchical(data, cfg)));
  cfg.train.seed += 1;
  EXPECT_NE(a, serialize_model(train_hierarchical(data, cfg)));
}

TEST(Train, RejectsBadData) {
  EXPECT_THROW(train_hierarchical({}, fast_config()), std::invalid_argument);
  TrainingPair p{"bad", ImageRGB(21, 21), BinaryMask(20, 21)};
  EXPECT_THROW(train_hierarchical({p}, fast_config()), std::invalid_argument);
}

TEST(Train, KnnLevels) {
  QuietLog quiet;
  PipelineConfig cfg = fast_config();
  cfg.classifier = ClassifierKind::Knn;
  cfg.knn_k = 3;
  const std::vector<TrainingPair> data = {synthetic::generate(3, 84, 84)};
  const HierarchicalModel m = train_hierarchical(data, cfg);
  ASSERT_TRUE(m.levels[0].has_value());
  EXPECT_TRUE(std::holds_alternative<KnnModel>(*m.levels[0]));
  const BinaryMask out = predict_image(m, data[0].image);
  EXPECT_GE(pixel_accuracy(out, data[0].mask), 0.8);
}

TEST(Predict, CascadeConsistencyOnSyntheticModel) {
  QuietLog quiet;
  std::vector<TrainingPair> train;
  for (int i = 0; i < 3; ++i) train.push_back(synthetic::generate(100 + i, 128, 128));
  const HierarchicalModel m = train_hierarchical(train, fast_config());
  for (int i = 0; i < 2; ++i) {
    const TrainingPair test = synthetic::generate(200 + i, 128, 128);
    const Prediction fine = predict_detailed(m, test.image, PredictionMode::Fine);
    const Prediction coarse = predict_detailed(m, test.image, PredictionMode::CoarseMajority);
    EXPECT_EQ(fine.level0_labels, coarse.level0_labels);
    EXPECT_EQ(fine.mask.width(), 128);
    for (std::size_t k = 0; k < fine.level0_patches.size(); ++k) {
      const PatchRef& p = fine.level0_patches[k];
      if (fine.level0_labels[k] == Label::Mix) continue;
      for (int y = p.y0; y < std::min(p.y0 + p.w, 128); ++y) {
        for (int x = p.x0; x < std::min(p.x0 + p.w, 128); ++x) {
          ASSERT_EQ(fine.mask(x, y), coarse.mask(x, y));
          ASSERT_EQ(fine.mask(x, y), fine.level0_labels[k] == Label::Gland ? 1 : 0);
        }
      }
    }
    EXPECT_GE(pixel_accuracy(fine.mask, test.mask), 0.85);
    EXPECT_EQ(predict_image(m, test.image), fine.mask);
  }
}
