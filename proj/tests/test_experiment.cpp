#include <gtest/gtest.h>

#include "glandseg/config.hpp"
#include "glandseg/dataset.hpp"
#include "glandseg/experiment.hpp"
#include "glandseg/image_io.hpp"
#include "glandseg/log.hpp"
#include "glandseg/synthetic.hpp"
#include "oracles.hpp"

using namespace glandseg;

namespace {

struct QuietLog {
  LogSink previous = set_log_sink([](LogLevel, std::string_view) {});
  ~QuietLog() { set_log_sink(previous); }
};

RunConfig small_config() {
  RunConfig cfg;
  cfg.pipeline.train.trees = 4;
  return cfg;
}

}  // namespace

TEST(Experiment, SingleRoundReportStructure) {
  QuietLog quiet;
  oracle::TempDir dir("exp");
  synthetic::write_dataset(dir.path, "train", 2, 1, 64, 64);
  synthetic::write_dataset(dir.path, "testA", 2, 2, 64, 64);
  const auto train = load_training_pairs(load_glas_dataset(dir.path, "train"));
  const auto test = load_glas_dataset(dir.path, "testA");
  const ExperimentResult r = run_experiment(small_config(), train, test, 1);
  ASSERT_EQ(r.rounds.size(), 1u);
  EXPECT_EQ(r.average.raw.rows.size(), 2u);
  EXPECT_FALSE(r.average.raw.postprocessed);
  EXPECT_TRUE(r.average.postprocessed.postprocessed);
  const std::string csv = r.average.raw.to_csv();
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
  EXPECT_NE(csv.find("\nAverage,,"), std::string::npos);
  EXPECT_EQ(r.average.raw.rows[0].grade, Grade::Benign);
}

TEST(Experiment, RepeatedRoundsAreDeterministic) {
  QuietLog quiet;
  std::vector<TrainingPair> train = {synthetic::generate(1, 64, 64), synthetic::generate(2, 64, 64)};
  oracle::TempDir dir("exp");
  synthetic::write_dataset(dir.path, "testA", 2, 3, 64, 64);
  const auto test = load_glas_dataset(dir.path, "testA");
  const ExperimentResult a = run_experiment(small_config(), train, test, 5);
  const ExperimentResult b = run_experiment(small_config(), train, test, 5);
  ASSERT_EQ(a.rounds.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(a.rounds[i].raw.to_csv(), b.rounds[i].raw.to_csv());
    EXPECT_EQ(a.rounds[i].postprocessed.to_csv(), b.rounds[i].postprocessed.to_csv());
  }
  EXPECT_EQ(a.average.raw.to_csv(), b.average.raw.to_csv());
  EXPECT_THROW(run_experiment(small_config(), train, test, 0), std::invalid_argument);
}

TEST(Experiment, ReferenceImageDrivesTargetStats) {
  oracle::TempDir dir("exp");
  std::vector<TrainingPair> train = {synthetic::generate(4, 32, 32), synthetic::generate(5, 32, 32)};
  RunConfig cfg;
  EXPECT_EQ(resolve_target_stats(cfg, train), channel_stats(train[0].image));
  io::write_rgb_bmp(dir.path / "ref.bmp", train[1].image);
  cfg.reference = (dir.path / "ref.bmp").string();
  EXPECT_EQ(resolve_target_stats(cfg, train), channel_stats(train[1].image));
}

TEST(Experiment, SweepCoversComparisonMatrix) {
  const auto v = standard_sweep(RunConfig{});
  std::vector<std::string> names;
  for (const auto& e : v) names.push_back(e.name);
  auto has = [&](const std::string& n) { return std::find(names.begin(), names.end(), n) != names.end(); };
  EXPECT_TRUE(has("single_40_T100"));
  EXPECT_TRUE(has("hier_40_20_10_T10_nonorm"));
  EXPECT_TRUE(has("hier_21_11_5_knn"));
  for (const auto& e : v) e.config.pipeline.validate();
  const auto four = std::find_if(v.begin(), v.end(), [](const auto& e) { return e.name == "hier_40_20_10_5_T100"; });
  ASSERT_NE(four, v.end());
  EXPECT_EQ(four->config.pipeline.levels.back().filter, 1);
}
