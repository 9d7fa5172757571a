#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "glandseg/image_io.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(GLANDSEG_CLI) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Cli, TrainPredictEvaluateFeatures) {
  oracle::TempDir dir("cli");
  const std::string d = dir.path.string();
  {
    std::ofstream(dir.path / "run.cfg") << "trees=4\n";
  }
  ASSERT_EQ(run("synth --out " + d + "/data --split train --count 2 --size 64 --seed 1"), 0);
  ASSERT_EQ(run("synth --out " + d + "/data --split testA --count 2 --size 64 --seed 2"), 0);
  ASSERT_EQ(run("train --data " + d + "/data --config " + d + "/run.cfg --out " + d + "/m.json --seed 3"), 0);
  ASSERT_TRUE(fs::exists(dir.path / "m.json"));

  ASSERT_EQ(run("predict --model " + d + "/m.json --in " + d + "/data/testA_1.bmp --out " + d + "/pred"), 0);
  const auto mask = glandseg::io::read_labels(dir.path / "pred" / "testA_1.png");
  EXPECT_EQ(mask.width(), 64);
  for (auto v : mask.data()) EXPECT_TRUE(v == 0 || v == 255);

  ASSERT_EQ(run("predict --model " + d + "/m.json --in " + d + "/data --out " + d + "/all --mode coarse-majority"), 0);
  EXPECT_TRUE(fs::exists(dir.path / "all" / "testA_2.png"));
  EXPECT_TRUE(fs::exists(dir.path / "all" / "train_1.png"));
  EXPECT_FALSE(fs::exists(dir.path / "all" / "train_1_anno.png"));

  ASSERT_EQ(run("evaluate --model " + d + "/m.json --data " + d + "/data --split testA --report " + d + "/r.csv"), 0);
  const std::string csv = slurp(dir.path / "r.csv");
  EXPECT_EQ(csv.rfind("image,grade,pixel_accuracy,patch_accuracy,postprocessed\n", 0), 0u);
  EXPECT_NE(csv.find("testA_2,malignant,"), std::string::npos);
  EXPECT_NE(csv.find("Average,,"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir.path / "r_raw.csv"));

  ASSERT_EQ(run("features --in " + d + "/data/testA_1.bmp --out " + d + "/f.csv --level 2"), 0);
  std::ifstream f(dir.path / "f.csv");
  std::string header, row;
  std::getline(f, header);
  std::getline(f, row);
  EXPECT_EQ(std::count(header.begin(), header.end(), ','), 332);
  EXPECT_EQ(std::count(row.begin(), row.end(), ','), 332);
  EXPECT_EQ(row.rfind("0,0,5,", 0), 0u);
}

TEST(Cli, Experiment) {
  oracle::TempDir dir("cli");
  const std::string d = dir.path.string();
  {
    std::ofstream(dir.path / "run.cfg") << "trees=3\ntest_splits=testA\n";
  }
  ASSERT_EQ(run("synth --out " + d + "/data --split train --count 2 --size 48 --seed 1"), 0);
  ASSERT_EQ(run("synth --out " + d + "/data --split testA --count 1 --size 48 --seed 2"), 0);
  ASSERT_EQ(run("experiment --config " + d + "/run.cfg --data " + d + "/data --rounds 2 --report-dir " + d + "/rep"),
            0);
  EXPECT_TRUE(fs::exists(dir.path / "rep" / "experiment_round2_post.csv"));
  EXPECT_TRUE(fs::exists(dir.path / "rep" / "experiment_average_raw.csv"));
  EXPECT_NE(slurp(dir.path / "rep" / "summary.csv").find("experiment,2,"), std::string::npos);
}

TEST(Cli, Errors) {
  oracle::TempDir dir("cli");
  const std::string d = dir.path.string();
  EXPECT_NE(run(""), 0);
  EXPECT_NE(run("train --data " + d + " --out " + d + "/m.json"), 0);
  EXPECT_NE(run("predict --model " + d + "/none.json --in x --out y"), 0);
  EXPECT_NE(run("predict --model a --in b --out c --mode sideways"), 0);
  {
    std::ofstream(dir.path / "bad.cfg") << "unknown_key=1\n";
  }
  EXPECT_NE(run("train --data " + d + " --config " + d + "/bad.cfg --out " + d + "/m.json"), 0);
}
