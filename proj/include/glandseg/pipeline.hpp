#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "glandseg/colornorm.hpp"
#include "glandseg/features.hpp"
#include "glandseg/forest.hpp"
#include "glandseg/imaging.hpp"

namespace glandseg {

enum class PredictionMode {
  /// Resolved sub-patches are painted at their own window size.
  Fine,
  /// The modal sub-patch label is assigned to the whole level-0 patch.
  CoarseMajority,
};

enum class ClassifierKind { RandomForest, Knn };

std::string_view to_string(PredictionMode mode);
PredictionMode prediction_mode_from_string(std::string_view text);
std::string_view to_string(ClassifierKind kind);
ClassifierKind classifier_from_string(std::string_view text);

struct PipelineConfig {
  /// Coarse to fine; windows strictly decreasing.
  std::vector<LevelConfig> levels = default_levels();
  TrainParams train;
  bool normalize = true;
  PredictionMode mode = PredictionMode::Fine;
  ClassifierKind classifier = ClassifierKind::RandomForest;
  int knn_k = 5;

  static std::vector<LevelConfig> default_levels();
  /// Builds levels from parallel window/filter lists, sharing the binning of `base`.
  static std::vector<LevelConfig> make_levels(const std::vector<int>& windows, const std::vector<int>& filters,
                                              const LevelConfig& base = {});
  void validate() const;
};

using LevelModel = std::variant<RandomForest, KnnModel>;

struct HierarchicalModel {
  static constexpr int kFormatVersion = 1;

  int format_version = kFormatVersion;
  PipelineConfig config;
  ChannelStats target_stats;
  /// One entry per level; empty when no training patch reached that level.
  std::vector<std::optional<LevelModel>> levels;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct TrainingPair {
  std::string name;
  ImageRGB image;
  BinaryMask mask;
};

/// Per-level training sets as produced by the Mix recursion.
struct LevelSamples {
  std::vector<FeatureVector> features;
  std::vector<Label> labels;
  std::vector<PatchRef> patches;
  std::vector<std::size_t> image_index;
};

/// Normalization (when enabled) followed by the recursive patch labeling and
/// feature extraction; exposed separately so tests can inspect the data each
/// level is trained on.
std::vector<LevelSamples> collect_training_samples(const std::vector<TrainingPair>& data,
                                                   const PipelineConfig& cfg,
                                                   const ChannelStats& target);

/// `target` defaults to the statistics of the first training image.
HierarchicalModel train_hierarchical(const std::vector<TrainingPair>& data, const PipelineConfig& cfg,
                                     std::optional<ChannelStats> target = std::nullopt);

Label classify(const LevelModel& model, std::span<const double> x);
VoteCounts level_votes(const LevelModel& model, std::span<const double> x);

struct Prediction {
  BinaryMask mask;  ///< cropped to the input size, before post-processing
  std::vector<PatchRef> level0_patches;  ///< in padded coordinates
  std::vector<Label> level0_labels;      ///< raw level-0 classifier output
};

Prediction predict_detailed(const HierarchicalModel& model, const ImageRGB& img,
                            std::optional<PredictionMode> mode = std::nullopt);
BinaryMask predict_image(const HierarchicalModel& model, const ImageRGB& img,
                         std::optional<PredictionMode> mode = std::nullopt);

/// `patch_label` of every w-tile, row-major. Dimensions must be multiples of w.
std::vector<Label> label_grid(const BinaryMask& mask, int w);

}  // namespace glandseg
