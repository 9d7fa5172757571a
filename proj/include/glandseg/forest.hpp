#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "glandseg/features.hpp"
#include "glandseg/imaging.hpp"

namespace glandseg {

using VoteCounts = std::array<int, kLabelCount>;

/// Returns the label with most votes; ties resolve in enumerator order
/// (Gland, Mix, NonGland).
Label modal_label(const VoteCounts& votes);

struct TrainParams {
  int trees = 100;
  /// Candidate features examined per split; 0 selects ceil(sqrt(dim)).
  int features_per_split = 0;
  int min_samples_split = 2;
  std::optional<int> max_depth;
  std::uint64_t seed = 0x5eed;
  /// Worker threads used while growing trees. Has no effect on the model.
  int threads = 1;

  void validate() const;
};

/// Stateless 64-bit avalanche (splitmix64 finalizer).
std::uint64_t mix64(std::uint64_t x);
/// Seed of tree `index` under `master`; fixed so models reproduce across machines.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

struct TreeNode {
  int feature = -1;  ///< -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::array<std::uint32_t, kLabelCount> counts{};

  bool is_leaf() const { return feature < 0; }
  Label majority() const;

  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

/// Flat binary tree; node 0 is the root and samples with x[feature] <= threshold go left.
struct DecisionTree {
  std::vector<TreeNode> nodes;

  Label predict(std::span<const double> x) const;

  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;
};

struct RandomForest {
  std::vector<DecisionTree> trees;
  std::vector<Label> class_set;  ///< sorted, distinct labels seen in training
  int feature_dim = 0;
  TrainParams params;  ///< with features_per_split resolved

  Label predict(std::span<const double> x) const;
  VoteCounts votes(std::span<const double> x) const;
  std::vector<Label> tree_votes(std::span<const double> x) const;

  /// Throws std::invalid_argument naming the violated invariant.
  void validate() const;
};

RandomForest train_forest(std::span<const FeatureVector> samples, std::span<const Label> labels,
                          const TrainParams& params);

/// Brute-force k-nearest-neighbour baseline; the "model" is its training set.
struct KnnModel {
  std::vector<FeatureVector> samples;
  std::vector<Label> labels;
  int k = 5;

  Label predict(std::span<const double> x) const;
  /// Label counts among the k nearest samples.
  VoteCounts votes(std::span<const double> x) const;
};

/// Indices of the k nearest training samples, nearest first; equal distances
/// keep training order. k is clamped to the training-set size.
std::vector<std::size_t> nearest_neighbors(std::span<const FeatureVector> train, std::span<const double> x,
                                           int k);

/// Majority label among the k nearest; a label tie goes to whichever tied
/// label occurs nearest.
Label knn_predict(std::span<const FeatureVector> train, std::span<const Label> labels,
                  std::span<const double> x, int k);

}  // namespace glandseg
