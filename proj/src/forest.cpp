#include "glandseg/forest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>

namespace glandseg {

Label modal_label(const VoteCounts& votes) {
  int best = 0;
  for (int c = 1; c < kLabelCount; ++c) {
    if (votes[c] > votes[best]) best = c;
  }
  return static_cast<Label>(best);
}

void TrainParams::validate() const {
  if (trees < 1) throw std::invalid_argument("trees must be >= 1");
  if (features_per_split < 0) throw std::invalid_argument("features_per_split must be >= 0");
  if (min_samples_split < 2) throw std::invalid_argument("min_samples_split must be >= 2");
  if (max_depth && *max_depth < 0) throw std::invalid_argument("max_depth must be >= 0");
  if (threads < 1) throw std::invalid_argument("threads must be >= 1");
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return mix64(master ^ mix64(index));
}

Label TreeNode::majority() const {
  VoteCounts v{};
  for (int c = 0; c < kLabelCount; ++c) v[c] = static_cast<int>(counts[c]);
  return modal_label(v);
}

Label DecisionTree::predict(std::span<const double> x) const {
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const TreeNode& n = nodes[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
  }
  return nodes[i].majority();
}

namespace {

void check_dim(std::span<const double> x, int dim) {
  if (static_cast<int>(x.size()) != dim) {
    throw std::invalid_argument("feature dimension mismatch: got " + std::to_string(x.size()) + ", model expects " +
                                std::to_string(dim));
  }
}

}  // namespace

VoteCounts RandomForest::votes(std::span<const double> x) const {
  check_dim(x, feature_dim);
  VoteCounts v{};
  for (const DecisionTree& t : trees) ++v[static_cast<int>(t.predict(x))];
  return v;
}

Label RandomForest::predict(std::span<const double> x) const { return modal_label(votes(x)); }

std::vector<Label> RandomForest::tree_votes(std::span<const double> x) const {
  check_dim(x, feature_dim);
  std::vector<Label> out;
  out.reserve(trees.size());
  for (const DecisionTree& t : trees) out.push_back(t.predict(x));
  return out;
}

void RandomForest::validate() const {
  if (feature_dim < 1) throw std::invalid_argument("forest.feature_dim must be >= 1");
  if (trees.empty()) throw std::invalid_argument("forest.trees must not be empty");
  if (static_cast<int>(trees.size()) != params.trees) {
    throw std::invalid_argument("forest.trees length differs from params.trees");
  }
  for (const DecisionTree& t : trees) {
    if (t.nodes.empty()) throw std::invalid_argument("forest.trees.nodes must not be empty");
    const int n = static_cast<int>(t.nodes.size());
    for (int i = 0; i < n; ++i) {
      const TreeNode& node = t.nodes[i];
      if (node.is_leaf()) {
        if (node.counts[0] + node.counts[1] + node.counts[2] == 0) {
          throw std::invalid_argument("forest.trees.nodes.counts: leaf without samples");
        }
        continue;
      }
      if (node.feature >= feature_dim) throw std::invalid_argument("forest.trees.nodes.feature out of range");
      // Children are stored after their parent, which rules out cycles.
      if (node.left <= i || node.left >= n || node.right <= i || node.right >= n) {
        throw std::invalid_argument("forest.trees.nodes.left/right: invalid child reference");
      }
    }
  }
}

namespace {

// Unbiased integer in [0, n) from a 64-bit engine. std::uniform_int_distribution
// is implementation-defined, which would break cross-platform reproducibility.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t r = 0;
  do {
    r = rng();
  } while (r >= limit);
  return r % n;
}

double gini(const VoteCounts& c, int n) {
  if (n == 0) return 0.0;
  double s = 0.0;
  for (int v : c) {
    const double p = static_cast<double>(v) / n;
    s += p * p;
  }
  return 1.0 - s;
}

class TreeBuilder {
 public:
  TreeBuilder(std::span<const FeatureVector> x, std::span<const Label> y, const TrainParams& params,
              int dim, std::uint64_t seed)
      : x_(x), y_(y), params_(params), dim_(dim), rng_(seed) {}

  DecisionTree build() {
    const std::size_t n = x_.size();
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = uniform_below(rng_, n);
    std::vector<int> feats(static_cast<std::size_t>(dim_));
    std::iota(feats.begin(), feats.end(), 0);
    feats_ = std::move(feats);
    grow(idx, 0);
    return std::move(tree_);
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
  };

  int grow(std::vector<std::size_t>& idx, int depth) {
    const int node_id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    VoteCounts c{};
    for (std::size_t i : idx) ++c[static_cast<int>(y_[i])];
    for (int k = 0; k < kLabelCount; ++k) tree_.nodes[node_id].counts[k] = static_cast<std::uint32_t>(c[k]);

    const int n = static_cast<int>(idx.size());
    const bool pure = std::count_if(c.begin(), c.end(), [](int v) { return v > 0; }) <= 1;
    const bool depth_limited = params_.max_depth && depth >= *params_.max_depth;
    if (pure || n < params_.min_samples_split || depth_limited) return node_id;

    const Split s = best_split(idx, c);
    if (s.feature < 0) return node_id;

    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (std::size_t i : idx) {
      (x_[i][static_cast<std::size_t>(s.feature)] <= s.threshold ? left : right).push_back(i);
    }
    idx.clear();
    idx.shrink_to_fit();

    const int l = grow(left, depth + 1);
    const int r = grow(right, depth + 1);
    TreeNode& node = tree_.nodes[node_id];
    node.feature = s.feature;
    node.threshold = s.threshold;
    node.left = l;
    node.right = r;
    node.counts = {};
    return node_id;
  }

  Split best_split(const std::vector<std::size_t>& idx, const VoteCounts& total) {
    const int n = static_cast<int>(idx.size());
    const double parent = gini(total, n);
    const int m = std::min(params_.features_per_split, dim_);

    // Partial Fisher-Yates: the first m entries become the candidate set.
    for (int k = 0; k < m; ++k) {
      const auto j = k + static_cast<int>(uniform_below(rng_, static_cast<std::uint64_t>(dim_ - k)));
      std::swap(feats_[k], feats_[j]);
    }

    Split best;
    std::vector<std::pair<double, int>> col(static_cast<std::size_t>(n));
    for (int k = 0; k < m; ++k) {
      const int f = feats_[k];
      for (int i = 0; i < n; ++i) {
        col[i] = {x_[idx[i]][static_cast<std::size_t>(f)], static_cast<int>(y_[idx[i]])};
      }
      std::sort(col.begin(), col.end());
      if (col.front().first == col.back().first) continue;

      VoteCounts left{};
      for (int i = 0; i + 1 < n; ++i) {
        ++left[col[i].second];
        if (col[i].first == col[i + 1].first) continue;
        const int nl = i + 1;
        const int nr = n - nl;
        VoteCounts right{};
        for (int c = 0; c < kLabelCount; ++c) right[c] = total[c] - left[c];
        const double child = (nl * gini(left, nl) + nr * gini(right, nr)) / n;
        const double gain = parent - child;
        if (gain > best.gain + kMinGain) {
          best.feature = f;
          best.gain = gain;
          best.threshold = col[i].first + (col[i + 1].first - col[i].first) / 2.0;
          // Midpoint rounding can land on the upper value for adjacent doubles.
          if (!(best.threshold < col[i + 1].first)) best.threshold = col[i].first;
        }
      }
    }
    return best;
  }

  static constexpr double kMinGain = 1e-12;

  std::span<const FeatureVector> x_;
  std::span<const Label> y_;
  const TrainParams& params_;
  int dim_;
  std::mt19937_64 rng_;
  std::vector<int> feats_;
  DecisionTree tree_;
};

}  // namespace

RandomForest train_forest(std::span<const FeatureVector> samples, std::span<const Label> labels,
                          const TrainParams& params) {
  params.validate();
  if (samples.empty()) throw std::invalid_argument("empty training set");
  if (samples.size() != labels.size()) throw std::invalid_argument("samples and labels differ in length");
  const int dim = static_cast<int>(samples.front().size());
  if (dim < 1) throw std::invalid_argument("feature dimension must be >= 1");
  for (const FeatureVector& s : samples) {
    if (static_cast<int>(s.size()) != dim) throw std::invalid_argument("feature dimension mismatch in training set");
    if (!std::all_of(s.begin(), s.end(), [](double v) { return std::isfinite(v); })) {
      throw std::invalid_argument("non-finite feature value in training set");
    }
  }

  RandomForest forest;
  forest.feature_dim = dim;
  forest.params = params;
  forest.params.threads = 1;
  if (forest.params.features_per_split == 0) {
    forest.params.features_per_split = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(dim))));
  }
  forest.params.features_per_split = std::min(forest.params.features_per_split, dim);

  std::array<bool, kLabelCount> seen{};
  for (Label l : labels) seen[static_cast<int>(l)] = true;
  for (int c = 0; c < kLabelCount; ++c) {
    if (seen[c]) forest.class_set.push_back(static_cast<Label>(c));
  }

  forest.trees.resize(static_cast<std::size_t>(params.trees));
  const TrainParams& p = forest.params;
  auto grow_tree = [&](std::size_t t) {
    TreeBuilder builder(samples, labels, p, dim, derive_seed(p.seed, t));
    forest.trees[t] = builder.build();
  };

  const int workers = std::min(params.threads, params.trees);
  if (workers <= 1) {
    for (std::size_t t = 0; t < forest.trees.size(); ++t) grow_tree(t);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t t = next++; t < forest.trees.size() && !failed; t = next++) {
          try {
            grow_tree(t);
          } catch (...) {
            if (!failed.exchange(true)) failure = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }
  return forest;
}

std::vector<std::size_t> nearest_neighbors(std::span<const FeatureVector> train, std::span<const double> x,
                                           int k) {
  if (train.empty()) throw std::invalid_argument("empty training set");
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  const std::size_t kk = std::min<std::size_t>(static_cast<std::size_t>(k), train.size());
  std::vector<std::pair<double, std::size_t>> d(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    if (train[i].size() != x.size()) throw std::invalid_argument("feature dimension mismatch");
    double s = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double diff = train[i][j] - x[j];
      s += diff * diff;
    }
    d[i] = {s, i};
  }
  std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(kk), d.end());
  std::vector<std::size_t> out(kk);
  for (std::size_t i = 0; i < kk; ++i) out[i] = d[i].second;
  return out;
}

namespace {

Label vote_with_nearest_tiebreak(const std::vector<std::size_t>& nn, std::span<const Label> labels) {
  VoteCounts v{};
  for (std::size_t i : nn) ++v[static_cast<int>(labels[i])];
  const int top = *std::max_element(v.begin(), v.end());
  for (std::size_t i : nn) {
    if (v[static_cast<int>(labels[i])] == top) return labels[i];
  }
  return labels[nn.front()];
}

}  // namespace

Label knn_predict(std::span<const FeatureVector> train, std::span<const Label> labels,
                  std::span<const double> x, int k) {
  if (train.size() != labels.size()) throw std::invalid_argument("samples and labels differ in length");
  return vote_with_nearest_tiebreak(nearest_neighbors(train, x, k), labels);
}

Label KnnModel::predict(std::span<const double> x) const { return knn_predict(samples, labels, x, k); }

VoteCounts KnnModel::votes(std::span<const double> x) const {
  VoteCounts v{};
  for (std::size_t i : nearest_neighbors(samples, x, k)) ++v[static_cast<int>(labels[i])];
  return v;
}

}  // namespace glandseg
