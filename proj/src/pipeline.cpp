#include "glandseg/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <stdexcept>
#include <string>
#include <thread>

#include "glandseg/log.hpp"

namespace glandseg {

std::string_view to_string(PredictionMode mode) {
  return mode == PredictionMode::Fine ? "fine" : "coarse-majority";
}

PredictionMode prediction_mode_from_string(std::string_view text) {
  if (text == "fine") return PredictionMode::Fine;
  if (text == "coarse-majority") return PredictionMode::CoarseMajority;
  throw std::invalid_argument("unknown prediction mode '" + std::string(text) + "'");
}

std::string_view to_string(ClassifierKind kind) {
  return kind == ClassifierKind::RandomForest ? "rf" : "knn";
}

ClassifierKind classifier_from_string(std::string_view text) {
  if (text == "rf") return ClassifierKind::RandomForest;
  if (text == "knn") return ClassifierKind::Knn;
  throw std::invalid_argument("unknown classifier '" + std::string(text) + "'");
}

std::vector<LevelConfig> PipelineConfig::default_levels() {
  return make_levels({21, 11, 5}, {7, 5, 3});
}

std::vector<LevelConfig> PipelineConfig::make_levels(const std::vector<int>& windows,
                                                     const std::vector<int>& filters, const LevelConfig& base) {
  if (windows.size() != filters.size()) {
    throw std::invalid_argument("windows and filters must have the same number of entries");
  }
  std::vector<LevelConfig> levels;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    LevelConfig l = base;
    l.window = windows[i];
    l.filter = filters[i];
    levels.push_back(l);
  }
  return levels;
}

void PipelineConfig::validate() const {
  if (levels.empty()) throw std::invalid_argument("config.levels must not be empty");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    levels[i].validate();
    if (i > 0 && levels[i].window >= levels[i - 1].window) {
      throw std::invalid_argument("config.levels: windows must be strictly decreasing");
    }
  }
  train.validate();
  if (knn_k < 1) throw std::invalid_argument("config.knn_k must be >= 1");
}

namespace {

int model_dim(const LevelModel& m) {
  if (const auto* f = std::get_if<RandomForest>(&m)) return f->feature_dim;
  const auto& k = std::get<KnnModel>(m);
  return k.samples.empty() ? 0 : static_cast<int>(k.samples.front().size());
}

std::vector<Label> model_classes(const LevelModel& m) {
  if (const auto* f = std::get_if<RandomForest>(&m)) return f->class_set;
  std::array<bool, kLabelCount> seen{};
  for (Label l : std::get<KnnModel>(m).labels) seen[static_cast<int>(l)] = true;
  std::vector<Label> out;
  for (int c = 0; c < kLabelCount; ++c) {
    if (seen[c]) out.push_back(static_cast<Label>(c));
  }
  return out;
}

}  // namespace

void HierarchicalModel::validate() const {
  if (format_version != kFormatVersion) {
    throw std::invalid_argument("formatVersion " + std::to_string(format_version) + " is not supported (expected " +
                                std::to_string(kFormatVersion) + ")");
  }
  config.validate();
  if (levels.size() != config.levels.size()) {
    throw std::invalid_argument("levels: expected one entry per configured level");
  }
  if (!levels.front()) throw std::invalid_argument("levels[0]: the first level model is required");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (!levels[i]) continue;
    const std::string where = "levels[" + std::to_string(i) + "]";
    const LevelModel& m = *levels[i];
    if (const auto* f = std::get_if<RandomForest>(&m)) {
      try {
        f->validate();
      } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(where + "." + e.what());
      }
    } else {
      const auto& k = std::get<KnnModel>(m);
      if (k.samples.empty() || k.samples.size() != k.labels.size() || k.k < 1) {
        throw std::invalid_argument(where + ".knn: inconsistent training set");
      }
      for (const auto& s : k.samples) {
        if (static_cast<int>(s.size()) != model_dim(m)) throw std::invalid_argument(where + ".knn.samples: ragged");
      }
    }
    if (model_dim(m) != config.levels[i].feature_dim()) {
      throw std::invalid_argument(where + ".feature_dim does not match the level configuration");
    }
    if (i + 1 == levels.size()) {
      for (Label l : model_classes(m)) {
        if (l == Label::Mix) throw std::invalid_argument(where + ".class_set: final level must be binary");
      }
    }
  }
  for (int c = 0; c < 3; ++c) {
    if (!(target_stats.std[c] > 0.0)) throw std::invalid_argument("targetStats.std must be positive");
  }
}

namespace {

template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  const int workers = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n && !failed; i = next++) {
        try {
          fn(i);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

ImageRGB prepare_image(const ImageRGB& img, const PipelineConfig& cfg, const ChannelStats& target) {
  return cfg.normalize ? reinhard_normalize(img, target) : img;
}

}  // namespace

std::vector<LevelSamples> collect_training_samples(const std::vector<TrainingPair>& data, const PipelineConfig& cfg,
                                                   const ChannelStats& target) {
  cfg.validate();
  if (data.empty()) throw std::invalid_argument("no training data");
  const std::size_t depth = cfg.levels.size();
  const int w0 = cfg.levels.front().window;
  std::vector<LevelSamples> out(depth);

  for (std::size_t n = 0; n < data.size(); ++n) {
    const TrainingPair& pair = data[n];
    if (pair.image.empty() || pair.image.width() != pair.mask.width() ||
        pair.image.height() != pair.mask.height()) {
      throw std::invalid_argument("training pair '" + pair.name + "': image and annotation sizes differ");
    }
    const ImageRGB img = pad_replicate(prepare_image(pair.image, cfg, target), w0);
    const BinaryMask mask = pad_replicate(pair.mask, w0);

    std::vector<PatchRef> current = patch_grid(img.width(), img.height(), w0);
    for (std::size_t k = 0; k < depth && !current.empty(); ++k) {
      const bool last = k + 1 == depth;
      LevelSamples& level = out[k];
      const std::size_t first = level.patches.size();
      std::vector<PatchRef> mixed;
      for (const PatchRef& p : current) {
        const Label purity = patch_label(mask, p);
        if (purity == Label::Mix) mixed.push_back(p);
        level.patches.push_back(p);
        level.labels.push_back(last ? majority_label(mask, p) : purity);
        level.image_index.push_back(n);
      }
      level.features.resize(level.patches.size());
      parallel_for(current.size(), cfg.train.threads, [&](std::size_t i) {
        level.features[first + i] = assemble_features(img, level.patches[first + i], cfg.levels[k]);
      });
      if (last) break;
      current.clear();
      for (const PatchRef& p : mixed) {
        const auto children = sub_patches(p, cfg.levels[k + 1].window);
        current.insert(current.end(), children.begin(), children.end());
      }
    }
  }
  return out;
}

HierarchicalModel train_hierarchical(const std::vector<TrainingPair>& data, const PipelineConfig& cfg,
                                     std::optional<ChannelStats> target) {
  cfg.validate();
  if (data.empty()) throw std::invalid_argument("no training data");

  HierarchicalModel model;
  model.config = cfg;
  model.target_stats = target ? *target : channel_stats(data.front().image);

  const auto samples = collect_training_samples(data, cfg, model.target_stats);
  model.levels.resize(cfg.levels.size());
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const LevelSamples& s = samples[k];
    if (s.features.empty()) {
      log_warning("level " + std::to_string(k) + " (window " + std::to_string(cfg.levels[k].window) +
                  ") received no training patches; its classifier is absent");
      continue;
    }
    log_info("level " + std::to_string(k) + ": training on " + std::to_string(s.features.size()) + " patches");
    if (cfg.classifier == ClassifierKind::RandomForest) {
      TrainParams p = cfg.train;
      p.seed = derive_seed(cfg.train.seed, k);
      model.levels[k] = train_forest(s.features, s.labels, p);
    } else {
      model.levels[k] = KnnModel{s.features, s.labels, cfg.knn_k};
    }
  }
  return model;
}

Label classify(const LevelModel& model, std::span<const double> x) {
  return std::visit([&](const auto& m) { return m.predict(x); }, model);
}

VoteCounts level_votes(const LevelModel& model, std::span<const double> x) {
  return std::visit([&](const auto& m) { return m.votes(x); }, model);
}

namespace {

class CascadePredictor {
 public:
  CascadePredictor(const HierarchicalModel& model, const ImageRGB& img, BinaryMask& out)
      : model_(model), img_(img), out_(out) {}

  // Classifier output at `level`; a Mix with no deeper classifier to consult
  // falls back to the majority of that level's non-Mix votes.
  Label classify_at(std::size_t level, const PatchRef& p) const {
    const auto x = assemble_features(img_, p, model_.config.levels[level]);
    const LevelModel& m = *model_.levels[level];
    const Label l = classify(m, x);
    if (l != Label::Mix || can_descend(level)) return l;
    const VoteCounts v = level_votes(m, x);
    return v[static_cast<int>(Label::Gland)] > v[static_cast<int>(Label::NonGland)] ? Label::Gland
                                                                                    : Label::NonGland;
  }

  bool can_descend(std::size_t level) const {
    return level + 1 < model_.levels.size() && model_.levels[level + 1].has_value();
  }

  void resolve_fine(std::size_t level, const PatchRef& p, Label label) {
    if (label == Label::Gland) {
      paint(p);
    } else if (label == Label::Mix) {
      for (const PatchRef& c : sub_patches(p, model_.config.levels[level + 1].window)) {
        resolve_fine(level + 1, c, classify_at(level + 1, c));
      }
    }
  }

  Label resolve_coarse(std::size_t level, const std::vector<PatchRef>& patches) const {
    VoteCounts counts{};
    std::vector<PatchRef> mixed;
    for (const PatchRef& p : patches) {
      const Label l = classify_at(level, p);
      ++counts[static_cast<int>(l)];
      if (l == Label::Mix) mixed.push_back(p);
    }
    const Label mode = modal_label(counts);
    if (mode != Label::Mix) return mode;
    std::vector<PatchRef> children;
    for (const PatchRef& p : mixed) {
      const auto sub = sub_patches(p, model_.config.levels[level + 1].window);
      children.insert(children.end(), sub.begin(), sub.end());
    }
    return resolve_coarse(level + 1, children);
  }

  void paint(const PatchRef& p) {
    for (int y = p.y0; y < p.y0 + p.w; ++y) {
      for (int x = p.x0; x < p.x0 + p.w; ++x) out_(x, y) = 1;
    }
  }

 private:
  const HierarchicalModel& model_;
  const ImageRGB& img_;
  BinaryMask& out_;
};

}  // namespace

Prediction predict_detailed(const HierarchicalModel& model, const ImageRGB& img, std::optional<PredictionMode> mode) {
  model.validate();
  if (img.empty()) throw std::invalid_argument("empty input");
  const PipelineConfig& cfg = model.config;
  const int w0 = cfg.levels.front().window;
  const ImageRGB padded = pad_replicate(prepare_image(img, cfg, model.target_stats), w0);

  Prediction pred;
  BinaryMask full(padded.width(), padded.height(), 0);
  CascadePredictor cascade(model, padded, full);

  pred.level0_patches = patch_grid(padded.width(), padded.height(), w0);
  pred.level0_labels.resize(pred.level0_patches.size());
  parallel_for(pred.level0_patches.size(), cfg.train.threads, [&](std::size_t i) {
    pred.level0_labels[i] = cascade.classify_at(0, pred.level0_patches[i]);
  });

  const PredictionMode m = mode.value_or(cfg.mode);
  for (std::size_t i = 0; i < pred.level0_patches.size(); ++i) {
    const PatchRef& p = pred.level0_patches[i];
    Label l = pred.level0_labels[i];
    if (m == PredictionMode::Fine) {
      cascade.resolve_fine(0, p, l);
      continue;
    }
    if (l == Label::Mix) l = cascade.resolve_coarse(1, sub_patches(p, cfg.levels[1].window));
    if (l == Label::Gland) cascade.paint(p);
  }

  pred.mask = crop(full, 0, 0, img.width(), img.height());
  return pred;
}

BinaryMask predict_image(const HierarchicalModel& model, const ImageRGB& img, std::optional<PredictionMode> mode) {
  return predict_detailed(model, img, mode).mask;
}

std::vector<Label> label_grid(const BinaryMask& mask, int w) {
  std::vector<Label> out;
  for (const PatchRef& p : patch_grid(mask.width(), mask.height(), w)) out.push_back(patch_label(mask, p));
  return out;
}

}  // namespace glandseg
