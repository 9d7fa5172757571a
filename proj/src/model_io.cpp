#include "glandseg/model_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace glandseg {

using nlohmann::json;

namespace {

json level_to_json(const LevelConfig& l) {
  return {{"window", l.window},
          {"filter", l.filter},
          {"bins1d", l.bins1d},
          {"bins2d", l.bins2d},
          {"glcmLevels", l.glcm_levels}};
}

LevelConfig level_from_json(const json& j) {
  LevelConfig l;
  l.window = j.at("window").get<int>();
  l.filter = j.at("filter").get<int>();
  l.bins1d = j.at("bins1d").get<int>();
  l.bins2d = j.at("bins2d").get<int>();
  l.glcm_levels = j.at("glcmLevels").get<int>();
  return l;
}

json params_to_json(const TrainParams& p) {
  return {{"trees", p.trees},
          {"featuresPerSplit", p.features_per_split},
          {"minSamplesSplit", p.min_samples_split},
          {"maxDepth", p.max_depth ? json(*p.max_depth) : json(nullptr)},
          {"seed", p.seed}};
}

TrainParams params_from_json(const json& j) {
  TrainParams p;
  p.trees = j.at("trees").get<int>();
  p.features_per_split = j.at("featuresPerSplit").get<int>();
  p.min_samples_split = j.at("minSamplesSplit").get<int>();
  if (!j.at("maxDepth").is_null()) p.max_depth = j.at("maxDepth").get<int>();
  p.seed = j.at("seed").get<std::uint64_t>();
  return p;
}

json labels_to_json(const std::vector<Label>& labels) {
  json a = json::array();
  for (Label l : labels) a.push_back(std::string(to_string(l)));
  return a;
}

std::vector<Label> labels_from_json(const json& j) {
  std::vector<Label> out;
  for (const auto& v : j) out.push_back(label_from_string(v.get<std::string>()));
  return out;
}

json forest_to_json(const RandomForest& f) {
  json trees = json::array();
  for (const DecisionTree& t : f.trees) {
    json nodes = json::array();
    for (const TreeNode& n : t.nodes) {
      if (n.is_leaf()) {
        nodes.push_back({{"counts", n.counts}});
      } else {
        nodes.push_back({{"feature", n.feature}, {"threshold", n.threshold}, {"left", n.left}, {"right", n.right}});
      }
    }
    trees.push_back({{"nodes", std::move(nodes)}});
  }
  return {{"type", "rf"},
          {"featureDim", f.feature_dim},
          {"classSet", labels_to_json(f.class_set)},
          {"params", params_to_json(f.params)},
          {"trees", std::move(trees)}};
}

RandomForest forest_from_json(const json& j) {
  RandomForest f;
  f.feature_dim = j.at("featureDim").get<int>();
  f.class_set = labels_from_json(j.at("classSet"));
  f.params = params_from_json(j.at("params"));
  for (const auto& jt : j.at("trees")) {
    DecisionTree t;
    for (const auto& jn : jt.at("nodes")) {
      TreeNode n;
      if (jn.contains("counts")) {
        n.counts = jn.at("counts").get<std::array<std::uint32_t, kLabelCount>>();
      } else {
        n.feature = jn.at("feature").get<int>();
        n.threshold = jn.at("threshold").get<double>();
        n.left = jn.at("left").get<int>();
        n.right = jn.at("right").get<int>();
        if (n.feature < 0) throw std::invalid_argument("forest.trees.nodes.feature must be >= 0");
      }
      t.nodes.push_back(n);
    }
    f.trees.push_back(std::move(t));
  }
  return f;
}

json knn_to_json(const KnnModel& k) {
  return {{"type", "knn"}, {"k", k.k}, {"labels", labels_to_json(k.labels)}, {"samples", k.samples}};
}

KnnModel knn_from_json(const json& j) {
  KnnModel k;
  k.k = j.at("k").get<int>();
  k.labels = labels_from_json(j.at("labels"));
  k.samples = j.at("samples").get<std::vector<FeatureVector>>();
  return k;
}

json config_to_json(const PipelineConfig& c) {
  json levels = json::array();
  for (const auto& l : c.levels) levels.push_back(level_to_json(l));
  return {{"levels", std::move(levels)},
          {"train", params_to_json(c.train)},
          {"normalize", c.normalize},
          {"mode", std::string(to_string(c.mode))},
          {"classifier", std::string(to_string(c.classifier))},
          {"knnK", c.knn_k}};
}

PipelineConfig config_from_json(const json& j) {
  PipelineConfig c;
  c.levels.clear();
  for (const auto& l : j.at("levels")) c.levels.push_back(level_from_json(l));
  c.train = params_from_json(j.at("train"));
  c.normalize = j.at("normalize").get<bool>();
  c.mode = prediction_mode_from_string(j.at("mode").get<std::string>());
  c.classifier = classifier_from_string(j.at("classifier").get<std::string>());
  c.knn_k = j.at("knnK").get<int>();
  return c;
}

}  // namespace

std::string serialize_forest(const RandomForest& forest) { return forest_to_json(forest).dump(); }

std::string serialize_model(const HierarchicalModel& model) {
  json levels = json::array();
  for (const auto& l : model.levels) {
    if (!l) {
      levels.push_back(nullptr);
    } else if (const auto* f = std::get_if<RandomForest>(&*l)) {
      levels.push_back(forest_to_json(*f));
    } else {
      levels.push_back(knn_to_json(std::get<KnnModel>(*l)));
    }
  }
  const json doc = {{"formatVersion", model.format_version},
                    {"config", config_to_json(model.config)},
                    {"targetStats", {{"mean", model.target_stats.mean}, {"std", model.target_stats.std}}},
                    {"levels", std::move(levels)}};
  return doc.dump(1);
}

HierarchicalModel deserialize_model(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("malformed model document: ") + e.what());
  }
  HierarchicalModel m;
  try {
    if (!doc.is_object() || !doc.contains("formatVersion")) {
      throw std::invalid_argument("missing formatVersion");
    }
    m.format_version = doc.at("formatVersion").get<int>();
    if (m.format_version != HierarchicalModel::kFormatVersion) {
      throw std::invalid_argument("unsupported model formatVersion " + std::to_string(m.format_version) +
                                  " (this build reads version " +
                                  std::to_string(HierarchicalModel::kFormatVersion) + ")");
    }
    m.config = config_from_json(doc.at("config"));
    m.target_stats.mean = doc.at("targetStats").at("mean").get<std::array<double, 3>>();
    m.target_stats.std = doc.at("targetStats").at("std").get<std::array<double, 3>>();
    for (const auto& jl : doc.at("levels")) {
      if (jl.is_null()) {
        m.levels.emplace_back(std::nullopt);
      } else if (jl.at("type") == "rf") {
        m.levels.emplace_back(forest_from_json(jl));
      } else if (jl.at("type") == "knn") {
        m.levels.emplace_back(knn_from_json(jl));
      } else {
        throw std::invalid_argument("levels.type must be 'rf' or 'knn'");
      }
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("invalid model document: ") + e.what());
  }
  m.validate();
  return m;
}

void save_model(const HierarchicalModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out << serialize_model(model);
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

HierarchicalModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path.string() + ": cannot open model file");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return deserialize_model(ss.str());
  } catch (const std::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

}  // namespace glandseg
