#include "glandseg/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace glandseg {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T v{};
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw std::invalid_argument("config key '" + key + "': invalid number '" + value + "'");
  }
  return v;
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
  std::vector<int> out;
  for (const auto& item : split_list(value)) out.push_back(parse_number<int>(key, item));
  if (out.empty()) throw std::invalid_argument("config key '" + key + "': empty list");
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw std::invalid_argument("config key '" + key + "': expected a boolean, got '" + value + "'");
}

template <typename Fn>
void for_each_level(RunConfig& cfg, Fn&& fn) {
  for (auto& l : cfg.pipeline.levels) fn(l);
}

std::vector<int> windows_of(const RunConfig& cfg) {
  std::vector<int> v;
  for (const auto& l : cfg.pipeline.levels) v.push_back(l.window);
  return v;
}

std::vector<int> filters_of(const RunConfig& cfg) {
  std::vector<int> v;
  for (const auto& l : cfg.pipeline.levels) v.push_back(l.filter);
  return v;
}

std::string join(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

// Rebuilds the level list when windows or filters change length. Filters
// missing for new levels default to 3.
void resize_levels(RunConfig& cfg, std::vector<int> windows, std::vector<int> filters) {
  const LevelConfig base = cfg.pipeline.levels.empty() ? LevelConfig{} : cfg.pipeline.levels.front();
  filters.resize(windows.size(), 3);
  cfg.pipeline.levels = PipelineConfig::make_levels(windows, filters, base);
}

}  // namespace

void apply_config_key(RunConfig& cfg, const std::string& key, const std::string& value) {
  auto& p = cfg.pipeline;
  if (key == "windows") {
    resize_levels(cfg, parse_int_list(key, value), filters_of(cfg));
  } else if (key == "filters") {
    auto filters = parse_int_list(key, value);
    if (filters.size() != p.levels.size()) {
      throw std::invalid_argument("config key 'filters': expected " + std::to_string(p.levels.size()) +
                                  " entries to match 'windows'");
    }
    resize_levels(cfg, windows_of(cfg), filters);
  } else if (key == "bins1d") {
    const int v = parse_number<int>(key, value);
    for_each_level(cfg, [v](LevelConfig& l) { l.bins1d = v; });
  } else if (key == "bins2d") {
    const int v = parse_number<int>(key, value);
    for_each_level(cfg, [v](LevelConfig& l) { l.bins2d = v; });
  } else if (key == "glcm_levels") {
    const int v = parse_number<int>(key, value);
    for_each_level(cfg, [v](LevelConfig& l) { l.glcm_levels = v; });
  } else if (key == "trees") {
    p.train.trees = parse_number<int>(key, value);
  } else if (key == "features_per_split") {
    p.train.features_per_split = parse_number<int>(key, value);
  } else if (key == "min_samples_split") {
    p.train.min_samples_split = parse_number<int>(key, value);
  } else if (key == "max_depth") {
    if (value == "none" || value.empty()) {
      p.train.max_depth.reset();
    } else {
      p.train.max_depth = parse_number<int>(key, value);
    }
  } else if (key == "seed") {
    p.train.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "threads") {
    p.train.threads = parse_number<int>(key, value);
  } else if (key == "normalize") {
    p.normalize = parse_bool(key, value);
  } else if (key == "mode") {
    p.mode = prediction_mode_from_string(value);
  } else if (key == "classifier") {
    p.classifier = classifier_from_string(value);
  } else if (key == "knn_k") {
    p.knn_k = parse_number<int>(key, value);
  } else if (key == "postprocess") {
    cfg.postprocess = parse_bool(key, value);
  } else if (key == "canny_sigma") {
    cfg.postproc.gaussian_sigma = parse_number<double>(key, value);
  } else if (key == "canny_low") {
    cfg.postproc.low_threshold = parse_number<double>(key, value);
  } else if (key == "canny_high") {
    cfg.postproc.high_threshold = parse_number<double>(key, value);
  } else if (key == "element") {
    cfg.postproc.element = structuring_element_from_string(value);
  } else if (key == "element_radius") {
    cfg.postproc.element_radius = parse_number<int>(key, value);
  } else if (key == "reference") {
    cfg.reference = value;
  } else if (key == "data") {
    cfg.data_dir = value;
  } else if (key == "test_splits") {
    cfg.test_splits = split_list(value);
  } else {
    throw std::invalid_argument("unknown config key '" + key + "'");
  }
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key=value");
    }
    try {
      apply_config_key(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  cfg.pipeline.validate();
  cfg.postproc.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path.string() + ": cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

std::string format_config(const RunConfig& cfg) {
  const auto& p = cfg.pipeline;
  const LevelConfig& l = p.levels.front();
  std::ostringstream out;
  out << "windows=" << join(windows_of(cfg)) << '\n'
      << "filters=" << join(filters_of(cfg)) << '\n'
      << "bins1d=" << l.bins1d << '\n'
      << "bins2d=" << l.bins2d << '\n'
      << "glcm_levels=" << l.glcm_levels << '\n'
      << "trees=" << p.train.trees << '\n'
      << "features_per_split=" << p.train.features_per_split << '\n'
      << "min_samples_split=" << p.train.min_samples_split << '\n'
      << "max_depth=" << (p.train.max_depth ? std::to_string(*p.train.max_depth) : "none") << '\n'
      << "seed=" << p.train.seed << '\n'
      << "threads=" << p.train.threads << '\n'
      << "normalize=" << (p.normalize ? "true" : "false") << '\n'
      << "mode=" << to_string(p.mode) << '\n'
      << "classifier=" << to_string(p.classifier) << '\n'
      << "knn_k=" << p.knn_k << '\n'
      << "postprocess=" << (cfg.postprocess ? "true" : "false") << '\n'
      << "canny_sigma=" << cfg.postproc.gaussian_sigma << '\n'
      << "canny_low=" << cfg.postproc.low_threshold << '\n'
      << "canny_high=" << cfg.postproc.high_threshold << '\n'
      << "element=" << to_string(cfg.postproc.element) << '\n'
      << "element_radius=" << cfg.postproc.element_radius << '\n';
  if (!cfg.reference.empty()) out << "reference=" << cfg.reference << '\n';
  if (!cfg.data_dir.empty()) out << "data=" << cfg.data_dir << '\n';
  out << "test_splits=";
  for (std::size_t i = 0; i < cfg.test_splits.size(); ++i) out << (i ? "," : "") << cfg.test_splits[i];
  out << '\n';
  return out.str();
}

}  // namespace glandseg
