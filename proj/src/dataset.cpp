#include "glandseg/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "glandseg/image_io.hpp"
#include "glandseg/log.hpp"

namespace glandseg {

std::string_view to_string(Grade g) {
  switch (g) {
    case Grade::Benign:
      return "benign";
    case Grade::Malignant:
      return "malignant";
    case Grade::Unknown:
      return "unknown";
  }
  return "unknown";
}

namespace {

namespace fs = std::filesystem;

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n\"");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n\"");
  return s.substr(b, e - b + 1);
}

bool is_image_ext(const fs::path& p) {
  const auto ext = lower(p.extension().string());
  return ext == ".bmp" || ext == ".png";
}

// "<split>_<digits>" exactly.
bool is_entry_stem(const std::string& stem, const std::string& split) {
  const std::string prefix = split + "_";
  if (stem.size() <= prefix.size() || stem.compare(0, prefix.size(), prefix) != 0) return false;
  return std::all_of(stem.begin() + static_cast<std::ptrdiff_t>(prefix.size()), stem.end(),
                     [](unsigned char c) { return std::isdigit(c); });
}

std::map<std::string, Grade> read_grades(const fs::path& root) {
  std::map<std::string, Grade> grades;
  for (const auto& e : fs::directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    const std::string name = lower(e.path().filename().string());
    if (lower(e.path().extension().string()) != ".csv" || name.find("grade") == std::string::npos) continue;

    std::ifstream in(e.path());
    if (!in) throw std::runtime_error(e.path().string() + ": cannot open grade file");
    std::string line;
    if (!std::getline(in, line)) break;
    std::vector<std::string> header;
    {
      std::stringstream ss(line);
      std::string cell;
      while (std::getline(ss, cell, ',')) header.push_back(lower(trim(cell)));
    }
    // Prefer the "grade (GlaS)" column, else the first column mentioning grade.
    std::size_t col = header.size();
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i].find("grade") != std::string::npos && header[i].find("glas") != std::string::npos) {
        col = i;
        break;
      }
    }
    for (std::size_t i = 0; col == header.size() && i < header.size(); ++i) {
      if (header[i].find("grade") != std::string::npos) col = i;
    }
    if (col == header.size()) break;
    while (std::getline(in, line)) {
      std::vector<std::string> cells;
      std::stringstream ss(line);
      std::string cell;
      while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
      if (cells.size() <= col || cells.empty()) continue;
      const std::string g = lower(cells[col]);
      grades[cells[0]] = g == "benign" ? Grade::Benign : g == "malignant" ? Grade::Malignant : Grade::Unknown;
    }
    break;
  }
  return grades;
}

}  // namespace

std::vector<DatasetEntry> load_glas_dataset(const fs::path& root, const std::string& split) {
  if (!fs::is_directory(root)) throw std::runtime_error(root.string() + ": not a directory");

  std::map<std::string, fs::path> images;
  std::map<std::string, fs::path> annotations;
  for (const auto& e : fs::directory_iterator(root)) {
    if (!e.is_regular_file() || !is_image_ext(e.path())) continue;
    const std::string stem = e.path().stem().string();
    constexpr std::string_view kAnno = "_anno";
    if (stem.size() > kAnno.size() && stem.compare(stem.size() - kAnno.size(), kAnno.size(), kAnno) == 0) {
      const std::string base = stem.substr(0, stem.size() - kAnno.size());
      if (is_entry_stem(base, split)) annotations[base] = e.path();
    } else if (is_entry_stem(stem, split)) {
      images[stem] = e.path();
    }
  }

  const auto grades = read_grades(root);
  std::vector<DatasetEntry> out;
  for (const auto& [name, path] : images) {  // std::map iterates in lexicographic order
    DatasetEntry entry;
    entry.name = name;
    entry.image_path = path;
    if (auto it = grades.find(name); it != grades.end()) entry.grade = it->second;
    if (auto it = annotations.find(name); it != annotations.end()) {
      if (io::read_dimensions(path) != io::read_dimensions(it->second)) {
        throw std::runtime_error(it->second.string() + ": annotation size differs from " + path.string());
      }
      entry.annotation_path = it->second;
    } else {
      log_warning("no annotation for " + path.string());
    }
    out.push_back(std::move(entry));
  }
  return out;
}

std::vector<TrainingPair> load_training_pairs(const std::vector<DatasetEntry>& entries) {
  std::vector<TrainingPair> out;
  for (const auto& e : entries) {
    if (!e.annotation_path) continue;
    out.push_back({e.name, io::read_rgb(e.image_path), binarize_ground_truth(io::read_labels(*e.annotation_path))});
  }
  return out;
}

}  // namespace glandseg
