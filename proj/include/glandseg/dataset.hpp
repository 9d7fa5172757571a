#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "glandseg/pipeline.hpp"

namespace glandseg {

enum class Grade { Benign, Malignant, Unknown };

std::string_view to_string(Grade g);

struct DatasetEntry {
  std::string name;  ///< e.g. "testA_12"
  std::filesystem::path image_path;
  std::optional<std::filesystem::path> annotation_path;
  Grade grade = Grade::Unknown;
};

/// Entries named `<split>_<n>` with annotations `<split>_<n>_anno`, in
/// lexicographic name order. Grades come from a `*grade*.csv` file in `root`
/// when one exists.
std::vector<DatasetEntry> load_glas_dataset(const std::filesystem::path& root, const std::string& split);

/// Reads and binarizes every annotated entry; entries without annotation are skipped.
std::vector<TrainingPair> load_training_pairs(const std::vector<DatasetEntry>& entries);

}  // namespace glandseg
