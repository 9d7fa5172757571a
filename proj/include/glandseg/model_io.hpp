#pragma once

#include <filesystem>
#include <string>

#include "glandseg/pipeline.hpp"

namespace glandseg {

/// Versioned JSON document; see README for the schema.
std::string serialize_model(const HierarchicalModel& model);
/// Validates the version first, then every invariant. Throws on any defect.
HierarchicalModel deserialize_model(const std::string& text);

std::string serialize_forest(const RandomForest& forest);

void save_model(const HierarchicalModel& model, const std::filesystem::path& path);
HierarchicalModel load_model(const std::filesystem::path& path);

}  // namespace glandseg
