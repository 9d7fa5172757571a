#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "glandseg/pipeline.hpp"
#include "glandseg/postproc.hpp"

namespace glandseg {

/// Everything a run needs: the pipeline itself plus post-processing and
/// dataset options. Read from flat `key=value` files.
struct RunConfig {
  PipelineConfig pipeline;
  PostprocParams postproc;
  bool postprocess = true;
  std::string reference;  ///< reference image for normalization; empty = first training image
  std::string data_dir;
  std::vector<std::string> test_splits = {"testA", "testB"};
};

/// Parses `key=value` lines; `#` starts a comment. Unknown keys are errors.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// Applies a single key, as in the file format.
void apply_config_key(RunConfig& cfg, const std::string& key, const std::string& value);

std::string format_config(const RunConfig& cfg);

}  // namespace glandseg
