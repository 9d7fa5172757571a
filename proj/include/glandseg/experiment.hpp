#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "glandseg/config.hpp"
#include "glandseg/dataset.hpp"
#include "glandseg/metrics.hpp"
#include "glandseg/pipeline.hpp"

namespace glandseg {

struct EvalResult {
  EvalReport raw;
  EvalReport postprocessed;
};

/// Predicts every annotated entry and scores raw and post-processed masks.
EvalResult evaluate_model(const HierarchicalModel& model, const std::vector<DatasetEntry>& entries,
                          const PostprocParams& postproc);

/// Normalization target implied by the run configuration.
ChannelStats resolve_target_stats(const RunConfig& cfg, const std::vector<TrainingPair>& train);

struct ExperimentResult {
  std::vector<EvalResult> rounds;
  EvalResult average;
};

/// Trains `rounds` models, round r seeded with derive_seed(cfg seed, r), and
/// evaluates each on `test`.
ExperimentResult run_experiment(const RunConfig& cfg, const std::vector<TrainingPair>& train,
                                const std::vector<DatasetEntry>& test, int rounds);

/// A named configuration of the comparison matrix (single vs hierarchical,
/// normalization, tree count, window sets, classifier).
struct ExperimentVariant {
  std::string name;
  RunConfig config;
};

std::vector<ExperimentVariant> standard_sweep(const RunConfig& base);

}  // namespace glandseg
