#include "glandseg/experiment.hpp"

#include <stdexcept>

#include "glandseg/image_io.hpp"
#include "glandseg/log.hpp"
#include "glandseg/postproc.hpp"

namespace glandseg {

EvalResult evaluate_model(const HierarchicalModel& model, const std::vector<DatasetEntry>& entries,
                          const PostprocParams& postproc) {
  EvalResult result;
  result.raw.postprocessed = false;
  result.postprocessed.postprocessed = true;
  const int w = model.config.levels.front().window;
  for (const auto& e : entries) {
    if (!e.annotation_path) continue;
    const ImageRGB img = io::read_rgb(e.image_path);
    const BinaryMask gt = binarize_ground_truth(io::read_labels(*e.annotation_path));
    const BinaryMask raw = predict_image(model, img);
    const BinaryMask post = postprocess(raw, postproc);
    result.raw.rows.push_back({e.name, e.grade, pixel_accuracy(raw, gt), patch_accuracy(raw, gt, w), false});
    result.postprocessed.rows.push_back(
        {e.name, e.grade, pixel_accuracy(post, gt), patch_accuracy(post, gt, w), true});
  }
  result.raw.finalize();
  result.postprocessed.finalize();
  return result;
}

ChannelStats resolve_target_stats(const RunConfig& cfg, const std::vector<TrainingPair>& train) {
  if (!cfg.reference.empty()) return channel_stats(io::read_rgb(cfg.reference));
  if (train.empty()) throw std::invalid_argument("no training data");
  return channel_stats(train.front().image);
}

ExperimentResult run_experiment(const RunConfig& cfg, const std::vector<TrainingPair>& train,
                                const std::vector<DatasetEntry>& test, int rounds) {
  if (rounds < 1) throw std::invalid_argument("rounds must be >= 1");
  const ChannelStats target = resolve_target_stats(cfg, train);
  ExperimentResult out;
  std::vector<EvalReport> raw;
  std::vector<EvalReport> post;
  for (int r = 0; r < rounds; ++r) {
    PipelineConfig p = cfg.pipeline;
    p.train.seed = derive_seed(cfg.pipeline.train.seed, static_cast<std::uint64_t>(r));
    log_info("round " + std::to_string(r + 1) + "/" + std::to_string(rounds));
    const HierarchicalModel model = train_hierarchical(train, p, target);
    out.rounds.push_back(evaluate_model(model, test, cfg.postproc));
    raw.push_back(out.rounds.back().raw);
    post.push_back(out.rounds.back().postprocessed);
  }
  out.average.raw = average_reports(raw);
  out.average.postprocessed = average_reports(post);
  return out;
}

std::vector<ExperimentVariant> standard_sweep(const RunConfig& base) {
  const LevelConfig bins = base.pipeline.levels.front();
  auto variant = [&](std::string name, std::vector<int> windows, std::vector<int> filters, int trees,
                     bool normalize, ClassifierKind classifier) {
    ExperimentVariant v{std::move(name), base};
    v.config.pipeline.levels = PipelineConfig::make_levels(windows, filters, bins);
    v.config.pipeline.train.trees = trees;
    v.config.pipeline.normalize = normalize;
    v.config.pipeline.classifier = classifier;
    return v;
  };
  constexpr auto rf = ClassifierKind::RandomForest;
  return {
      variant("single_40_T100", {40}, {7}, 100, true, rf),
      variant("hier_40_20_10_T100", {40, 20, 10}, {7, 5, 3}, 100, true, rf),
      variant("hier_40_20_10_T10_nonorm", {40, 20, 10}, {7, 5, 3}, 10, false, rf),
      variant("hier_40_20_10_T10", {40, 20, 10}, {7, 5, 3}, 10, true, rf),
      variant("hier_20_10_5_T100", {20, 10, 5}, {7, 5, 3}, 100, true, rf),
      variant("hier_40_20_10_5_T100", {40, 20, 10, 5}, {7, 5, 3, 1}, 100, true, rf),
      variant("hier_21_11_5_T100", {21, 11, 5}, {7, 5, 3}, 100, true, rf),
      variant("hier_21_11_5_knn", {21, 11, 5}, {7, 5, 3}, 100, true, ClassifierKind::Knn),
  };
}

}  // namespace glandseg
