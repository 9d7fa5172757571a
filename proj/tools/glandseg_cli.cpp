// Command-line front end: train, predict, evaluate, experiment, features, synth.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "glandseg/config.hpp"
#include "glandseg/dataset.hpp"
#include "glandseg/experiment.hpp"
#include "glandseg/image_io.hpp"
#include "glandseg/model_io.hpp"
#include "glandseg/postproc.hpp"
#include "glandseg/synthetic.hpp"

namespace fs = std::filesystem;
using namespace glandseg;

namespace {

RunConfig config_or_default(const std::string& path) { return path.empty() ? RunConfig{} : load_config(path); }

int cmd_train(const std::string& data, const std::string& config, const std::string& out,
              std::optional<std::uint64_t> seed, bool no_normalize, const std::string& reference) {
  RunConfig cfg = config_or_default(config);
  if (seed) cfg.pipeline.train.seed = *seed;
  if (no_normalize) cfg.pipeline.normalize = false;
  if (!reference.empty()) cfg.reference = reference;

  const auto entries = load_glas_dataset(data, "train");
  const auto pairs = load_training_pairs(entries);
  if (pairs.empty()) throw std::runtime_error(data + ": no annotated training images found");
  std::cerr << "training on " << pairs.size() << " images\n";
  const HierarchicalModel model = train_hierarchical(pairs, cfg.pipeline, resolve_target_stats(cfg, pairs));
  save_model(model, out);
  std::cerr << "model written to " << out << '\n';
  return 0;
}

int cmd_predict(const std::string& model_path, const std::string& in, const std::string& out,
                bool no_postprocess, const std::string& mode, const std::string& config) {
  const HierarchicalModel model = load_model(model_path);
  const RunConfig cfg = config_or_default(config);
  std::optional<PredictionMode> m;
  if (!mode.empty()) m = prediction_mode_from_string(mode);

  std::vector<fs::path> inputs;
  if (fs::is_directory(in)) {
    for (const auto& e : fs::directory_iterator(in)) {
      const auto stem = e.path().stem().string();
      const auto ext = e.path().extension().string();
      if (!e.is_regular_file() || (ext != ".bmp" && ext != ".png")) continue;
      if (stem.size() > 5 && stem.ends_with("_anno")) continue;
      inputs.push_back(e.path());
    }
    std::sort(inputs.begin(), inputs.end());
  } else {
    inputs.push_back(in);
  }

  fs::create_directories(out);
  const bool post = cfg.postprocess && !no_postprocess;
  for (const auto& p : inputs) {
    BinaryMask mask = predict_image(model, io::read_rgb(p), m);
    if (post) mask = postprocess(mask, cfg.postproc);
    const fs::path dst = fs::path(out) / (p.stem().string() + ".png");
    io::write_mask_png(dst, mask);
    std::cout << dst.string() << '\n';
  }
  return 0;
}

int cmd_evaluate(const std::string& model_path, const std::string& data, const std::string& split,
                 const std::string& report, bool no_postprocess, const std::string& config) {
  const HierarchicalModel model = load_model(model_path);
  const RunConfig cfg = config_or_default(config);
  const auto entries = load_glas_dataset(data, split);
  const EvalResult r = evaluate_model(model, entries, cfg.postproc);
  const bool post = cfg.postprocess && !no_postprocess;
  const EvalReport& headline = post ? r.postprocessed : r.raw;
  headline.write_csv(report);
  if (post) {
    const fs::path rp(report);
    r.raw.write_csv(rp.parent_path() / (rp.stem().string() + "_raw" + rp.extension().string()));
  }
  std::cout << "images: " << headline.rows.size() << "\n"
            << "average pixel accuracy: " << headline.average_pixel_accuracy << "\n"
            << "average patch accuracy: " << headline.average_patch_accuracy << "\n";
  return 0;
}

void write_experiment(const fs::path& dir, const std::string& name, const ExperimentResult& r) {
  for (std::size_t i = 0; i < r.rounds.size(); ++i) {
    const std::string round = name + "_round" + std::to_string(i + 1);
    r.rounds[i].raw.write_csv(dir / (round + "_raw.csv"));
    r.rounds[i].postprocessed.write_csv(dir / (round + "_post.csv"));
  }
  r.average.raw.write_csv(dir / (name + "_average_raw.csv"));
  r.average.postprocessed.write_csv(dir / (name + "_average_post.csv"));
}

int cmd_experiment(const std::string& config, int rounds, const std::string& report_dir, const std::string& data,
                   bool sweep, std::optional<std::uint64_t> seed) {
  RunConfig cfg = config_or_default(config);
  if (!data.empty()) cfg.data_dir = data;
  if (seed) cfg.pipeline.train.seed = *seed;
  if (cfg.data_dir.empty()) throw std::runtime_error("no dataset: pass --data or set data= in the config");

  const auto train = load_training_pairs(load_glas_dataset(cfg.data_dir, "train"));
  if (train.empty()) throw std::runtime_error(cfg.data_dir + ": no annotated training images found");
  std::vector<DatasetEntry> test;
  for (const auto& split : cfg.test_splits) {
    const auto e = load_glas_dataset(cfg.data_dir, split);
    test.insert(test.end(), e.begin(), e.end());
  }

  fs::create_directories(report_dir);
  std::vector<ExperimentVariant> variants;
  if (sweep) {
    variants = standard_sweep(cfg);
  } else {
    variants.push_back({"experiment", cfg});
  }

  std::ofstream summary(fs::path(report_dir) / "summary.csv");
  summary << "variant,rounds,avg_pixel_raw,avg_patch_raw,avg_pixel_post,avg_patch_post\n";
  for (const auto& v : variants) {
    std::cerr << "variant " << v.name << '\n';
    const ExperimentResult r = run_experiment(v.config, train, test, rounds);
    write_experiment(report_dir, v.name, r);
    summary << v.name << ',' << rounds << ',' << r.average.raw.average_pixel_accuracy << ','
            << r.average.raw.average_patch_accuracy << ',' << r.average.postprocessed.average_pixel_accuracy << ','
            << r.average.postprocessed.average_patch_accuracy << '\n';
    std::cout << v.name << ": pixel " << r.average.raw.average_pixel_accuracy << " (raw) "
              << r.average.postprocessed.average_pixel_accuracy << " (post)\n";
  }
  return 0;
}

int cmd_features(const std::string& in, const std::string& config, const std::string& out, int level) {
  const RunConfig cfg = config_or_default(config);
  if (level < 0 || level >= static_cast<int>(cfg.pipeline.levels.size())) {
    throw std::runtime_error("level index out of range");
  }
  const LevelConfig& lc = cfg.pipeline.levels[static_cast<std::size_t>(level)];
  const ImageRGB img = pad_replicate(io::read_rgb(in), lc.window);

  std::ofstream csv(out);
  if (!csv) throw std::runtime_error(out + ": cannot open for writing");
  csv << "x0,y0,w";
  for (const char* ch : {"r", "g", "b"}) {
    for (int i = 0; i < lc.bins1d; ++i) csv << ",hist_" << ch << '_' << i;
  }
  for (const char* ch : {"r", "g", "b"}) {
    for (int i = 0; i < lc.bins2d; ++i) {
      for (int j = 0; j < lc.bins2d; ++j) csv << ",hist2d_" << ch << '_' << i << '_' << j;
    }
  }
  for (const char* ch : {"r", "g", "b"}) {
    for (int i = 1; i <= kHaralickCount; ++i) csv << ",haralick_" << ch << '_' << i;
  }
  csv << '\n';
  csv.precision(17);
  for (const PatchRef& p : patch_grid(img.width(), img.height(), lc.window)) {
    csv << p.x0 << ',' << p.y0 << ',' << p.w;
    for (double v : assemble_features(img, p, lc)) csv << ',' << v;
    csv << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gland segmentation of colon histology images with a hierarchical random forest"};
  app.require_subcommand(1);

  std::string data, config, out, model, in, split, report, mode, reference, report_dir;
  std::optional<std::uint64_t> seed;
  bool no_normalize = false, no_postprocess = false, sweep = false;
  int rounds = 1, level = 0, count = 10, size = 256;

  auto* train = app.add_subcommand("train", "Train a model on the train split of a GlaS-layout directory");
  train->add_option("--data", data, "Dataset directory")->required();
  train->add_option("--config", config, "key=value configuration file");
  train->add_option("--out", out, "Output model file")->required();
  train->add_option("--seed", seed, "Master seed");
  train->add_flag("--no-normalize", no_normalize, "Disable Reinhard normalization");
  train->add_option("--reference", reference, "Reference image for normalization");

  auto* predict = app.add_subcommand("predict", "Predict gland masks");
  predict->add_option("--model", model)->required();
  predict->add_option("--in", in, "Image or directory")->required();
  predict->add_option("--out", out, "Output directory")->required();
  predict->add_flag("--no-postprocess", no_postprocess);
  predict->add_option("--mode", mode, "fine | coarse-majority")->check(CLI::IsMember({"fine", "coarse-majority"}));
  predict->add_option("--config", config, "Configuration file (post-processing parameters)");

  auto* evaluate = app.add_subcommand("evaluate", "Score a model on a labeled split");
  evaluate->add_option("--model", model)->required();
  evaluate->add_option("--data", data)->required();
  evaluate->add_option("--split", split)->required()->check(CLI::IsMember({"train", "testA", "testB"}));
  evaluate->add_option("--report", report, "Report CSV")->required();
  evaluate->add_flag("--no-postprocess", no_postprocess);
  evaluate->add_option("--config", config);

  auto* experiment = app.add_subcommand("experiment", "Repeated train/test rounds, optionally over the comparison matrix");
  experiment->add_option("--config", config);
  experiment->add_option("--rounds", rounds)->check(CLI::PositiveNumber);
  experiment->add_option("--report-dir", report_dir)->required();
  experiment->add_option("--data", data, "Dataset directory (overrides data= in the config)");
  experiment->add_option("--seed", seed);
  experiment->add_flag("--sweep", sweep, "Run every standard variant instead of the configured one");

  auto* features = app.add_subcommand("features", "Dump per-patch feature vectors as CSV");
  features->add_option("--in", in)->required();
  features->add_option("--config", config);
  features->add_option("--out", out)->required();
  features->add_option("--level", level, "Cascade level whose window and binning to use");

  auto* synth = app.add_subcommand("synth", "Write a synthetic dataset in the GlaS layout");
  synth->add_option("--out", out)->required();
  synth->add_option("--split", split, "Split name")->check(CLI::IsMember({"train", "testA", "testB"}));
  synth->add_option("--count", count)->check(CLI::PositiveNumber);
  synth->add_option("--size", size)->check(CLI::PositiveNumber);
  synth->add_option("--seed", seed);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) return cmd_train(data, config, out, seed, no_normalize, reference);
    if (*predict) return cmd_predict(model, in, out, no_postprocess, mode, config);
    if (*evaluate) return cmd_evaluate(model, data, split, report, no_postprocess, config);
    if (*experiment) return cmd_experiment(config, rounds, report_dir, data, sweep, seed);
    if (*features) return cmd_features(in, config, out, level);
    if (*synth) {
      synthetic::write_dataset(out, split.empty() ? "train" : split, count, seed.value_or(1), size, size);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
