#include "glandseg/metrics.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>

namespace glandseg {

namespace {

void check_same_size(const BinaryMask& a, const BinaryMask& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw std::invalid_argument("mask dimensions differ");
  }
  if (a.empty()) throw std::invalid_argument("empty input");
}

std::string fmt(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc() ? std::string(buf, end) : std::string("nan");
}

}  // namespace

double pixel_accuracy(const BinaryMask& pred, const BinaryMask& gt) {
  check_same_size(pred, gt);
  std::size_t same = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) same += (pred.data()[i] != 0) == (gt.data()[i] != 0);
  return static_cast<double>(same) / static_cast<double>(pred.size());
}

double patch_accuracy(const BinaryMask& pred, const BinaryMask& gt, int w) {
  check_same_size(pred, gt);
  const BinaryMask p = pad_replicate(pred, w);
  const BinaryMask g = pad_replicate(gt, w);
  const auto tiles = patch_grid(p.width(), p.height(), w);
  std::size_t same = 0;
  for (const PatchRef& t : tiles) same += majority_label(p, t) == majority_label(g, t);
  return static_cast<double>(same) / static_cast<double>(tiles.size());
}

void EvalReport::finalize() {
  average_pixel_accuracy = 0.0;
  average_patch_accuracy = 0.0;
  if (rows.empty()) return;
  for (const auto& r : rows) {
    average_pixel_accuracy += r.pixel_accuracy;
    average_patch_accuracy += r.patch_accuracy;
  }
  average_pixel_accuracy /= static_cast<double>(rows.size());
  average_patch_accuracy /= static_cast<double>(rows.size());
}

std::string EvalReport::to_csv() const {
  std::string out = "image,grade,pixel_accuracy,patch_accuracy,postprocessed\n";
  for (const auto& r : rows) {
    out += r.image + ',' + std::string(to_string(r.grade)) + ',' + fmt(r.pixel_accuracy) + ',' +
           fmt(r.patch_accuracy) + ',' + (r.postprocessed ? "true" : "false") + '\n';
  }
  out += "Average,," + fmt(average_pixel_accuracy) + ',' + fmt(average_patch_accuracy) + ',' +
         (postprocessed ? "true" : "false") + '\n';
  return out;
}

void EvalReport::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out << to_csv();
}

EvalReport average_reports(const std::vector<EvalReport>& reports) {
  EvalReport avg;
  if (reports.empty()) return avg;
  avg.postprocessed = reports.front().postprocessed;
  avg.rows = reports.front().rows;
  for (std::size_t i = 0; i < avg.rows.size(); ++i) {
    double px = 0.0;
    double pt = 0.0;
    for (const auto& r : reports) {
      if (r.rows.size() != avg.rows.size() || r.rows[i].image != avg.rows[i].image) {
        throw std::invalid_argument("reports cover different images");
      }
      px += r.rows[i].pixel_accuracy;
      pt += r.rows[i].patch_accuracy;
    }
    avg.rows[i].pixel_accuracy = px / static_cast<double>(reports.size());
    avg.rows[i].patch_accuracy = pt / static_cast<double>(reports.size());
  }
  avg.finalize();
  return avg;
}

}  // namespace glandseg
