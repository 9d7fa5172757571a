#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "glandseg/dataset.hpp"
#include "glandseg/imaging.hpp"

namespace glandseg {

double pixel_accuracy(const BinaryMask& pred, const BinaryMask& gt);

/// Both masks are replicate-padded to multiples of `w`, reduced to tiles by
/// `majority_label`, and compared tile by tile.
double patch_accuracy(const BinaryMask& pred, const BinaryMask& gt, int w);

struct EvalRow {
  std::string image;
  Grade grade = Grade::Unknown;
  double pixel_accuracy = 0.0;
  double patch_accuracy = 0.0;
  bool postprocessed = false;
};

struct EvalReport {
  std::vector<EvalRow> rows;
  double average_pixel_accuracy = 0.0;
  double average_patch_accuracy = 0.0;
  bool postprocessed = false;

  /// Recomputes the unweighted averages from `rows`.
  void finalize();
  std::string to_csv() const;
  void write_csv(const std::filesystem::path& path) const;
};

/// Per-image mean across several reports over the same images.
EvalReport average_reports(const std::vector<EvalReport>& reports);

}  // namespace glandseg
