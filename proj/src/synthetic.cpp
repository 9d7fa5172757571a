#include "glandseg/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "glandseg/image_io.hpp"

namespace glandseg::synthetic {

namespace {

// Portable uniform/normal draws; the std distributions are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int integer(int lo, int hi) { return lo + static_cast<int>(uniform() * (hi - lo + 1)); }
  double normal() {
    const double u1 = std::max(uniform(), 1e-300);
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

struct Ellipse {
  double cx, cy, a, b, cos_t, sin_t;

  double radius2(double x, double y) const {
    const double dx = x - cx;
    const double dy = y - cy;
    const double u = (dx * cos_t + dy * sin_t) / a;
    const double v = (-dx * sin_t + dy * cos_t) / b;
    return u * u + v * v;
  }
};

std::uint8_t level(double v) { return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0))); }

}  // namespace

TrainingPair generate(std::uint64_t seed, int width, int height) {
  Rng rng(seed);
  const int count = rng.integer(3, 6);
  std::vector<Ellipse> glands;
  const double scale = std::min(width, height) / 256.0;
  for (int i = 0; i < count; ++i) {
    const double t = rng.uniform(0.0, std::numbers::pi);
    glands.push_back({rng.uniform(0.15, 0.85) * width, rng.uniform(0.15, 0.85) * height,
                      rng.uniform(18.0, 40.0) * scale, rng.uniform(14.0, 30.0) * scale, std::cos(t), std::sin(t)});
  }
  const int cell = rng.integer(3, 5);
  const double phase_x = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double phase_y = rng.uniform(0.0, 2.0 * std::numbers::pi);

  TrainingPair out;
  out.name = "synthetic_" + std::to_string(seed);
  out.image = ImageRGB(width, height);
  out.mask = BinaryMask(width, height, 0);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double r2 = 1e9;
      for (const auto& g : glands) r2 = std::min(r2, g.radius2(x + 0.5, y + 0.5));
      double v = 0.0;
      if (r2 <= 1.0) {
        out.mask(x, y) = 1;
        // Smooth interior shading plus mild noise: about 200 +/- 10.
        v = 200.0 + 6.0 * std::sin(0.05 * x + phase_x) * std::cos(0.05 * y + phase_y) + 3.0 * rng.normal();
        out.image(x, y) = {level(v * 0.97), level(v * 0.90), level(v)};
      } else {
        const bool odd = ((x / cell) + (y / cell)) % 2 == 1;
        v = 90.0 + (odd ? 25.0 : -25.0) + 8.0 * rng.normal();
        out.image(x, y) = {level(v * 1.05), level(v * 0.80), level(v * 0.95)};
      }
    }
  }
  return out;
}

void write_dataset(const std::filesystem::path& dir, const std::string& split, int count, std::uint64_t seed,
                   int width, int height) {
  std::filesystem::create_directories(dir);
  const auto grade_path = dir / "Grade.csv";
  const bool fresh = !std::filesystem::exists(grade_path);
  std::ofstream grades(grade_path, std::ios::app);
  if (fresh) grades << "name,patient ID,grade (GlaS),grade (alternative)\n";
  for (int i = 1; i <= count; ++i) {
    const std::string name = split + "_" + std::to_string(i);
    const TrainingPair pair = generate(derive_seed(seed, static_cast<std::uint64_t>(i)), width, height);
    io::write_rgb_bmp(dir / (name + ".bmp"), pair.image);
    LabelImage labels(width, height);
    for (std::size_t p = 0; p < labels.size(); ++p) labels.data()[p] = pair.mask.data()[p];
    io::write_label_bmp(dir / (name + "_anno.bmp"), labels);
    grades << name << "," << i << "," << (i % 2 ? "benign" : "malignant") << ",n/a\n";
  }
}

}  // namespace glandseg::synthetic
