#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mgrf/learning.hpp"

namespace mgrf {

// Mean SSIM: 11x11 Gaussian window (sigma 1.5), K1 = 0.01, K2 = 0.03,
// dynamic range L = levels - 1 of `a`; averaged over all window positions
// fully inside the images.
double mssim(const GreyImage& a, const GreyImage& b);

// Exhaustive enumeration of every image on a small lattice.
struct ExactStats {
  double log_z = 0.0;
  std::vector<HistogramStats> expected;  // per potential, normalised
  std::vector<double> mean_counts;       // concatenated raw-count expectations
  std::vector<double> covariance;        // of concatenated raw counts, row-major
};

inline constexpr double kMaxEnumerationStates = 1 << 20;

ExactStats exact_expectations(const NestedModel& model, int width, int height);

// log p(img) = -energy(img) - log Z.
double exact_log_likelihood(const NestedModel& model, const GreyImage& img, double log_z);

struct BenchmarkConfig {
  std::vector<SelectorSpec> selectors;
  NestConfig nest;
  int levels = 16;
  int reps = 20;
  int frame = 76;
  int hole = 54;
  int sweeps = 300;
  int smooth_window = 50;
  std::uint64_t seed = 1;
  int threads = 1;
};

struct BenchmarkReport {
  std::string texture;
  int reps = 0;
  double mean = 0.0, sd = 0.0;              // hole, smoothed, ground truth at the model's levels
  double mean_raw256 = 0.0, sd_raw256 = 0.0;  // hole, smoothed, 256-level ground truth
  double mean_frame = 0.0, sd_frame = 0.0;  // whole frame, smoothed
  double mean_unsmoothed = 0.0, sd_unsmoothed = 0.0;
  double train_seconds = 0.0;
  double seconds = 0.0;
  std::vector<double> scores;
};

// Pre-scaling applied to the standard inpainting textures: D6 and D53 to
// 50%, D21 and D77 to 75%, anything else unscaled.
double benchmark_scale(const std::string& texture_id);

// Looks for <dir>/<id>.pgm, .png, .PGM, .PNG.
std::filesystem::path find_texture(const std::filesystem::path& dir, const std::string& texture_id);

// Full protocol on a 256-level image (already scaled): quantise uniformly,
// train on the top half without marginals, inpaint `reps` random frames
// from the bottom half and score them.
BenchmarkReport inpaint_benchmark_image(const std::string& name, const GreyImage& source,
                                        const BenchmarkConfig& cfg);

BenchmarkReport inpaint_benchmark(const std::string& texture_id, const std::filesystem::path& texture_dir,
                                  const BenchmarkConfig& cfg);

std::string benchmark_csv_header();
std::string benchmark_csv_row(const BenchmarkReport& r);
std::string benchmark_table(const std::vector<BenchmarkReport>& reports);

}  // namespace mgrf
