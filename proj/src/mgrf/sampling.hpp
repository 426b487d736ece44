#pragma once

#include <vector>

#include "mgrf/gibbs.hpp"

namespace mgrf {

GreyImage noise_image(int width, int height, int levels, Rng& rng);

// Visits each unmasked site once in raster order.
void gibbs_sweep(GibbsState& state, Rng& rng, const SiteMask* mask = nullptr);

enum class StepRule { RobbinsMonro, Adaptive };

// Adaptive-gain constants: a gain is multiplied by kGainUp while successive
// error components agree in sign and by kGainDown when they disagree, then
// clamped to [kGainMin, kGainMax].
inline constexpr double kGainUp = 1.02;
inline constexpr double kGainDown = 1.0 / 1.02;
inline constexpr double kGainMin = 1e-4;
inline constexpr double kGainMax = 1e2;

// Per-parameter step sizes for one annealing run.
struct StepState {
  int t = 0;
  std::vector<std::vector<double>> lambda;
  std::vector<std::vector<signed char>> prev_sign;

  static StepState initial(const GibbsState& state);
};

// lambda_t = 15 / (15 + t)
double robbins_monro_step(int t);

// Updates gains from the error vector (sample - target) using the sign memory.
void adapt_gains(StepState& steps, std::size_t potential, const std::vector<double>& error);

// One parameter update: theta += lambda o (h(sample) - target).
void anneal_update(GibbsState& state, const std::vector<HistogramStats>& targets, StepState& steps, StepRule rule);

struct AnnealResult {
  GreyImage image;
  std::vector<std::vector<double>> theta;
  std::vector<HistogramStats> stats;  // normalised histograms of the final image
};

// Controllable simulated annealing: `sweeps` rounds of one Gibbs sweep
// followed by one parameter update.
AnnealResult anneal(const NestedModel& model, const std::vector<HistogramStats>& targets, const GreyImage& init,
                    int sweeps, StepRule rule, Rng& rng, const SiteMask* mask = nullptr);

AnnealResult csa_run(const NestedModel& model, const std::vector<HistogramStats>& targets, const GreyImage& init,
                     int sweeps, Rng& rng, const SiteMask* mask = nullptr);
AnnealResult acsa_run(const NestedModel& model, const std::vector<HistogramStats>& targets, const GreyImage& init,
                      int sweeps, Rng& rng, const SiteMask* mask = nullptr);

std::vector<HistogramStats> model_targets(const NestedModel& model);

struct SynthesisConfig {
  int width = 180;
  int height = 180;
  int sweeps = 300;
  bool freeze_theta = false;  // plain Gibbs instead of ACSA
};

// Seed side used when planting a training piece: 2*radius+1 clamped to [16, 64].
int seed_side(const NestedModel& model);

// Samples a width x height image: a noise canvas with margins equal to the
// largest clique radius, a random training piece planted at its centre,
// `sweeps` sweeps of ACSA (or Gibbs with frozen theta), margins trimmed.
GreyImage synthesize(const NestedModel& model, const GreyImage& training, const SynthesisConfig& cfg, Rng& rng);

struct Rect {
  int x = 0, y = 0, w = 0, h = 0;
};

Rect centered_hole(int frame_width, int frame_height, int hole_width, int hole_height);

struct InpaintResult {
  GreyImage raw;       // last Gibbs sample
  GreyImage smoothed;  // per-pixel mean of the last `window` samples, rounded
};

// Fills `hole` with Gibbs sampling (theta frozen); pixels outside the hole
// never change.
InpaintResult inpaint(const NestedModel& model, const GreyImage& frame, const Rect& hole, int sweeps,
                      int smooth_window, Rng& rng);

}  // namespace mgrf
