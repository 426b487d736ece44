#include "mgrf/sampling.hpp"

#include <algorithm>
#include <cmath>

#include "mgrf/error.hpp"

namespace mgrf {

GreyImage noise_image(int width, int height, int levels, Rng& rng) {
  GreyImage img(width, height, levels);
  for (auto& v : img.pixels()) v = static_cast<std::uint8_t>(rng.below(static_cast<std::uint64_t>(levels)));
  return img;
}

void gibbs_sweep(GibbsState& state, Rng& rng, const SiteMask* mask) { state.sweep(rng, mask); }

StepState StepState::initial(const GibbsState& state) {
  StepState s;
  for (std::size_t p = 0; p < state.potential_count(); ++p) {
    s.lambda.emplace_back(state.theta(p).size(), 1.0);
    s.prev_sign.emplace_back(state.theta(p).size(), 0);
  }
  return s;
}

double robbins_monro_step(int t) { return 15.0 / (15.0 + t); }

void adapt_gains(StepState& steps, std::size_t potential, const std::vector<double>& error) {
  auto& lam = steps.lambda[potential];
  auto& prev = steps.prev_sign[potential];
  for (std::size_t b = 0; b < error.size(); ++b) {
    const signed char sign = error[b] > 0.0 ? 1 : (error[b] < 0.0 ? -1 : 0);
    if (sign * prev[b] > 0)
      lam[b] = std::min(kGainMax, lam[b] * kGainUp);
    else if (sign * prev[b] < 0)
      lam[b] = std::max(kGainMin, lam[b] * kGainDown);
    if (sign != 0) prev[b] = sign;
  }
}

void anneal_update(GibbsState& state, const std::vector<HistogramStats>& targets, StepState& steps, StepRule rule) {
  require(targets.size() == state.potential_count(), "target statistics not aligned with model potentials");
  std::vector<double> error;
  for (std::size_t p = 0; p < state.potential_count(); ++p) {
    const auto& counts = state.counts(p);
    const auto& target = targets[p].freq;
    require(target.size() == counts.size(), "target histogram length mismatch");
    const double n = static_cast<double>(state.clique_count(p));
    error.resize(counts.size());
    for (std::size_t b = 0; b < counts.size(); ++b) error[b] = static_cast<double>(counts[b]) / n - target[b];
    auto& theta = state.theta(p);
    if (rule == StepRule::RobbinsMonro) {
      const double lam = robbins_monro_step(steps.t);
      for (std::size_t b = 0; b < theta.size(); ++b) theta[b] += lam * error[b];
    } else {
      adapt_gains(steps, p, error);
      for (std::size_t b = 0; b < theta.size(); ++b) theta[b] += steps.lambda[p][b] * error[b];
    }
  }
  ++steps.t;
}

AnnealResult anneal(const NestedModel& model, const std::vector<HistogramStats>& targets, const GreyImage& init,
                    int sweeps, StepRule rule, Rng& rng, const SiteMask* mask) {
  require(sweeps >= 1, "sweeps must be at least 1");
  GibbsState state(model, init);
  auto steps = StepState::initial(state);
  for (int s = 0; s < sweeps; ++s) {
    state.sweep(rng, mask);
    anneal_update(state, targets, steps, rule);
  }
  AnnealResult r{state.image(), {}, state.histograms()};
  for (std::size_t p = 0; p < state.potential_count(); ++p) r.theta.push_back(state.theta(p));
  return r;
}

AnnealResult csa_run(const NestedModel& model, const std::vector<HistogramStats>& targets, const GreyImage& init,
                     int sweeps, Rng& rng, const SiteMask* mask) {
  return anneal(model, targets, init, sweeps, StepRule::RobbinsMonro, rng, mask);
}

AnnealResult acsa_run(const NestedModel& model, const std::vector<HistogramStats>& targets, const GreyImage& init,
                      int sweeps, Rng& rng, const SiteMask* mask) {
  return anneal(model, targets, init, sweeps, StepRule::Adaptive, rng, mask);
}

std::vector<HistogramStats> model_targets(const NestedModel& model) {
  std::vector<HistogramStats> t;
  for (const auto& p : model.potentials) t.push_back(p.target);
  return t;
}

int seed_side(const NestedModel& model) { return std::clamp(2 * max_clique_radius(model) + 1, 16, 64); }

GreyImage synthesize(const NestedModel& model, const GreyImage& training, const SynthesisConfig& cfg, Rng& rng) {
  require(cfg.width > 0 && cfg.height > 0 && cfg.sweeps >= 1, "synthesis geometry/sweeps invalid");
  require(training.levels() == model.levels, "training image level count does not match the model");
  const int margin = max_clique_radius(model);
  const int W = cfg.width + 2 * margin, H = cfg.height + 2 * margin;
  GreyImage canvas = noise_image(W, H, model.levels, rng);

  const int side = std::min({seed_side(model), training.width(), training.height(), W, H});
  const int sx = static_cast<int>(rng.below(static_cast<std::uint64_t>(training.width() - side + 1)));
  const int sy = static_cast<int>(rng.below(static_cast<std::uint64_t>(training.height() - side + 1)));
  canvas.paste(training.crop(sx, sy, side, side), (W - side) / 2, (H - side) / 2);

  const auto targets = model_targets(model);
  bool have_targets = !model.potentials.empty();
  for (const auto& t : targets) have_targets = have_targets && !t.freq.empty();

  GreyImage result;
  if (cfg.freeze_theta || !have_targets) {
    GibbsState state(model, canvas);
    for (int s = 0; s < cfg.sweeps; ++s) state.sweep(rng);
    result = state.image();
  } else {
    result = acsa_run(model, targets, canvas, cfg.sweeps, rng).image;
  }
  return result.crop(margin, margin, cfg.width, cfg.height);
}

Rect centered_hole(int frame_width, int frame_height, int hole_width, int hole_height) {
  if (hole_width <= 0 || hole_height <= 0 || hole_width > frame_width || hole_height > frame_height)
    fail(ErrorKind::InvalidArgument, "hole exceeds frame");
  return {(frame_width - hole_width) / 2, (frame_height - hole_height) / 2, hole_width, hole_height};
}

InpaintResult inpaint(const NestedModel& model, const GreyImage& frame, const Rect& hole, int sweeps,
                      int smooth_window, Rng& rng) {
  if (hole.x < 0 || hole.y < 0 || hole.w <= 0 || hole.h <= 0 || hole.x + hole.w > frame.width() ||
      hole.y + hole.h > frame.height())
    fail(ErrorKind::InvalidArgument, "hole mask not contained in frame");
  require(sweeps >= 1, "sweeps must be at least 1");
  require(smooth_window >= 1 && smooth_window <= sweeps, "smoothing window must be in [1, sweeps]");

  GreyImage init = frame;
  SiteMask mask(frame.size(), 1);
  for (int y = hole.y; y < hole.y + hole.h; ++y)
    for (int x = hole.x; x < hole.x + hole.w; ++x) {
      init.at(x, y) = static_cast<std::uint8_t>(rng.below(static_cast<std::uint64_t>(frame.levels())));
      mask[frame.index(x, y)] = 0;
    }
  GibbsState state(model, init);
  std::vector<double> sum(frame.size(), 0.0);
  for (int s = 0; s < sweeps; ++s) {
    state.sweep(rng, &mask);
    if (s >= sweeps - smooth_window) {
      const auto px = state.image().pixels();
      for (std::size_t i = 0; i < px.size(); ++i) sum[i] += px[i];
    }
  }
  InpaintResult out{state.image(), state.image()};
  for (std::size_t i = 0; i < sum.size(); ++i)
    out.smoothed.pixels()[i] = static_cast<std::uint8_t>(std::lround(sum[i] / smooth_window));
  return out;
}

}  // namespace mgrf
