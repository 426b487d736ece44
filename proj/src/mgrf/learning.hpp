#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mgrf/divergence.hpp"
#include "mgrf/sampling.hpp"

namespace mgrf {

struct SelectionMode {
  enum Kind { Plain, MaxMin, SoftMin } kind = MaxMin;
  double alpha = 10.0;  // SoftMin only
};

SelectionMode parse_selection_mode(const std::string& text, double alpha);
std::string to_string(const SelectionMode& mode);

// Soft-min piece weights from per-piece energies (theta . h): pieces the
// model finds least likely (highest energy) get exponentially more weight.
std::vector<double> soft_min_weights(std::span<const double> piece_energies, double alpha);

// Disagreement between the averaged sample histogram and the training data.
//   Plain:   jsd(sample, whole)
//   MaxMin:  min over pieces of jsd(sample, piece)
//   SoftMin: sum_i w_i jsd(sample, piece_i)
double score_feature(const HistogramStats& whole, std::span<const HistogramStats> pieces,
                     const HistogramStats& sample_avg, const SelectionMode& mode, std::span<const double> weights);

// Log-likelihood gradient in per-clique units: -h(obs) + mean h(samples),
// one block per potential, concatenated.
std::vector<double> gradient(std::span<const HistogramStats> observed, std::span<const HistogramStats> sampled);

inline constexpr double kDefaultMaxStep = 2.0;

// Maximiser of the second-order Taylor model of the log-likelihood along the
// gradient: theta + s*grad with s = (grad.grad) / (grad' diag(var) grad).
// The step is scaled down so that no component moves more than max_step.
// A zero gradient returns theta unchanged.
std::vector<double> second_order_step(std::span<const double> theta, std::span<const double> grad,
                                      std::span<const double> variance, double max_step = kDefaultMaxStep);

enum class SelectorFamily { GLD2, CombinedBP5, ConjoinedBP9, JagStarBP9, JagStarBP13, FilterBank };

struct SelectorSpec {
  SelectorFamily family = SelectorFamily::GLD2;
  int iterations = 8;
  int add_count = 3;
};

std::string selector_name(SelectorFamily f);
SelectorSpec default_selector(SelectorFamily f);
// Comma-separated list of name[:iterations[:add_count]], e.g. "gld2:8:3,jagstar9".
std::vector<SelectorSpec> parse_selectors(const std::string& text);

struct Candidate {
  FeatureKind kind;
  OffsetList offsets;
};

struct NestConfig {
  bool use_marginal = true;
  double max_radius = 40.0;
  int piece_size = 80;
  int piece_overlap = 22;
  SelectionMode mode{};
  int csa_runs = 4;
  int csa_sweeps = 50;
  int csa_size = 100;
  StepRule csa_rule = StepRule::RobbinsMonro;
  double smoothing = 0.1;  // pseudo-count per bin on training histograms
  bool second_order = true;
  double max_step = kDefaultMaxStep;
  double variance_floor = 1e-4;
  std::uint64_t seed = 1;
  int threads = 1;
};

struct SelectedFeature {
  Candidate candidate;
  double score = 0.0;
};

struct IterationLog {
  int iteration = 0;
  std::string selector;
  std::size_t candidate_count = 0;
  double max_score = 0.0;
  std::vector<SelectedFeature> selected;
  std::vector<double> potential_jsd;  // per potential, after parameter learning
  double seconds = 0.0;
};

struct NestResult {
  NestedModel model;
  std::vector<IterationLog> log;
  // Max candidate score of each selector re-evaluated after its last iteration.
  std::vector<double> selector_final_max_score;
  std::vector<GreyImage> samples;
};

using IterationCallback = std::function<void(const IterationLog&)>;

// Greedy nesting: base model, then for each selector and each of its
// iterations: score candidates against the current samples, add the best,
// take one second-order step, refine all parameters by parallel CSA runs.
NestResult nest(const GreyImage& training, std::span<const SelectorSpec> selectors, const NestConfig& cfg,
                const IterationCallback& on_iteration = {});

std::string iteration_csv_header();
std::string iteration_csv_row(const IterationLog& it);

}  // namespace mgrf
