#pragma once

#include <string>
#include <vector>

#include "mgrf/features.hpp"

namespace mgrf {

// One translation-invariant Gibbs factor family. theta holds one parameter
// per feature bin, in nats per clique: the Gibbs energy of an image is
// sum over potentials of theta . (raw clique histogram).
struct Potential {
  FeatureKind kind;
  OffsetList offsets;
  std::vector<double> theta;
  // Smoothed training statistics this potential was fitted to (may be empty
  // for hand-built models).
  HistogramStats target;
  int iteration = 0;  // nesting iteration that introduced the potential

  friend bool operator==(const Potential& a, const Potential& b) {
    return a.kind == b.kind && a.offsets == b.offsets && a.theta == b.theta && a.target.freq == b.target.freq &&
           a.target.clique_count == b.target.clique_count && a.iteration == b.iteration;
  }
};

struct NestedModel {
  int levels = 8;
  std::vector<Potential> potentials;

  friend bool operator==(const NestedModel&, const NestedModel&) = default;
};

// Builds a potential with zero parameters; for FilterHist the offsets are
// the filter footprint.
Potential make_potential(const FeatureKind& kind, OffsetList offsets, int iteration = 0);

void validate_potential(int levels, const Potential& p);

// Returns a copy with p appended; existing parameters are untouched.
NestedModel add_potential(const NestedModel& model, Potential p);

bool has_potential(const NestedModel& model, const FeatureKind& kind, const OffsetList& offsets);

// Marginal (optional) plus nearest-neighbour GLD at (1,0) and (0,1), all theta = 0.
NestedModel base_model(int levels, bool with_marginal);

// Gibbs energy: p(g) is proportional to exp(-energy(g)).
double energy(const NestedModel& model, const GreyImage& img);

// Per-clique average energy: sum of theta . h where h are normalised
// histograms. Independent of lattice size for a homogeneous texture.
double normalized_energy(const NestedModel& model, const GreyImage& img);

// Gibbs conditional of the pixel at (x, y) given all other pixels; entry q
// is proportional to exp(-energy of the cliques containing the site when it
// takes level q).
std::vector<double> local_conditional(const NestedModel& model, const GreyImage& img, int x, int y);

std::vector<HistogramStats> model_histograms(const NestedModel& model, const GreyImage& img);

// Largest |offset component| over all potentials.
int max_clique_radius(const NestedModel& model);

inline constexpr int kModelFormatVersion = 1;
std::string serialize_model(const NestedModel& model);
NestedModel deserialize_model(const std::string& text);
NestedModel load_model(const std::string& path);
void save_model(const NestedModel& model, const std::string& path);

// Human-readable listing with each clique drawn as an ASCII map.
std::string describe_model(const NestedModel& model);

}  // namespace mgrf
