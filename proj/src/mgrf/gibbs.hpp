#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mgrf/model.hpp"
#include "mgrf/rng.hpp"

namespace mgrf {

// Frozen-site mask: nonzero entries are never resampled.
using SiteMask = std::vector<std::uint8_t>;

// An image under a model, with the raw histogram of every potential kept
// current through single-pixel edits. Parameters are a private copy so that
// stochastic-approximation runs can adapt them.
class GibbsState {
 public:
  GibbsState(const NestedModel& model, GreyImage img);

  const GreyImage& image() const { return img_; }
  int levels() const { return levels_; }
  std::size_t potential_count() const { return families_.size(); }

  std::vector<double>& theta(std::size_t p) { return thetas_[p]; }
  const std::vector<double>& theta(std::size_t p) const { return thetas_[p]; }
  const std::vector<std::int64_t>& counts(std::size_t p) const { return counts_[p]; }
  std::int64_t clique_count(std::size_t p) const { return clique_counts_[p]; }
  HistogramStats histogram(std::size_t p) const;
  std::vector<HistogramStats> histograms() const;

  // Gibbs energy from the maintained counts.
  double energy() const;

  // out[q] = energy of every clique containing (x, y) with the site set to q.
  void local_energies(int x, int y, std::span<double> out);
  void conditional(int x, int y, std::span<double> prob);

  void set_pixel(int x, int y, int value);

  // Visits every unfrozen site once in raster order, drawing from the local
  // conditional.
  void sweep(Rng& rng, const SiteMask* mask = nullptr);

  // Replaces the image (same size and levels) and recomputes all statistics.
  void reset_image(const GreyImage& img);
  // Recomputes counts and filter responses from scratch.
  void refresh();

 private:
  struct Family {
    FeatureKind kind;
    CliqueExtent ext;
    std::vector<std::ptrdiff_t> rel;         // offset -> linear index delta
    std::vector<Offset> offsets;
    std::vector<int> first_positions;        // positions whose offset is seen first
    std::vector<std::vector<int>> same;      // positions sharing that offset
    bool filter = false;
    std::vector<double> weights;             // filter taps in offset order
    int radius = 0;
    int resp_w = 0, resp_h = 0;
  };
  struct CachedClique {
    int family;
    std::ptrdiff_t response_index;  // filter families only
    double weight;
  };

  void apply_cached(int x, int y, int old_value, int new_value);
  void compute_responses(std::size_t p);

  GreyImage img_;
  int levels_;
  std::vector<Family> families_;
  std::vector<std::vector<double>> thetas_;
  std::vector<std::vector<std::int64_t>> counts_;
  std::vector<std::int64_t> clique_counts_;
  std::vector<std::vector<double>> responses_;
  // Bins of the cliques around the last site passed to local_energies.
  std::vector<int> bin_cache_;
  std::vector<CachedClique> clique_cache_;
  std::vector<int> scratch_;
  std::vector<double> energies_;
};

}  // namespace mgrf
