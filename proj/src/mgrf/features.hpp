#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mgrf/image.hpp"

namespace mgrf {

struct Offset {
  int dx = 0;
  int dy = 0;
  Offset operator-() const { return {-dx, -dy}; }
  friend auto operator<=>(const Offset&, const Offset&) = default;
};

// First entry is always (0,0): the clique anchor.
using OffsetList = std::vector<Offset>;

enum class FeatureTag { Marginal, GLC, GLD, BP, BE, FilterHist };

const char* tag_name(FeatureTag tag);
FeatureTag parse_tag(const std::string& name);

// Descriptor of a feature function: which formula, its order d and bin count s.
struct FeatureKind {
  FeatureTag tag = FeatureTag::Marginal;
  int order = 1;
  int bins = 2;
  int levels = 2;
  int be_threshold = 0;  // BE only
  // FilterHist only: bank index and the frozen response quantiser.
  int filter_index = -1;
  double quant_lo = 0.0;
  double quant_hi = 0.0;

  static FeatureKind marginal(int levels);
  static FeatureKind glc(int levels, int order);
  static FeatureKind gld(int levels);
  static FeatureKind bp(int levels, int order);
  static FeatureKind be(int levels, int order, int threshold);
  // 16 equal-width bins over [lo, hi] plus an underflow and an overflow bin.
  static FeatureKind filter_hist(int levels, int filter_index, double lo, double hi);

  friend bool operator==(const FeatureKind&, const FeatureKind&) = default;
};

inline constexpr int kFilterInnerBins = 16;

int default_be_threshold(int levels);

// Bin index in [0, s) of the clique values (x0 is the anchor pixel). Not
// defined for FilterHist, whose value is a linear response.
int eval_feature(const FeatureKind& kind, std::span<const int> values);

int quantize_response(const FeatureKind& kind, double response);

struct HistogramStats {
  std::vector<double> freq;
  std::int64_t clique_count = 0;
};

// Bounding box of an offset list; anchors must lie in
// [-min_dx, W-1-max_dx] x [-min_dy, H-1-max_dy] for the clique to fit.
struct CliqueExtent {
  int min_dx = 0, max_dx = 0, min_dy = 0, max_dy = 0;

  static CliqueExtent of(std::span<const Offset> offsets);
  int anchors_x(int width) const { return width - (max_dx - min_dx); }
  int anchors_y(int height) const { return height - (max_dy - min_dy); }
  std::int64_t clique_count(int width, int height) const;
  int radius() const;  // max |component|
};

// Raw (unnormalised) histogram counts over every clique fully inside the lattice.
std::vector<std::int64_t> count_histogram(const FeatureKind& kind, std::span<const Offset> offsets,
                                          const GreyImage& img);

HistogramStats collect_histogram(const FeatureKind& kind, std::span<const Offset> offsets, const GreyImage& img);

HistogramStats normalize_counts(std::span<const std::int64_t> counts);

// Adds `pseudo_count` per bin before normalising (keeps maximum-likelihood
// parameters finite). clique_count is preserved.
HistogramStats smooth_histogram(const HistogramStats& h, double pseudo_count);

std::string format_offsets(std::span<const Offset> offsets);
OffsetList parse_offsets(const std::string& text);

// ---------------------------------------------------------------------------
// Clique geometries used by the selectors.

// Half-plane representatives r (dy > 0, or dy == 0 and dx > 0) with |r| <= radius.
std::vector<Offset> half_plane_offsets(double radius);

OffsetList jag_star_offsets(int k, double d0, double d1, double phi);

// Documented enumeration grid: integer radii d0, d1 in [1, 20] (all ordered
// pairs) and kJagStarPhiSteps rotations evenly spaced over one angular step
// 2*pi/(k-1). Offset lists equal as multisets are emitted once.
inline constexpr int kJagStarMaxRadius = 20;
inline constexpr int kJagStarPhiSteps = 6;
std::vector<OffsetList> enumerate_jagstar_candidates(int k);

// Integer halving, rounding toward zero per component.
Offset halve(Offset r);

// Canonical half-plane representative of {r, -r}.
Offset canonical_sign(Offset r);

std::vector<OffsetList> combined_bp5_candidates(std::span<const Offset> selected);

// Characteristic offsets of an existing potential: the canonical
// representatives of its non-anchor offsets.
std::vector<Offset> characteristic_offsets(std::span<const Offset> offsets);

// Picks the four best symmetric BP^3 candidates {0, r, -r} by score
// (ties: lexicographically smaller r first) and conjoins them into
// {0, r1, -r1, ..., r4, -r4}.
OffsetList conjoin_bp9_by_score(std::span<const Offset> rs, std::span<const double> scores);
OffsetList conjoin_bp9(std::span<const Offset> rs, std::span<const HistogramStats> training,
                       std::span<const HistogramStats> samples);

}  // namespace mgrf
