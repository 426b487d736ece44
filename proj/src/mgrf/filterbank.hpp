#pragma once

#include <string>
#include <vector>

#include "mgrf/features.hpp"

namespace mgrf {

enum class FilterFamily { LoG, GaborCos, GaborSin };

struct LinearFilter {
  FilterFamily family = FilterFamily::LoG;
  double scale = 0.0;        // LoG sigma or Gabor wavelength (pixels)
  double orientation = 0.0;  // radians, Gabor only
  int side = 1;              // odd, <= 17
  std::vector<double> coeffs;  // row-major side x side

  int radius() const { return side / 2; }
  double at(int u, int v) const { return coeffs[static_cast<std::size_t>((v + radius()) * side + u + radius())]; }
  std::string name() const;
};

inline constexpr int kGaborOrientations = 10;
inline constexpr int kFilterBankSize = 64;

// Bank composition (fixed order):
//   0..3   LoG, sigma in {sqrt(2)/2, 1, 1.5, 2}, side 2*ceil(3 sigma)+1
//   4..63  Gabor, wavelength in {2, 4, 6} x 10 orientations k*pi/10 x {cos, sin};
//          sigma = wavelength/2, side 2*ceil(4*wavelength/3)+1 (17 at wavelength 6)
// Every kernel is zero-mean with unit L1 norm.
const std::vector<LinearFilter>& filter_bank();
std::vector<LinearFilter> build_filter_bank();

LinearFilter log_filter(double sigma);
LinearFilter gabor_filter(double wavelength, double orientation, FilterFamily phase);
// Unit impulse, for tests and marginal-equivalence checks.
LinearFilter delta_filter();

// Filter footprint as an offset list: (0,0) first, then the remaining taps
// in row-major order. weights_in_offset_order matches that order.
OffsetList filter_offsets(const LinearFilter& f);
std::vector<double> weights_in_offset_order(const LinearFilter& f);

// Valid-region correlation: one response per position whose footprint lies
// inside the image, row-major over (W-side+1) x (H-side+1).
std::vector<double> filter_responses(const LinearFilter& f, const GreyImage& img);

HistogramStats filter_response_histogram(const LinearFilter& f, const FeatureKind& kind, const GreyImage& img);
std::vector<std::int64_t> filter_response_counts(const FeatureKind& kind, const GreyImage& img);

// Feature descriptor whose quantiser spans the filter's response range on `training`.
FeatureKind make_filter_feature(int filter_index, const GreyImage& training);

std::string describe_filter_bank();

}  // namespace mgrf
