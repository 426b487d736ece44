#include "mgrf/filterbank.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "mgrf/error.hpp"

namespace mgrf {

namespace {

void normalize_kernel(LinearFilter& f) {
  double mean = 0.0;
  for (double c : f.coeffs) mean += c;
  mean /= static_cast<double>(f.coeffs.size());
  double l1 = 0.0;
  for (double& c : f.coeffs) {
    c -= mean;
    l1 += std::abs(c);
  }
  if (l1 > 0.0)
    for (double& c : f.coeffs) c /= l1;
}

}  // namespace

std::string LinearFilter::name() const {
  std::ostringstream s;
  switch (family) {
    case FilterFamily::LoG: s << "log(sigma=" << scale << ")"; break;
    case FilterFamily::GaborCos: s << "gabor-cos(lambda=" << scale << ",theta=" << orientation << ")"; break;
    case FilterFamily::GaborSin: s << "gabor-sin(lambda=" << scale << ",theta=" << orientation << ")"; break;
  }
  s << " " << side << "x" << side;
  return s.str();
}

LinearFilter log_filter(double sigma) {
  LinearFilter f;
  f.family = FilterFamily::LoG;
  f.scale = sigma;
  f.side = 2 * static_cast<int>(std::ceil(3.0 * sigma)) + 1;
  const int r = f.radius();
  const double s2 = sigma * sigma;
  for (int v = -r; v <= r; ++v)
    for (int u = -r; u <= r; ++u) {
      const double q = (u * u + v * v) / (2.0 * s2);
      f.coeffs.push_back((q - 1.0) * std::exp(-q));
    }
  normalize_kernel(f);
  return f;
}

LinearFilter gabor_filter(double wavelength, double orientation, FilterFamily phase) {
  require(phase != FilterFamily::LoG, "gabor_filter: phase must be cos or sin");
  LinearFilter f;
  f.family = phase;
  f.scale = wavelength;
  f.orientation = orientation;
  f.side = 2 * static_cast<int>(std::ceil(4.0 * wavelength / 3.0)) + 1;
  const int r = f.radius();
  const double sigma = wavelength / 2.0;
  const double c = std::cos(orientation), s = std::sin(orientation);
  for (int v = -r; v <= r; ++v)
    for (int u = -r; u <= r; ++u) {
      const double along = u * c + v * s;
      const double env = std::exp(-(u * u + v * v) / (2.0 * sigma * sigma));
      const double arg = 2.0 * std::numbers::pi * along / wavelength;
      f.coeffs.push_back(env * (phase == FilterFamily::GaborCos ? std::cos(arg) : std::sin(arg)));
    }
  normalize_kernel(f);
  return f;
}

LinearFilter delta_filter() {
  LinearFilter f;
  f.side = 1;
  f.coeffs = {1.0};
  return f;
}

std::vector<LinearFilter> build_filter_bank() {
  std::vector<LinearFilter> bank;
  for (double sigma : {std::numbers::sqrt2 / 2.0, 1.0, 1.5, 2.0}) bank.push_back(log_filter(sigma));
  for (double lambda : {2.0, 4.0, 6.0})
    for (int o = 0; o < kGaborOrientations; ++o) {
      const double theta = std::numbers::pi * o / kGaborOrientations;
      bank.push_back(gabor_filter(lambda, theta, FilterFamily::GaborCos));
      bank.push_back(gabor_filter(lambda, theta, FilterFamily::GaborSin));
    }
  return bank;
}

const std::vector<LinearFilter>& filter_bank() {
  static const std::vector<LinearFilter> bank = build_filter_bank();
  return bank;
}

OffsetList filter_offsets(const LinearFilter& f) {
  OffsetList out{{0, 0}};
  const int r = f.radius();
  for (int v = -r; v <= r; ++v)
    for (int u = -r; u <= r; ++u)
      if (u != 0 || v != 0) out.push_back({u, v});
  return out;
}

std::vector<double> weights_in_offset_order(const LinearFilter& f) {
  std::vector<double> w;
  for (const auto& o : filter_offsets(f)) w.push_back(f.at(o.dx, o.dy));
  return w;
}

std::vector<double> filter_responses(const LinearFilter& f, const GreyImage& img) {
  const int r = f.radius();
  const int ow = img.width() - 2 * r, oh = img.height() - 2 * r;
  if (ow <= 0 || oh <= 0) fail(ErrorKind::InvalidArgument, "image smaller than filter");
  std::vector<double> out(static_cast<std::size_t>(ow) * static_cast<std::size_t>(oh), 0.0);
  // Accumulate tap by tap; each tap is a shifted, scaled copy of the image.
  for (int v = -r; v <= r; ++v)
    for (int u = -r; u <= r; ++u) {
      const double w = f.at(u, v);
      if (w == 0.0) continue;
      for (int y = 0; y < oh; ++y) {
        double* dst = out.data() + static_cast<std::size_t>(y) * ow;
        const std::uint8_t* src = img.pixels().data() + img.index(r + u, y + r + v);
        for (int x = 0; x < ow; ++x) dst[x] += w * src[x];
      }
    }
  return out;
}

HistogramStats filter_response_histogram(const LinearFilter& f, const FeatureKind& kind, const GreyImage& img) {
  std::vector<std::int64_t> counts(static_cast<std::size_t>(kind.bins), 0);
  for (double r : filter_responses(f, img)) ++counts[static_cast<std::size_t>(quantize_response(kind, r))];
  return normalize_counts(counts);
}

std::vector<std::int64_t> filter_response_counts(const FeatureKind& kind, const GreyImage& img) {
  const auto& f = filter_bank().at(static_cast<std::size_t>(kind.filter_index));
  std::vector<std::int64_t> counts(static_cast<std::size_t>(kind.bins), 0);
  for (double r : filter_responses(f, img)) ++counts[static_cast<std::size_t>(quantize_response(kind, r))];
  return counts;
}

FeatureKind make_filter_feature(int filter_index, const GreyImage& training) {
  require(filter_index >= 0 && filter_index < static_cast<int>(filter_bank().size()), "filter index out of range");
  const auto resp = filter_responses(filter_bank()[static_cast<std::size_t>(filter_index)], training);
  const auto [lo, hi] = std::minmax_element(resp.begin(), resp.end());
  return FeatureKind::filter_hist(training.levels(), filter_index, *lo, *hi);
}

std::string describe_filter_bank() {
  std::ostringstream s;
  const auto& bank = filter_bank();
  for (std::size_t i = 0; i < bank.size(); ++i) s << i << ' ' << bank[i].name() << '\n';
  return s.str();
}

}  // namespace mgrf
