#pragma once

#include <algorithm>
#include <cmath>
#include <span>

namespace mgrf {

// Jensen-Shannon divergence in bits (base-2 logs, 0*log0 = 0); in [0, 1].
double jsd(std::span<const double> p, std::span<const double> q);

// Mixed-precision variant for cached float histograms.
template <class T, class U>
double jsd_mixed(std::span<const T> p, std::span<const U> q) {
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double a = static_cast<double>(p[i]), b = static_cast<double>(q[i]);
    const double m = 0.5 * (a + b);
    acc += (a > 0.0 ? a * std::log2(a / m) : 0.0) + (b > 0.0 ? b * std::log2(b / m) : 0.0);
  }
  return std::clamp(0.5 * acc, 0.0, 1.0);
}

}  // namespace mgrf
