#include "mgrf/divergence.hpp"

#include <algorithm>
#include <cmath>

#include "mgrf/error.hpp"

namespace mgrf {

double jsd(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) fail(ErrorKind::InvalidArgument, "jsd: histogram length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double m = 0.5 * (p[i] + q[i]);
    const double a = p[i] > 0.0 ? p[i] * std::log2(p[i] / m) : 0.0;
    const double b = q[i] > 0.0 ? q[i] * std::log2(q[i] / m) : 0.0;
    acc += a + b;  // pairwise sum keeps jsd(p,q) == jsd(q,p) bit for bit
  }
  return std::clamp(0.5 * acc, 0.0, 1.0);
}

}  // namespace mgrf
