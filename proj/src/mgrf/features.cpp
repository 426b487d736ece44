#include "mgrf/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>

#include "mgrf/divergence.hpp"
#include "mgrf/error.hpp"
#include "mgrf/filterbank.hpp"

namespace mgrf {

const char* tag_name(FeatureTag tag) {
  switch (tag) {
    case FeatureTag::Marginal: return "marginal";
    case FeatureTag::GLC: return "glc";
    case FeatureTag::GLD: return "gld";
    case FeatureTag::BP: return "bp";
    case FeatureTag::BE: return "be";
    case FeatureTag::FilterHist: return "filter";
  }
  return "?";
}

FeatureTag parse_tag(const std::string& name) {
  for (auto t : {FeatureTag::Marginal, FeatureTag::GLC, FeatureTag::GLD, FeatureTag::BP, FeatureTag::BE,
                 FeatureTag::FilterHist})
    if (name == tag_name(t)) return t;
  fail(ErrorKind::Format, "unknown feature tag '" + name + "'");
}

FeatureKind FeatureKind::marginal(int levels) { return {FeatureTag::Marginal, 1, levels, levels}; }

FeatureKind FeatureKind::glc(int levels, int order) {
  require(order >= 1, "GLC order must be positive");
  double s = std::pow(static_cast<double>(levels), order);
  require(s <= 1 << 20, "GLC bin count too large");
  return {FeatureTag::GLC, order, static_cast<int>(s), levels};
}

FeatureKind FeatureKind::gld(int levels) { return {FeatureTag::GLD, 2, 2 * levels - 1, levels}; }

FeatureKind FeatureKind::bp(int levels, int order) {
  require(order >= 2 && order <= 21, "BP order must be in [2, 21]");
  return {FeatureTag::BP, order, 1 << (order - 1), levels};
}

FeatureKind FeatureKind::be(int levels, int order, int threshold) {
  require(order >= 2 && order <= 21, "BE order must be in [2, 21]");
  require(threshold >= 0, "BE threshold must be non-negative");
  return {FeatureTag::BE, order, 1 << (order - 1), levels, threshold};
}

FeatureKind FeatureKind::filter_hist(int levels, int filter_index, double lo, double hi) {
  require(hi >= lo, "filter quantiser range inverted");
  FeatureKind k{FeatureTag::FilterHist, 0, kFilterInnerBins + 2, levels};
  k.filter_index = filter_index;
  k.quant_lo = lo;
  k.quant_hi = hi;
  const auto& f = filter_bank().at(static_cast<std::size_t>(filter_index));
  k.order = f.side * f.side;
  return k;
}

int default_be_threshold(int levels) { return static_cast<int>(std::lround((levels - 1) / 8.0)); }

int eval_feature(const FeatureKind& kind, std::span<const int> values) {
  const int x0 = values[0];
  switch (kind.tag) {
    case FeatureTag::Marginal: return x0;
    case FeatureTag::GLD: return values[1] - x0 + kind.levels - 1;
    case FeatureTag::GLC: {
      int bin = 0;
      for (std::size_t i = values.size(); i-- > 0;) bin = bin * kind.levels + values[i];
      return bin;
    }
    case FeatureTag::BP: {
      int bin = 0;
      for (std::size_t i = 1; i < values.size(); ++i) bin |= static_cast<int>(x0 < values[i]) << (i - 1);
      return bin;
    }
    case FeatureTag::BE: {
      int bin = 0;
      for (std::size_t i = 1; i < values.size(); ++i)
        bin |= static_cast<int>(std::abs(x0 - values[i]) <= kind.be_threshold) << (i - 1);
      return bin;
    }
    case FeatureTag::FilterHist: break;
  }
  fail(ErrorKind::InvalidArgument, "eval_feature: filter features have no pointwise formula");
}

int quantize_response(const FeatureKind& kind, double response) {
  if (response < kind.quant_lo) return 0;
  if (response > kind.quant_hi) return kFilterInnerBins + 1;
  const double width = kind.quant_hi - kind.quant_lo;
  if (width <= 0.0) return 1 + kFilterInnerBins / 2;
  const int b = static_cast<int>((response - kind.quant_lo) / width * kFilterInnerBins);
  return 1 + std::min(b, kFilterInnerBins - 1);
}

CliqueExtent CliqueExtent::of(std::span<const Offset> offsets) {
  CliqueExtent e;
  for (const auto& o : offsets) {
    e.min_dx = std::min(e.min_dx, o.dx);
    e.max_dx = std::max(e.max_dx, o.dx);
    e.min_dy = std::min(e.min_dy, o.dy);
    e.max_dy = std::max(e.max_dy, o.dy);
  }
  return e;
}

std::int64_t CliqueExtent::clique_count(int width, int height) const {
  const auto ax = anchors_x(width), ay = anchors_y(height);
  if (ax <= 0 || ay <= 0) return 0;
  return static_cast<std::int64_t>(ax) * ay;
}

int CliqueExtent::radius() const { return std::max({-min_dx, max_dx, -min_dy, max_dy}); }

std::vector<std::int64_t> count_histogram(const FeatureKind& kind, std::span<const Offset> offsets,
                                          const GreyImage& img) {
  if (kind.tag == FeatureTag::FilterHist) return filter_response_counts(kind, img);
  require(!offsets.empty() && offsets[0] == Offset{}, "offset list must start at (0,0)");
  require(static_cast<int>(offsets.size()) == kind.order, "offset list length does not match feature order");
  const auto ext = CliqueExtent::of(offsets);
  if (ext.clique_count(img.width(), img.height()) == 0)
    fail(ErrorKind::InvalidArgument, "clique family does not fit inside the image (zero valid cliques)");
  std::vector<std::int64_t> counts(static_cast<std::size_t>(kind.bins), 0);
  const int W = img.width();
  const auto px = img.pixels();
  std::vector<std::ptrdiff_t> rel(offsets.size());
  for (std::size_t i = 0; i < offsets.size(); ++i) rel[i] = static_cast<std::ptrdiff_t>(offsets[i].dy) * W + offsets[i].dx;
  std::vector<int> vals(offsets.size());
  const int x_begin = -ext.min_dx, x_end = W - ext.max_dx;
  const int y_begin = -ext.min_dy, y_end = img.height() - ext.max_dy;

  if (kind.tag == FeatureTag::GLD) {
    const std::ptrdiff_t r1 = rel[1];
    const int bias = kind.levels - 1;
    for (int y = y_begin; y < y_end; ++y) {
      const std::uint8_t* row = px.data() + static_cast<std::ptrdiff_t>(y) * W;
      for (int x = x_begin; x < x_end; ++x) ++counts[static_cast<std::size_t>(row[x + r1] - row[x] + bias)];
    }
    return counts;
  }
  if (kind.tag == FeatureTag::BP) {
    for (int y = y_begin; y < y_end; ++y) {
      const std::uint8_t* row = px.data() + static_cast<std::ptrdiff_t>(y) * W;
      for (int x = x_begin; x < x_end; ++x) {
        const std::uint8_t* p = row + x;
        const int x0 = *p;
        int bin = 0;
        for (std::size_t i = 1; i < rel.size(); ++i) bin |= static_cast<int>(x0 < p[rel[i]]) << (i - 1);
        ++counts[static_cast<std::size_t>(bin)];
      }
    }
    return counts;
  }
  for (int y = y_begin; y < y_end; ++y) {
    for (int x = x_begin; x < x_end; ++x) {
      const std::uint8_t* p = px.data() + img.index(x, y);
      for (std::size_t i = 0; i < rel.size(); ++i) vals[i] = p[rel[i]];
      ++counts[static_cast<std::size_t>(eval_feature(kind, vals))];
    }
  }
  return counts;
}

HistogramStats normalize_counts(std::span<const std::int64_t> counts) {
  HistogramStats h;
  h.clique_count = std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
  if (h.clique_count == 0) fail(ErrorKind::InvalidArgument, "zero valid cliques");
  h.freq.resize(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i)
    h.freq[i] = static_cast<double>(counts[i]) / static_cast<double>(h.clique_count);
  return h;
}

HistogramStats collect_histogram(const FeatureKind& kind, std::span<const Offset> offsets, const GreyImage& img) {
  return normalize_counts(count_histogram(kind, offsets, img));
}

HistogramStats smooth_histogram(const HistogramStats& h, double pseudo_count) {
  HistogramStats out = h;
  const double n = static_cast<double>(h.clique_count);
  const double total = n + pseudo_count * static_cast<double>(h.freq.size());
  for (auto& f : out.freq) f = (f * n + pseudo_count) / total;
  return out;
}

std::string format_offsets(std::span<const Offset> offsets) {
  std::string s;
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    if (i) s += ' ';
    s += std::to_string(offsets[i].dx) + ',' + std::to_string(offsets[i].dy);
  }
  return s;
}

OffsetList parse_offsets(const std::string& text) {
  std::istringstream in(text);
  OffsetList out;
  std::string tok;
  while (in >> tok) {
    const auto comma = tok.find(',');
    if (comma == std::string::npos) fail(ErrorKind::Format, "malformed offset '" + tok + "'");
    Offset o;
    auto r1 = std::from_chars(tok.data(), tok.data() + comma, o.dx);
    auto r2 = std::from_chars(tok.data() + comma + 1, tok.data() + tok.size(), o.dy);
    if (r1.ec != std::errc{} || r1.ptr != tok.data() + comma || r2.ec != std::errc{} ||
        r2.ptr != tok.data() + tok.size())
      fail(ErrorKind::Format, "malformed offset '" + tok + "'");
    out.push_back(o);
  }
  return out;
}

std::vector<Offset> half_plane_offsets(double radius) {
  std::vector<Offset> out;
  const int r = static_cast<int>(std::floor(radius));
  for (int dy = 0; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx) {
      if (dy == 0 && dx <= 0) continue;
      if (dx * dx + dy * dy <= radius * radius) out.push_back({dx, dy});
    }
  return out;
}

OffsetList jag_star_offsets(int k, double d0, double d1, double phi) {
  require(k >= 3, "jag-star order must be at least 3");
  OffsetList out{{0, 0}};
  for (int i = 0; i < k - 1; ++i) {
    const double d = (i % 2 == 0) ? d0 : d1;
    const double a = 2.0 * std::numbers::pi * i / (k - 1) + phi;
    out.push_back({static_cast<int>(std::lround(d * std::cos(a))), static_cast<int>(std::lround(d * std::sin(a)))});
  }
  return out;
}

std::vector<OffsetList> enumerate_jagstar_candidates(int k) {
  require(k == 9 || k == 13, "jag-star candidates defined for k in {9, 13}");
  std::vector<OffsetList> out;
  std::set<std::vector<Offset>> seen;
  const double step = 2.0 * std::numbers::pi / (k - 1);
  for (int d0 = 1; d0 <= kJagStarMaxRadius; ++d0)
    for (int d1 = 1; d1 <= kJagStarMaxRadius; ++d1)
      for (int p = 0; p < kJagStarPhiSteps; ++p) {
        auto offs = jag_star_offsets(k, d0, d1, step * p / kJagStarPhiSteps);
        std::vector<Offset> key(offs.begin() + 1, offs.end());
        std::sort(key.begin(), key.end());
        if (seen.insert(std::move(key)).second) out.push_back(std::move(offs));
      }
  return out;
}

Offset halve(Offset r) { return {r.dx / 2, r.dy / 2}; }

Offset canonical_sign(Offset r) {
  if (r.dy < 0 || (r.dy == 0 && r.dx < 0)) return -r;
  return r;
}

std::vector<Offset> characteristic_offsets(std::span<const Offset> offsets) {
  std::vector<Offset> out;
  for (std::size_t i = 1; i < offsets.size(); ++i) {
    if (offsets[i] == Offset{}) continue;
    const auto c = canonical_sign(offsets[i]);
    if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
  }
  return out;
}

std::vector<OffsetList> combined_bp5_candidates(std::span<const Offset> selected) {
  if (selected.empty()) fail(ErrorKind::InvalidArgument, "combined BP5: empty set of characteristic offsets");
  std::vector<Offset> base;
  for (const auto& r : selected) {
    const auto c = canonical_sign(r);
    if (c != Offset{} && std::find(base.begin(), base.end(), c) == base.end()) base.push_back(c);
  }
  std::vector<OffsetList> out;
  std::set<std::pair<Offset, Offset>> seen;
  for (std::size_t i = 0; i < base.size(); ++i)
    for (std::size_t j = i + 1; j < base.size(); ++j)
      for (int choice = 0; choice < 4; ++choice) {
        const Offset a = (choice & 1) ? halve(base[i]) : base[i];
        const Offset b = (choice & 2) ? halve(base[j]) : base[j];
        const Offset ca = canonical_sign(a), cb = canonical_sign(b);
        // Halving can collapse an offset onto the anchor or onto the partner.
        if (ca == Offset{} || cb == Offset{} || ca == cb) continue;
        if (!seen.insert(std::minmax(ca, cb)).second) continue;
        out.push_back({{0, 0}, a, -a, b, -b});
      }
  return out;
}

OffsetList conjoin_bp9_by_score(std::span<const Offset> rs, std::span<const double> scores) {
  require(rs.size() == scores.size(), "conjoin: score count mismatch");
  if (rs.size() < 4) fail(ErrorKind::InvalidArgument, "conjoin: fewer than 4 BP3 candidates evaluated");
  std::vector<std::size_t> order(rs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return rs[a] < rs[b];
  });
  OffsetList out{{0, 0}};
  std::vector<Offset> used;
  for (std::size_t idx : order) {
    const auto c = canonical_sign(rs[idx]);
    if (std::find(used.begin(), used.end(), c) != used.end()) continue;
    used.push_back(c);
    out.push_back(rs[idx]);
    out.push_back(-rs[idx]);
    if (used.size() == 4) break;
  }
  if (used.size() < 4) fail(ErrorKind::InvalidArgument, "conjoin: fewer than 4 distinct BP3 offsets");
  return out;
}

OffsetList conjoin_bp9(std::span<const Offset> rs, std::span<const HistogramStats> training,
                       std::span<const HistogramStats> samples) {
  require(rs.size() == training.size() && rs.size() == samples.size(), "conjoin: statistics misaligned");
  std::vector<double> scores(rs.size());
  for (std::size_t i = 0; i < rs.size(); ++i) scores[i] = jsd(training[i].freq, samples[i].freq);
  return conjoin_bp9_by_score(rs, scores);
}

}  // namespace mgrf
