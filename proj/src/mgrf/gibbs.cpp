#include "mgrf/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mgrf/error.hpp"
#include "mgrf/filterbank.hpp"

namespace mgrf {

namespace {

inline int eval_bits(FeatureTag tag, const int* v, std::size_t n, int be) {
  const int x0 = v[0];
  int bin = 0;
  if (tag == FeatureTag::BP) {
    for (std::size_t i = 1; i < n; ++i) bin |= static_cast<int>(x0 < v[i]) << (i - 1);
  } else {
    for (std::size_t i = 1; i < n; ++i) bin |= static_cast<int>(std::abs(x0 - v[i]) <= be) << (i - 1);
  }
  return bin;
}

}  // namespace

GibbsState::GibbsState(const NestedModel& model, GreyImage img) : img_(std::move(img)), levels_(model.levels) {
  require(img_.levels() == model.levels, "image level count does not match the model");
  const int W = img_.width();
  for (const auto& p : model.potentials) {
    validate_potential(model.levels, p);
    Family f;
    f.kind = p.kind;
    f.offsets = p.offsets;
    f.ext = CliqueExtent::of(p.offsets);
    for (const auto& o : p.offsets) f.rel.push_back(static_cast<std::ptrdiff_t>(o.dy) * W + o.dx);
    for (int i = 0; i < static_cast<int>(p.offsets.size()); ++i) {
      bool seen = false;
      for (int j = 0; j < i; ++j) seen = seen || p.offsets[j] == p.offsets[i];
      if (seen) continue;
      f.first_positions.push_back(i);
      std::vector<int> group;
      for (int j = 0; j < static_cast<int>(p.offsets.size()); ++j)
        if (p.offsets[j] == p.offsets[i]) group.push_back(j);
      f.same.push_back(std::move(group));
    }
    if (p.kind.tag == FeatureTag::FilterHist) {
      const auto& lf = filter_bank().at(static_cast<std::size_t>(p.kind.filter_index));
      f.filter = true;
      f.weights = weights_in_offset_order(lf);
      f.radius = lf.radius();
      f.resp_w = std::max(0, img_.width() - 2 * f.radius);
      f.resp_h = std::max(0, img_.height() - 2 * f.radius);
    }
    const auto cc = f.ext.clique_count(img_.width(), img_.height());
    if (cc == 0) fail(ErrorKind::InvalidArgument, "image too small for a clique family of the model");
    clique_counts_.push_back(cc);
    thetas_.push_back(p.theta);
    families_.push_back(std::move(f));
  }
  counts_.resize(families_.size());
  responses_.resize(families_.size());
  energies_.resize(static_cast<std::size_t>(levels_));
  refresh();
}

void GibbsState::compute_responses(std::size_t p) {
  const auto& f = families_[p];
  responses_[p] = filter_responses(filter_bank()[static_cast<std::size_t>(f.kind.filter_index)], img_);
}

void GibbsState::refresh() {
  for (std::size_t p = 0; p < families_.size(); ++p) {
    const auto& f = families_[p];
    if (f.filter) {
      compute_responses(p);
      counts_[p].assign(static_cast<std::size_t>(f.kind.bins), 0);
      for (double r : responses_[p]) ++counts_[p][static_cast<std::size_t>(quantize_response(f.kind, r))];
    } else {
      counts_[p] = count_histogram(f.kind, f.offsets, img_);
    }
  }
}

void GibbsState::reset_image(const GreyImage& img) {
  require(img.width() == img_.width() && img.height() == img_.height() && img.levels() == img_.levels(),
          "reset_image: geometry mismatch");
  img_ = img;
  refresh();
}

HistogramStats GibbsState::histogram(std::size_t p) const { return normalize_counts(counts_[p]); }

std::vector<HistogramStats> GibbsState::histograms() const {
  std::vector<HistogramStats> out;
  out.reserve(families_.size());
  for (std::size_t p = 0; p < families_.size(); ++p) out.push_back(histogram(p));
  return out;
}

double GibbsState::energy() const {
  double e = 0.0;
  for (std::size_t p = 0; p < families_.size(); ++p)
    for (std::size_t b = 0; b < counts_[p].size(); ++b) e += thetas_[p][b] * static_cast<double>(counts_[p][b]);
  return e;
}

void GibbsState::local_energies(int x, int y, std::span<double> out) {
  const int Q = levels_;
  const int W = img_.width(), H = img_.height();
  std::fill(out.begin(), out.end(), 0.0);
  bin_cache_.clear();
  clique_cache_.clear();
  const std::uint8_t* px = img_.pixels().data();
  const std::size_t site = img_.index(x, y);
  const int cur = px[site];

  for (std::size_t p = 0; p < families_.size(); ++p) {
    const Family& f = families_[p];
    const double* th = thetas_[p].data();

    if (f.filter) {
      const auto& resp = responses_[p];
      for (std::size_t j = 0; j < f.offsets.size(); ++j) {
        const int cx = x - f.offsets[j].dx, cy = y - f.offsets[j].dy;
        if (cx < f.radius || cy < f.radius || cx >= W - f.radius || cy >= H - f.radius) continue;
        const auto ri = static_cast<std::ptrdiff_t>(cy - f.radius) * f.resp_w + (cx - f.radius);
        const double w = f.weights[j];
        const double base = resp[static_cast<std::size_t>(ri)] - w * cur;
        for (int q = 0; q < Q; ++q) {
          const int b = quantize_response(f.kind, base + w * q);
          out[static_cast<std::size_t>(q)] += th[b];
          bin_cache_.push_back(b);
        }
        clique_cache_.push_back({static_cast<int>(p), ri, w});
      }
      continue;
    }

    for (std::size_t k = 0; k < f.first_positions.size(); ++k) {
      const int i = f.first_positions[k];
      const int ax = x - f.offsets[static_cast<std::size_t>(i)].dx;
      const int ay = y - f.offsets[static_cast<std::size_t>(i)].dy;
      if (ax < -f.ext.min_dx || ax >= W - f.ext.max_dx || ay < -f.ext.min_dy || ay >= H - f.ext.max_dy) continue;
      const std::uint8_t* anchor = px + static_cast<std::ptrdiff_t>(site) - f.rel[static_cast<std::size_t>(i)];
      const auto& group = f.same[k];

      switch (f.kind.tag) {
        case FeatureTag::Marginal:
          for (int q = 0; q < Q; ++q) {
            out[static_cast<std::size_t>(q)] += th[q];
            bin_cache_.push_back(q);
          }
          break;
        case FeatureTag::GLD:
          if (group.size() == 1) {
            const int bias = Q - 1;
            if (i == 0) {
              const int other = anchor[f.rel[1]];
              for (int q = 0; q < Q; ++q) {
                const int b = other - q + bias;
                out[static_cast<std::size_t>(q)] += th[b];
                bin_cache_.push_back(b);
              }
            } else {
              const int other = anchor[0];
              for (int q = 0; q < Q; ++q) {
                const int b = q - other + bias;
                out[static_cast<std::size_t>(q)] += th[b];
                bin_cache_.push_back(b);
              }
            }
            break;
          }
          [[fallthrough]];
        default: {
          const std::size_t n = f.rel.size();
          scratch_.resize(n);
          for (std::size_t j = 0; j < n; ++j) scratch_[j] = anchor[f.rel[j]];
          for (int q = 0; q < Q; ++q) {
            for (int j : group) scratch_[static_cast<std::size_t>(j)] = q;
            int b;
            if (f.kind.tag == FeatureTag::BP || f.kind.tag == FeatureTag::BE)
              b = eval_bits(f.kind.tag, scratch_.data(), n, f.kind.be_threshold);
            else
              b = eval_feature(f.kind, scratch_);
            out[static_cast<std::size_t>(q)] += th[b];
            bin_cache_.push_back(b);
          }
        }
      }
      clique_cache_.push_back({static_cast<int>(p), -1, 0.0});
    }
  }
}

void GibbsState::conditional(int x, int y, std::span<double> prob) {
  local_energies(x, y, prob);
  const double lo = *std::min_element(prob.begin(), prob.end());
  double sum = 0.0;
  for (auto& v : prob) {
    v = std::exp(-(v - lo));
    sum += v;
  }
  for (auto& v : prob) v /= sum;
}

void GibbsState::apply_cached(int x, int y, int old_value, int new_value) {
  if (old_value == new_value) return;
  const auto Q = static_cast<std::size_t>(levels_);
  for (std::size_t c = 0; c < clique_cache_.size(); ++c) {
    const auto& cc = clique_cache_[c];
    auto& counts = counts_[static_cast<std::size_t>(cc.family)];
    --counts[static_cast<std::size_t>(bin_cache_[c * Q + static_cast<std::size_t>(old_value)])];
    ++counts[static_cast<std::size_t>(bin_cache_[c * Q + static_cast<std::size_t>(new_value)])];
    if (cc.response_index >= 0)
      responses_[static_cast<std::size_t>(cc.family)][static_cast<std::size_t>(cc.response_index)] +=
          cc.weight * (new_value - old_value);
  }
  img_.at(x, y) = static_cast<std::uint8_t>(new_value);
}

void GibbsState::set_pixel(int x, int y, int value) {
  require(img_.contains(x, y) && value >= 0 && value < levels_, "set_pixel: site or value out of range");
  local_energies(x, y, energies_);
  apply_cached(x, y, img_.at(x, y), value);
}

void GibbsState::sweep(Rng& rng, const SiteMask* mask) {
  const int W = img_.width(), H = img_.height();
  auto& e = energies_;
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      if (mask && (*mask)[img_.index(x, y)]) continue;
      local_energies(x, y, e);
      const double lo = *std::min_element(e.begin(), e.end());
      double sum = 0.0;
      for (auto& v : e) {
        v = std::exp(lo - v);
        sum += v;
      }
      double u = rng.uniform() * sum;
      int q = 0;
      for (; q < levels_ - 1; ++q) {
        u -= e[static_cast<std::size_t>(q)];
        if (u < 0.0) break;
      }
      apply_cached(x, y, img_.at(x, y), q);
    }
  // Filter responses drift by rounding under incremental updates.
  for (std::size_t p = 0; p < families_.size(); ++p) {
    if (!families_[p].filter) continue;
    compute_responses(p);
    counts_[p].assign(counts_[p].size(), 0);
    for (double r : responses_[p]) ++counts_[p][static_cast<std::size_t>(quantize_response(families_[p].kind, r))];
  }
}

}  // namespace mgrf
