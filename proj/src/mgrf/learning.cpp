#include "mgrf/learning.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <tuple>

#include "mgrf/error.hpp"
#include "mgrf/filterbank.hpp"
#include "mgrf/parallel.hpp"

namespace mgrf {

SelectionMode parse_selection_mode(const std::string& text, double alpha) {
  if (text == "plain") return {SelectionMode::Plain, alpha};
  if (text == "maxmin" || text == "max-min") return {SelectionMode::MaxMin, alpha};
  if (text == "softmin" || text == "soft-min") {
    require(alpha > 0.0, "soft-min alpha must be positive");
    return {SelectionMode::SoftMin, alpha};
  }
  fail(ErrorKind::InvalidArgument, "unknown selection mode '" + text + "'");
}

std::string to_string(const SelectionMode& mode) {
  switch (mode.kind) {
    case SelectionMode::Plain: return "plain";
    case SelectionMode::MaxMin: return "maxmin";
    case SelectionMode::SoftMin: return "softmin";
  }
  return "?";
}

std::vector<double> soft_min_weights(std::span<const double> piece_energies, double alpha) {
  std::vector<double> w(piece_energies.size(), 0.0);
  if (w.empty()) return w;
  const double top = *std::max_element(piece_energies.begin(), piece_energies.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = std::exp(alpha * (piece_energies[i] - top));
    sum += w[i];
  }
  for (auto& v : w) v /= sum;
  return w;
}

double score_feature(const HistogramStats& whole, std::span<const HistogramStats> pieces,
                     const HistogramStats& sample_avg, const SelectionMode& mode, std::span<const double> weights) {
  switch (mode.kind) {
    case SelectionMode::Plain: return jsd(sample_avg.freq, whole.freq);
    case SelectionMode::MaxMin: {
      require(!pieces.empty(), "max-min scoring needs at least one piece");
      double best = 1.0;
      for (const auto& p : pieces) best = std::min(best, jsd(sample_avg.freq, p.freq));
      return best;
    }
    case SelectionMode::SoftMin: {
      require(!pieces.empty() && weights.size() == pieces.size(), "soft-min scoring needs one weight per piece");
      double acc = 0.0;
      for (std::size_t i = 0; i < pieces.size(); ++i) acc += weights[i] * jsd(sample_avg.freq, pieces[i].freq);
      return acc;
    }
  }
  return 0.0;
}

std::vector<double> gradient(std::span<const HistogramStats> observed, std::span<const HistogramStats> sampled) {
  if (observed.size() != sampled.size()) fail(ErrorKind::InvalidArgument, "gradient: potential count mismatch");
  std::vector<double> g;
  for (std::size_t p = 0; p < observed.size(); ++p) {
    if (observed[p].freq.size() != sampled[p].freq.size())
      fail(ErrorKind::InvalidArgument, "gradient: histogram length mismatch");
    for (std::size_t b = 0; b < observed[p].freq.size(); ++b) g.push_back(sampled[p].freq[b] - observed[p].freq[b]);
  }
  return g;
}

std::vector<double> second_order_step(std::span<const double> theta, std::span<const double> grad,
                                      std::span<const double> variance, double max_step) {
  require(theta.size() == grad.size() && grad.size() == variance.size(), "second_order_step: size mismatch");
  std::vector<double> out(theta.begin(), theta.end());
  double gg = 0.0, gdg = 0.0, gmax = 0.0;
  for (std::size_t i = 0; i < grad.size(); ++i) {
    gg += grad[i] * grad[i];
    gdg += grad[i] * grad[i] * variance[i];
    gmax = std::max(gmax, std::abs(grad[i]));
  }
  if (gg == 0.0) return out;
  require(gdg > 0.0, "second_order_step: variance must be positive along the gradient");
  double s = gg / gdg;
  if (max_step > 0.0 && s * gmax > max_step) s = max_step / gmax;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += s * grad[i];
  return out;
}

std::string selector_name(SelectorFamily f) {
  switch (f) {
    case SelectorFamily::GLD2: return "gld2";
    case SelectorFamily::CombinedBP5: return "combined-bp5";
    case SelectorFamily::ConjoinedBP9: return "conjoined-bp9";
    case SelectorFamily::JagStarBP9: return "jagstar9";
    case SelectorFamily::JagStarBP13: return "jagstar13";
    case SelectorFamily::FilterBank: return "filters";
  }
  return "?";
}

SelectorSpec default_selector(SelectorFamily f) {
  switch (f) {
    case SelectorFamily::GLD2: return {f, 8, 3};
    case SelectorFamily::CombinedBP5: return {f, 8, 2};
    default: return {f, 8, 1};
  }
}

std::vector<SelectorSpec> parse_selectors(const std::string& text) {
  std::vector<SelectorSpec> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (item.empty()) continue;
    std::vector<std::string> parts;
    std::istringstream is(item);
    for (std::string p; std::getline(is, p, ':');) parts.push_back(p);
    SelectorSpec spec;
    bool found = false;
    for (auto f : {SelectorFamily::GLD2, SelectorFamily::CombinedBP5, SelectorFamily::ConjoinedBP9,
                   SelectorFamily::JagStarBP9, SelectorFamily::JagStarBP13, SelectorFamily::FilterBank})
      if (parts[0] == selector_name(f)) {
        spec = default_selector(f);
        found = true;
      }
    if (!found) fail(ErrorKind::InvalidArgument, "unknown selector '" + parts[0] + "'");
    try {
      if (parts.size() > 1) spec.iterations = std::stoi(parts[1]);
      if (parts.size() > 2) spec.add_count = std::stoi(parts[2]);
    } catch (const std::exception&) {
      fail(ErrorKind::InvalidArgument, "malformed selector '" + item + "'");
    }
    if (parts.size() > 3 || spec.iterations < 1 || spec.add_count < 1)
      fail(ErrorKind::InvalidArgument, "malformed selector '" + item + "'");
    out.push_back(spec);
  }
  if (out.empty()) fail(ErrorKind::InvalidArgument, "no selectors given");
  return out;
}

// ---------------------------------------------------------------------------

namespace {

using Clock = std::chrono::steady_clock;

bool candidate_less(const Candidate& a, const Candidate& b) {
  return std::tie(a.kind.tag, a.kind.order, a.kind.filter_index, a.offsets) <
         std::tie(b.kind.tag, b.kind.order, b.kind.filter_index, b.offsets);
}

std::string candidate_key(const Candidate& c) {
  return std::string(tag_name(c.kind.tag)) + std::to_string(c.kind.order) + ":" +
         std::to_string(c.kind.filter_index) + ":" + format_offsets(c.offsets);
}

bool within_radius(const OffsetList& offs, double radius) {
  for (const auto& o : offs)
    if (o.dx * o.dx + o.dy * o.dy > radius * radius) return false;
  return true;
}

struct TrainingStats {
  HistogramStats whole;              // smoothed
  std::vector<HistogramStats> pieces;  // smoothed
};

class Nester {
 public:
  Nester(const GreyImage& training, const NestConfig& cfg)
      : training_(training), cfg_(cfg), pieces_(split_pieces(training, cfg.piece_size, cfg.piece_overlap)) {
    require(cfg.csa_runs >= 1 && cfg.csa_sweeps >= 1 && cfg.csa_size >= 8, "CSA settings invalid");
    require(cfg.max_radius >= 1.0, "max_radius must be at least 1");
    model_ = base_model(training.levels(), cfg.use_marginal);
    for (auto& p : model_.potentials) p.target = training_stats({p.kind, p.offsets}).whole;
    Rng rng(derive_seed(cfg_.seed, stream_++));
    for (int r = 0; r < cfg_.csa_runs; ++r)
      samples_.push_back(noise_image(cfg_.csa_size, cfg_.csa_size, training.levels(), rng));
  }

  NestResult run(std::span<const SelectorSpec> selectors, const IterationCallback& cb) {
    NestResult result;
    {
      IterationLog base;
      base.iteration = 0;
      base.selector = "base";
      const auto t0 = Clock::now();
      learn(base);
      base.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
      if (cb) cb(base);
      result.log.push_back(std::move(base));
    }
    int iteration = 0;
    for (const auto& sel : selectors) {
      for (int it = 0; it < sel.iterations; ++it) {
        IterationLog log;
        log.iteration = ++iteration;
        log.selector = selector_name(sel.family);
        const auto t0 = Clock::now();
        auto scored = score_selector(sel.family);
        log.candidate_count = scored.candidate_count;
        log.max_score = scored.max_score;
        const auto take = std::min<std::size_t>(static_cast<std::size_t>(sel.add_count), scored.ranked.size());
        if (take == 0) fail(ErrorKind::Runtime, "selector " + selector_name(sel.family) + " yields no candidates");
        for (std::size_t k = 0; k < take; ++k) {
          const auto& sf = scored.ranked[k];
          auto p = make_potential(sf.candidate.kind, sf.candidate.offsets, iteration);
          p.target = training_stats(sf.candidate).whole;
          model_ = add_potential(model_, std::move(p));
          log.selected.push_back(sf);
        }
        learn(log);
        log.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
        if (cb) cb(log);
        result.log.push_back(std::move(log));
      }
      result.selector_final_max_score.push_back(score_selector(sel.family, true).max_score);
    }
    result.model = model_;
    result.samples = samples_;
    return result;
  }

 private:
  struct Scored {
    std::vector<SelectedFeature> ranked;
    std::size_t candidate_count = 0;
    double max_score = 0.0;
  };

  const TrainingStats& training_stats(const Candidate& c) {
    const auto key = candidate_key(c);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    return cache_.emplace(key, compute_training_stats(c)).first->second;
  }

  TrainingStats compute_training_stats(const Candidate& c) const {
    TrainingStats t;
    t.whole = smooth_histogram(collect_histogram(c.kind, c.offsets, training_), cfg_.smoothing);
    for (const auto& piece : pieces_.pieces)
      t.pieces.push_back(smooth_histogram(collect_histogram(c.kind, c.offsets, piece), cfg_.smoothing));
    return t;
  }

  HistogramStats sample_average(const Candidate& c) const {
    std::vector<std::int64_t> sum(static_cast<std::size_t>(c.kind.bins), 0);
    for (const auto& s : samples_) {
      const auto counts = count_histogram(c.kind, c.offsets, s);
      for (std::size_t b = 0; b < sum.size(); ++b) sum[b] += counts[b];
    }
    return normalize_counts(sum);
  }

  std::vector<double> piece_weights() const {
    if (cfg_.mode.kind != SelectionMode::SoftMin) return {};
    std::vector<double> energies;
    for (const auto& piece : pieces_.pieces) energies.push_back(normalized_energy(model_, piece));
    return soft_min_weights(energies, cfg_.mode.alpha);
  }

  std::vector<Candidate> generate(SelectorFamily family) const {
    const int Q = training_.levels();
    std::vector<Candidate> out;
    switch (family) {
      case SelectorFamily::GLD2:
        for (const auto& r : half_plane_offsets(cfg_.max_radius)) out.push_back({FeatureKind::gld(Q), {{0, 0}, r}});
        break;
      case SelectorFamily::ConjoinedBP9:
        for (const auto& r : half_plane_offsets(cfg_.max_radius))
          out.push_back({FeatureKind::bp(Q, 3), {{0, 0}, r, -r}});
        break;
      case SelectorFamily::CombinedBP5: {
        std::vector<Offset> chars;
        for (const auto& p : model_.potentials)
          if (p.kind.tag == FeatureTag::GLD || (p.kind.tag == FeatureTag::BP && p.kind.order == 5))
            for (const auto& r : characteristic_offsets(p.offsets))
              if (std::find(chars.begin(), chars.end(), r) == chars.end()) chars.push_back(r);
        for (auto& offs : combined_bp5_candidates(chars))
          if (within_radius(offs, cfg_.max_radius)) out.push_back({FeatureKind::bp(Q, 5), std::move(offs)});
        break;
      }
      case SelectorFamily::JagStarBP9:
      case SelectorFamily::JagStarBP13: {
        const int k = family == SelectorFamily::JagStarBP9 ? 9 : 13;
        for (auto& offs : enumerate_jagstar_candidates(k))
          if (within_radius(offs, cfg_.max_radius)) out.push_back({FeatureKind::bp(Q, k), std::move(offs)});
        break;
      }
      case SelectorFamily::FilterBank:
        for (int i = 0; i < static_cast<int>(filter_bank().size()); ++i) {
          auto kind = make_filter_feature(i, training_);
          out.push_back({kind, filter_offsets(filter_bank()[static_cast<std::size_t>(i)])});
        }
        break;
    }
    // Cliques must fit inside both a training piece and a CSA sample.
    const int room = std::min({pieces_.pieces.front().width(), pieces_.pieces.front().height(), cfg_.csa_size});
    std::erase_if(out, [&](const Candidate& c) {
      const auto e = CliqueExtent::of(c.offsets);
      return e.max_dx - e.min_dx >= room || e.max_dy - e.min_dy >= room;
    });
    return out;
  }

  std::vector<double> score_all(const std::vector<Candidate>& cands) {
    // Training statistics are cached serially; scoring itself is parallel.
    std::vector<const TrainingStats*> stats;
    for (const auto& c : cands) stats.push_back(&training_stats(c));
    const auto weights = piece_weights();
    std::vector<double> scores(cands.size());
    parallel_for(cands.size(), cfg_.threads, [&](std::size_t i) {
      scores[i] = score_feature(stats[i]->whole, stats[i]->pieces, sample_average(cands[i]), cfg_.mode, weights);
    });
    return scores;
  }

  static std::vector<std::size_t> rank(const std::vector<Candidate>& cands, const std::vector<double>& scores) {
    std::vector<std::size_t> order(cands.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (scores[a] != scores[b]) return scores[a] > scores[b];
      return candidate_less(cands[a], cands[b]);
    });
    return order;
  }

  Scored score_selector(SelectorFamily family, bool max_only = false) {
    auto all = generate(family);
    std::vector<Candidate> cands;
    for (auto& c : all)
      if (family == SelectorFamily::ConjoinedBP9 || !has_potential(model_, c.kind, c.offsets))
        cands.push_back(std::move(c));
    Scored out;
    out.candidate_count = cands.size();
    if (cands.empty()) return out;
    const auto scores = score_all(cands);
    out.max_score = *std::max_element(scores.begin(), scores.end());
    if (max_only) return out;
    const auto order = rank(cands, scores);
    if (family != SelectorFamily::ConjoinedBP9) {
      for (auto i : order) out.ranked.push_back({cands[i], scores[i]});
      return out;
    }
    // Conjoin the four best symmetric BP3 features; if that clique family is
    // already in the model, swap the weakest member for the next-ranked one.
    if (order.size() < 4) return out;
    const int Q = training_.levels();
    std::vector<std::size_t> chosen(order.begin(), order.begin() + 3);
    for (std::size_t next = 3; next < order.size(); ++next) {
      std::vector<Offset> rs;
      std::vector<double> sc;
      for (auto i : chosen) {
        rs.push_back(cands[i].offsets[1]);
        sc.push_back(scores[i]);
      }
      rs.push_back(cands[order[next]].offsets[1]);
      sc.push_back(scores[order[next]]);
      Candidate c{FeatureKind::bp(Q, 9), conjoin_bp9_by_score(rs, sc)};
      if (has_potential(model_, c.kind, c.offsets)) continue;
      const auto& ts = training_stats(c);
      const auto w = piece_weights();
      out.ranked.push_back({c, score_feature(ts.whole, ts.pieces, sample_average(c), cfg_.mode, w)});
      break;
    }
    return out;
  }

  // One second-order step from the current samples, then parallel CSA runs
  // whose parameters are averaged and whose final images become the samples.
  void learn(IterationLog& log) {
    const std::size_t P = model_.potentials.size();
    const auto targets = model_targets(model_);
    if (cfg_.second_order && samples_.size() >= 2) {
      std::vector<double> theta, grad, var;
      for (std::size_t p = 0; p < P; ++p) {
        const auto& pot = model_.potentials[p];
        std::vector<std::vector<double>> hs;
        std::int64_t n = 0;
        for (const auto& s : samples_) {
          auto h = collect_histogram(pot.kind, pot.offsets, s);
          n = h.clique_count;
          hs.push_back(std::move(h.freq));
        }
        const double m = static_cast<double>(hs.size());
        for (std::size_t b = 0; b < pot.theta.size(); ++b) {
          double mean = 0.0;
          for (const auto& h : hs) mean += h[b];
          mean /= m;
          double v = 0.0;
          for (const auto& h : hs) v += (h[b] - mean) * (h[b] - mean);
          v /= (m - 1.0);
          theta.push_back(pot.theta[b]);
          grad.push_back(mean - targets[p].freq[b]);
          var.push_back(std::max(cfg_.variance_floor, v * static_cast<double>(n)));
        }
      }
      const auto stepped = second_order_step(theta, grad, var, cfg_.max_step);
      std::size_t k = 0;
      for (auto& pot : model_.potentials)
        for (auto& t : pot.theta) t = stepped[k++];
    }

    const auto runs = static_cast<std::size_t>(cfg_.csa_runs);
    std::vector<GreyImage> inits;
    std::vector<std::uint64_t> seeds;
    {
      Rng rng(derive_seed(cfg_.seed, stream_++));
      for (std::size_t r = 0; r < runs; ++r) {
        inits.push_back(noise_image(cfg_.csa_size, cfg_.csa_size, training_.levels(), rng));
        seeds.push_back(rng.next());
      }
    }
    std::vector<AnnealResult> results(runs);
    parallel_for(runs, cfg_.threads, [&](std::size_t r) {
      Rng rng(seeds[r]);
      results[r] = anneal(model_, targets, inits[r], cfg_.csa_sweeps, cfg_.csa_rule, rng);
    });
    samples_.clear();
    for (std::size_t p = 0; p < P; ++p) {
      auto& theta = model_.potentials[p].theta;
      std::fill(theta.begin(), theta.end(), 0.0);
      std::vector<double> avg(theta.size(), 0.0);
      for (const auto& res : results)
        for (std::size_t b = 0; b < theta.size(); ++b) {
          theta[b] += res.theta[p][b] / static_cast<double>(runs);
          avg[b] += res.stats[p].freq[b] / static_cast<double>(runs);
        }
      log.potential_jsd.push_back(jsd(avg, targets[p].freq));
    }
    for (auto& res : results) samples_.push_back(std::move(res.image));
  }

  const GreyImage& training_;
  NestConfig cfg_;
  PieceSet pieces_;
  NestedModel model_;
  std::vector<GreyImage> samples_;
  std::map<std::string, TrainingStats> cache_;
  std::uint64_t stream_ = 0;
};

}  // namespace

NestResult nest(const GreyImage& training, std::span<const SelectorSpec> selectors, const NestConfig& cfg,
                const IterationCallback& on_iteration) {
  Nester n(training, cfg);
  return n.run(selectors, on_iteration);
}

std::string iteration_csv_header() {
  return "iteration,selector,candidates,max_score,selected,scores,potential_jsd,seconds";
}

std::string iteration_csv_row(const IterationLog& it) {
  std::ostringstream s;
  s.precision(10);
  s << it.iteration << ',' << it.selector << ',' << it.candidate_count << ',' << it.max_score << ",\"";
  for (std::size_t i = 0; i < it.selected.size(); ++i) {
    if (i) s << ';';
    s << tag_name(it.selected[i].candidate.kind.tag) << it.selected[i].candidate.kind.order;
    if (it.selected[i].candidate.kind.tag == FeatureTag::FilterHist)
      s << '#' << it.selected[i].candidate.kind.filter_index;
    else
      s << '[' << format_offsets(it.selected[i].candidate.offsets) << ']';
  }
  s << "\",\"";
  for (std::size_t i = 0; i < it.selected.size(); ++i) s << (i ? ";" : "") << it.selected[i].score;
  s << "\",\"";
  for (std::size_t i = 0; i < it.potential_jsd.size(); ++i) s << (i ? ";" : "") << it.potential_jsd[i];
  s << "\"," << it.seconds;
  return s.str();
}

}  // namespace mgrf
