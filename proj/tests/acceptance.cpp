// Acceptance run: one PASS/FAIL line per criterion. Pass criterion numbers as
// arguments to run a subset. Exit status is nonzero if any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "mgrf/config.hpp"
#include "mgrf/divergence.hpp"
#include "mgrf/error.hpp"
#include "mgrf/evaluation.hpp"
#include "mgrf/learning.hpp"
#include "support.hpp"

using namespace mgrf;
namespace fs = std::filesystem;

namespace {

// Tolerances and sizes.
constexpr int kC1Models = 20;
constexpr double kC1GradRel = 1e-6;
constexpr double kC1RelFloor = 1e-3;
constexpr long kC1Sweeps = 1000000;
constexpr double kC1BinTol = 0.02;
constexpr double kC1Seconds = 120;
constexpr int kC2Runs = 10;
constexpr int kC2Needed = 8;
constexpr double kC2Seconds = 600;
constexpr long kC3RandomTuples = 1000000;
constexpr int kC4Edits = 10000;
constexpr double kC4Tol = 1e-9;
constexpr int kC5Pairs = 10000;
constexpr double kC5Worked = 0.31128;
constexpr double kC5WorkedTol = 1e-5;
constexpr double kC6Threshold = 0.72;
constexpr int kC6Reps = 20;
constexpr int kC7Iterations = 8;
constexpr int kC7Needed = 6;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// 1 -------------------------------------------------------------------------

double exact_loglik(const NestedModel& m, const GreyImage& g) {
  return exact_log_likelihood(m, g, exact_expectations(m, g.width(), g.height()).log_z);
}

Outcome exact_inference() {
  const auto start = std::chrono::steady_clock::now();
  double worst_grad = 0, worst_bin = 0;
  for (int s = 0; s < kC1Models; ++s) {
    const auto m = testing::random_model(2, 100 + s, 0.8);
    const auto g = testing::random_image(3, 3, 2, 200 + s);
    const auto ex = exact_expectations(m, 3, 3);
    const auto obs = model_histograms(m, g);
    const auto grad = gradient(obs, ex.expected);
    std::size_t k = 0;
    for (std::size_t p = 0; p < m.potentials.size(); ++p)
      for (std::size_t b = 0; b < m.potentials[p].theta.size(); ++b, ++k) {
        // Five-point stencil.
        const double h = 1e-3;
        auto at = [&](double d) {
          auto mm = m;
          mm.potentials[p].theta[b] += d;
          return exact_loglik(mm, g);
        };
        const double fd = (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12 * h) / double(obs[p].clique_count);
        const double rel = std::abs(grad[k] - fd) / std::max({std::abs(fd), std::abs(grad[k]), kC1RelFloor});
        worst_grad = std::max(worst_grad, rel);
      }

    GibbsState st(m, testing::random_image(3, 3, 2, 300 + s));
    Rng rng(400 + s);
    std::vector<std::vector<double>> acc(m.potentials.size());
    for (std::size_t p = 0; p < acc.size(); ++p) acc[p].assign(st.counts(p).size(), 0.0);
    for (long t = 0; t < kC1Sweeps; ++t) {
      st.sweep(rng);
      for (std::size_t p = 0; p < acc.size(); ++p) {
        const auto& c = st.counts(p);
        for (std::size_t b = 0; b < c.size(); ++b) acc[p][b] += double(c[b]);
      }
    }
    for (std::size_t p = 0; p < acc.size(); ++p) {
      const double n = double(kC1Sweeps) * double(st.clique_count(p));
      for (std::size_t b = 0; b < acc[p].size(); ++b)
        worst_bin = std::max(worst_bin, std::abs(acc[p][b] / n - ex.expected[p].freq[b]));
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {worst_grad <= kC1GradRel && worst_bin <= kC1BinTol && secs < kC1Seconds,
          fmt("%d models, max gradient rel err %.2e (<= %.0e), max bin err %.4f (<= %.2f), %.1f s (< %.0f s)",
              kC1Models, worst_grad, kC1GradRel, worst_bin, kC1BinTol, secs, kC1Seconds)};
}

// 2 -------------------------------------------------------------------------

// Q=8 field with attractive GLD couplings at (5,0) and (0,7).
NestedModel ground_truth_model() {
  NestedModel m;
  m.levels = 8;
  for (Offset r : {Offset{5, 0}, Offset{0, 7}}) {
    auto p = make_potential(FeatureKind::gld(8), {{0, 0}, r});
    for (int b = 0; b < 15; ++b) p.theta[b] = 0.5 * std::abs(b - 7);
    m.potentials.push_back(std::move(p));
  }
  return m;
}

Outcome csa_fixed_point_and_recovery() {
  const auto start = std::chrono::steady_clock::now();
  bool fixed = true;
  for (int s = 0; s < 20; ++s) {
    const auto m = testing::random_model(6, 500 + s);
    GibbsState st(m, testing::random_image(20, 20, 6, 600 + s));
    for (auto rule : {StepRule::RobbinsMonro, StepRule::Adaptive}) {
      auto steps = StepState::initial(st);
      Rng rng(s);
      for (int t = 0; t < 5; ++t) {
        st.sweep(rng);
        std::vector<std::vector<double>> before;
        for (std::size_t p = 0; p < st.potential_count(); ++p) before.push_back(st.theta(p));
        anneal_update(st, st.histograms(), steps, rule);
        for (std::size_t p = 0; p < st.potential_count(); ++p) fixed = fixed && st.theta(p) == before[p];
      }
    }
  }

  const auto truth = ground_truth_model();
  int recovered = 0;
  std::string found;
  for (int run = 0; run < kC2Runs; ++run) {
    Rng rng(derive_seed(77, run));
    GibbsState st(truth, noise_image(160, 160, 8, rng));
    for (int t = 0; t < 200; ++t) st.sweep(rng);
    NestConfig cfg;
    cfg.use_marginal = false;
    cfg.seed = derive_seed(78, run);
    const SelectorSpec sel{SelectorFamily::GLD2, 2, 3};
    const auto res = nest(st.image(), std::span(&sel, 1), cfg);
    std::set<Offset> chosen;
    for (const auto& it : res.log)
      for (const auto& f : it.selected) chosen.insert(canonical_sign(f.candidate.offsets[1]));
    const bool ok = chosen.count({5, 0}) && chosen.count({0, 7});
    recovered += ok;
    found += ok ? "+" : "-";
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {fixed && recovered >= kC2Needed && secs < kC2Seconds,
          fmt("fixed point drift %s, true offsets recovered in %d/%d runs [%s] (>= %d), %.1f s (< %.0f s)",
              fixed ? "0" : "NONZERO", recovered, kC2Runs, found.c_str(), kC2Needed, secs, kC2Seconds)};
}

// 3 -------------------------------------------------------------------------

int ref_glc(const std::vector<int>& v, int Q) {
  int code = 0, mul = 1;
  for (int x : v) code += x * mul, mul *= Q;
  return code;
}
int ref_bp(const std::vector<int>& v) {
  int code = 0;
  for (std::size_t i = 1; i < v.size(); ++i) code |= (v[0] < v[i]) << (i - 1);
  return code;
}
int ref_be(const std::vector<int>& v, int c) {
  int code = 0;
  for (std::size_t i = 1; i < v.size(); ++i) code |= (std::abs(v[0] - v[i]) <= c) << (i - 1);
  return code;
}

Outcome feature_formulas() {
  const int Q = 8;
  long checked = 0, mismatches = 0;
  auto check = [&](const FeatureKind& k, const std::vector<int>& v, int expected) {
    ++checked;
    mismatches += eval_feature(k, v) != expected;
  };
  for (int d = 1; d <= 3; ++d) {
    std::vector<int> v(d);
    const int total = int(std::pow(Q, d));
    for (int code = 0; code < total; ++code) {
      int c = code;
      for (auto& x : v) x = c % Q, c /= Q;
      check(FeatureKind::glc(Q, d), v, ref_glc(v, Q));
      if (d == 1) check(FeatureKind::marginal(Q), v, v[0]);
      if (d == 2) check(FeatureKind::gld(Q), v, v[1] - v[0] + Q - 1);
      if (d >= 2) {
        check(FeatureKind::bp(Q, d), v, ref_bp(v));
        for (int t = 0; t < Q; ++t) check(FeatureKind::be(Q, d, t), v, ref_be(v, t));
      }
    }
  }
  std::mt19937_64 gen(3);
  std::uniform_int_distribution<int> level(0, Q - 1), thr(0, Q - 1);
  for (int d : {5, 9, 13}) {
    std::vector<int> v(d);
    for (long i = 0; i < kC3RandomTuples; ++i) {
      for (auto& x : v) x = level(gen);
      check(FeatureKind::bp(Q, d), v, ref_bp(v));
      const int t = thr(gen);
      check(FeatureKind::be(Q, d, t), v, ref_be(v, t));
      if (d == 5) check(FeatureKind::glc(Q, d), v, ref_glc(v, Q));
    }
  }
  return {mismatches == 0, fmt("%ld evaluations, %ld mismatches", checked, mismatches)};
}

// 4 -------------------------------------------------------------------------

// Energy from scratch: every clique fully inside the lattice, bins from the
// plain definitions.
double brute_energy(const NestedModel& m, const GreyImage& img) {
  double e = 0;
  for (const auto& p : m.potentials)
    for (int y = 0; y < img.height(); ++y)
      for (int x = 0; x < img.width(); ++x) {
        std::vector<int> v;
        for (auto o : p.offsets)
          if (img.contains(x + o.dx, y + o.dy)) v.push_back(img.at(x + o.dx, y + o.dy));
        if (v.size() != p.offsets.size()) continue;
        int b = 0;
        switch (p.kind.tag) {
          case FeatureTag::Marginal: b = v[0]; break;
          case FeatureTag::GLC: b = ref_glc(v, p.kind.levels); break;
          case FeatureTag::GLD: b = v[1] - v[0] + p.kind.levels - 1; break;
          case FeatureTag::BP: b = ref_bp(v); break;
          case FeatureTag::BE: b = ref_be(v, p.kind.be_threshold); break;
          default: break;
        }
        e += p.theta[b];
      }
  return e;
}

Outcome delta_updates() {
  std::mt19937_64 gen(11);
  const int per_model = 500;
  double worst = 0;
  long hist_mismatch = 0;
  for (int s = 0; s < kC4Edits / per_model; ++s) {
    const int Q = 2 + s % 7, W = 9 + s % 5, H = 8 + s % 4;
    const auto m = testing::random_model(Q, 700 + s);
    auto img = testing::random_image(W, H, Q, 800 + s);
    GibbsState st(m, img);
    for (int k = 0; k < per_model; ++k) {
      const int x = int(gen() % W), y = int(gen() % H), v = int(gen() % Q);
      st.set_pixel(x, y, v);
      img.at(x, y) = static_cast<std::uint8_t>(v);
      const double full = brute_energy(m, img);
      worst = std::max(worst, std::abs(st.energy() - full) / std::max(1.0, std::abs(full)));
      if (k % 50 == 0)
        for (std::size_t p = 0; p < m.potentials.size(); ++p)
          hist_mismatch += st.counts(p) != count_histogram(m.potentials[p].kind, m.potentials[p].offsets, img);
    }
    for (std::size_t p = 0; p < m.potentials.size(); ++p)
      hist_mismatch += st.counts(p) != count_histogram(m.potentials[p].kind, m.potentials[p].offsets, img);
  }
  return {worst <= kC4Tol && hist_mismatch == 0,
          fmt("%d edits, max energy rel diff %.2e (<= %.0e), histogram mismatches %ld", kC4Edits, worst, kC4Tol,
              hist_mismatch)};
}

// 5 -------------------------------------------------------------------------

double ref_jsd(const std::vector<double>& p, const std::vector<double>& q) {
  double kp = 0, kq = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double m = (p[i] + q[i]) / 2;
    if (p[i] > 0) kp += p[i] * std::log(p[i] / m);
    if (q[i] > 0) kq += q[i] * std::log(q[i] / m);
  }
  return (kp + kq) / 2 / std::log(2.0);
}

Outcome jsd_properties() {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0, 1);
  int violations = 0;
  double worst_ref = 0;
  for (int i = 0; i < kC5Pairs; ++i) {
    const std::size_t n = 2 + gen() % 30;
    auto draw = [&] {
      std::vector<double> v(n);
      double s = 0;
      for (auto& x : v) s += x = u(gen) < 0.2 ? 0.0 : u(gen);
      if (s == 0) v[0] = s = 1;
      for (auto& x : v) x /= s;
      return v;
    };
    const auto p = draw(), q = draw();
    const double a = jsd(p, q), b = jsd(q, p);
    violations += a != b;
    violations += a < 0 || a > 1;
    violations += jsd(p, p) != 0;
    violations += p != q && !(a > 0);
    worst_ref = std::max(worst_ref, std::abs(a - ref_jsd(p, q)));
  }
  const double worked = jsd(std::vector<double>{0.5, 0.5}, std::vector<double>{1.0, 0.0});
  const bool worked_ok = std::abs(worked - kC5Worked) <= kC5WorkedTol;
  return {violations == 0 && worked_ok && worst_ref < 1e-12,
          fmt("%d pairs, %d property violations, max diff from reference %.1e, jsd((.5,.5),(1,0)) = %.6f "
              "(%.5f +- %.0e)",
              kC5Pairs, violations, worst_ref, worked, kC5Worked, kC5WorkedTol)};
}

// 6 -------------------------------------------------------------------------

BenchmarkConfig jagstar_benchmark_config() {
  BenchmarkConfig cfg;
  cfg.selectors = {default_selector(SelectorFamily::JagStarBP9)};
  cfg.reps = kC6Reps;
  cfg.threads = default_threads();
  cfg.nest.threads = cfg.threads;
  return cfg;
}

Outcome inpainting_reproduction() {
  std::vector<fs::path> dirs;
  if (const char* env = std::getenv("MGRF_TEXTURE_DIR")) dirs.emplace_back(env);
  dirs.emplace_back(fs::path(MGRF_SOURCE_DIR) / "assets");
  dirs.emplace_back(fs::path(MGRF_SOURCE_DIR) / "tests" / "assets");
  for (const auto& dir : dirs) {
    fs::path file;
    try {
      file = find_texture(dir, "D77");
    } catch (const Error&) {
      continue;
    }
    const auto r = inpaint_benchmark("D77", dir, jagstar_benchmark_config());
    return {r.mean >= kC6Threshold,
            fmt("D77 jag-star BP9, %d reps: mean MSSIM %.3f sd %.3f (>= %.2f), %s, %.0f s", r.reps, r.mean, r.sd,
                kC6Threshold, file.string().c_str(), r.seconds)};
  }
  std::string where;
  for (const auto& d : dirs) where += (where.empty() ? "" : ", ") + d.string();
  return {false, "D77 texture not found (searched " + where + "; set MGRF_TEXTURE_DIR)"};
}

// Not gating: the same protocol on a synthetic regular texture, so the
// harness is exercised even without the photographic assets.
std::string inpainting_proxy() {
  auto cfg = jagstar_benchmark_config();
  const auto r = inpaint_benchmark_image("synthetic-regular", testing::regular_texture(384, 384, 9), cfg);
  return fmt("synthetic regular texture, jag-star BP9, %d reps: mean MSSIM %.3f sd %.3f, unsmoothed %.3f, %.0f s",
             r.reps, r.mean, r.sd, r.mean_unsmoothed, r.seconds);
}

// 7 -------------------------------------------------------------------------

Outcome nesting_trajectory() {
  RunConfig rc = default_run_config();
  const auto training = preprocess_training(testing::regular_texture(256, 256, 3), rc);
  auto cfg = rc.nest;
  cfg.seed = 7;
  const SelectorSpec sel{SelectorFamily::GLD2, kC7Iterations, 3};
  const auto res = nest(training, std::span(&sel, 1), cfg);
  std::vector<double> m;
  for (const auto& it : res.log)
    if (!it.selected.empty()) m.push_back(it.max_score);
  m.push_back(res.selector_final_max_score.at(0));
  int ok = 0;
  std::string seq;
  for (std::size_t i = 0; i < m.size(); ++i) {
    seq += fmt("%s%.4f", i ? " " : "", m[i]);
    if (i > 0) ok += m[i] <= m[i - 1];
  }
  return {ok >= kC7Needed,
          fmt("max candidate JSD non-increasing in %d/%d steps (>= %d): %s", ok, kC7Iterations, kC7Needed, seq.c_str())};
}

// 8 -------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const auto dir = testing::temp_dir("acceptance_c8");
  const auto tex = dir / "tex.pgm";
  save_image(testing::pattern_image(160, 160, 21), tex, false);
  std::ofstream(dir / "run.cfg") << "training = " << tex.string() << "\nseed = 42\nthreads = 2\n";
  auto train = [&](const std::string& out) {
    const std::string cmd = std::string(MGRF_CLI_PATH) + " train -c " + (dir / "run.cfg").string() + " -o " +
                            (dir / out).string() + " >/dev/null 2>&1";
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) && WEXITSTATUS(st) == 0;
  };
  if (!train("a") || !train("b")) return {false, "train command failed"};
  const auto a = slurp(dir / "a" / "model.mgrf"), b = slurp(dir / "b" / "model.mgrf");
  return {!a.empty() && a == b, fmt("two train runs: %zu and %zu bytes, %s", a.size(), b.size(),
                                    a == b ? "identical" : "DIFFERENT")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"exact-inference oracle", exact_inference},
      {"CSA fixed point and offset recovery", csa_fixed_point_and_recovery},
      {"feature formulas", feature_formulas},
      {"histogram delta updates", delta_updates},
      {"JSD properties", jsd_properties},
      {"D77 inpainting reproduction", inpainting_reproduction},
      {"nesting trajectory", nesting_trajectory},
      {"train determinism", determinism},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = int(i) + 1;
    if (!wanted.empty() && !wanted.count(id)) continue;
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("C%d %s  %s: %s [%.1f s]\n", id, o.pass ? "PASS" : "FAIL", criteria[i].first, o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
    if (id == 6 && std::getenv("MGRF_ACCEPTANCE_PROXY")) {
      try {
        std::printf("C6 info  %s\n", inpainting_proxy().c_str());
      } catch (const std::exception& e) {
        std::printf("C6 info  proxy failed: %s\n", e.what());
      }
      std::fflush(stdout);
    }
  }
  return failed == 0 ? 0 : 1;
}
