#include "mgrf/evaluation.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

#include "mgrf/error.hpp"
#include "mgrf/parallel.hpp"

namespace mgrf {

namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;

std::vector<double> gaussian_taps() {
  std::vector<double> g(kWindow);
  double sum = 0.0;
  for (int i = 0; i < kWindow; ++i) {
    const double d = i - kWindow / 2;
    g[static_cast<std::size_t>(i)] = std::exp(-d * d / (2 * kSigma * kSigma));
    sum += g[static_cast<std::size_t>(i)];
  }
  for (auto& v : g) v /= sum;
  return g;
}

// Separable valid-region Gaussian filtering.
std::vector<double> blur_valid(const std::vector<double>& img, int w, int h, const std::vector<double>& g) {
  const int ow = w - kWindow + 1, oh = h - kWindow + 1;
  std::vector<double> rows(static_cast<std::size_t>(ow) * h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k) acc += g[static_cast<std::size_t>(k)] * img[static_cast<std::size_t>(y) * w + x + k];
      rows[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  std::vector<double> out(static_cast<std::size_t>(ow) * oh);
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k) acc += g[static_cast<std::size_t>(k)] * rows[static_cast<std::size_t>(y + k) * ow + x];
      out[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  return out;
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

}  // namespace

double mssim(const GreyImage& a, const GreyImage& b) {
  if (a.width() != b.width() || a.height() != b.height())
    fail(ErrorKind::InvalidArgument, "mssim: image dimensions differ");
  require(a.width() >= kWindow && a.height() >= kWindow, "mssim: images smaller than the 11x11 window");
  const double L = a.levels() - 1;
  const double c1 = (0.01 * L) * (0.01 * L), c2 = (0.03 * L) * (0.03 * L);
  const int w = a.width(), h = a.height();
  std::vector<double> x(a.size()), y(b.size()), xx(a.size()), yy(a.size()), xy(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    x[i] = a.pixels()[i];
    y[i] = b.pixels()[i];
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  const auto g = gaussian_taps();
  const auto mx = blur_valid(x, w, h, g), my = blur_valid(y, w, h, g);
  const auto sxx = blur_valid(xx, w, h, g), syy = blur_valid(yy, w, h, g), sxy = blur_valid(xy, w, h, g);
  double acc = 0.0;
  for (std::size_t i = 0; i < mx.size(); ++i) {
    const double vx = sxx[i] - mx[i] * mx[i], vy = syy[i] - my[i] * my[i], cxy = sxy[i] - mx[i] * my[i];
    acc += ((2 * mx[i] * my[i] + c1) * (2 * cxy + c2)) / ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
  }
  return acc / static_cast<double>(mx.size());
}

ExactStats exact_expectations(const NestedModel& model, int width, int height) {
  const double states = std::pow(static_cast<double>(model.levels), width * height);
  if (states > kMaxEnumerationStates) fail(ErrorKind::InvalidArgument, "state space too large for enumeration");
  const auto n = static_cast<std::int64_t>(states);
  std::size_t D = 0;
  for (const auto& p : model.potentials) D += p.theta.size();

  GreyImage img(width, height, model.levels);
  std::vector<double> log_w(static_cast<std::size_t>(n));
  std::vector<std::vector<double>> feats(static_cast<std::size_t>(n));
  for (std::int64_t s = 0; s < n; ++s) {
    auto code = s;
    for (auto& v : img.pixels()) {
      v = static_cast<std::uint8_t>(code % model.levels);
      code /= model.levels;
    }
    auto& f = feats[static_cast<std::size_t>(s)];
    f.reserve(D);
    double e = 0.0;
    for (const auto& p : model.potentials) {
      const auto counts = count_histogram(p.kind, p.offsets, img);
      for (std::size_t b = 0; b < counts.size(); ++b) {
        f.push_back(static_cast<double>(counts[b]));
        e += p.theta[b] * static_cast<double>(counts[b]);
      }
    }
    log_w[static_cast<std::size_t>(s)] = -e;
  }
  const double top = *std::max_element(log_w.begin(), log_w.end());
  double z = 0.0;
  for (double lw : log_w) z += std::exp(lw - top);
  ExactStats out;
  out.log_z = top + std::log(z);
  out.mean_counts.assign(D, 0.0);
  out.covariance.assign(D * D, 0.0);
  for (std::int64_t s = 0; s < n; ++s) {
    const double pr = std::exp(log_w[static_cast<std::size_t>(s)] - out.log_z);
    const auto& f = feats[static_cast<std::size_t>(s)];
    for (std::size_t i = 0; i < D; ++i) out.mean_counts[i] += pr * f[i];
  }
  for (std::int64_t s = 0; s < n; ++s) {
    const double pr = std::exp(log_w[static_cast<std::size_t>(s)] - out.log_z);
    const auto& f = feats[static_cast<std::size_t>(s)];
    for (std::size_t i = 0; i < D; ++i)
      for (std::size_t j = 0; j < D; ++j)
        out.covariance[i * D + j] += pr * (f[i] - out.mean_counts[i]) * (f[j] - out.mean_counts[j]);
  }
  std::size_t k = 0;
  for (const auto& p : model.potentials) {
    HistogramStats h;
    h.clique_count = CliqueExtent::of(p.offsets).clique_count(width, height);
    for (std::size_t b = 0; b < p.theta.size(); ++b)
      h.freq.push_back(out.mean_counts[k++] / static_cast<double>(h.clique_count));
    out.expected.push_back(std::move(h));
  }
  return out;
}

double exact_log_likelihood(const NestedModel& model, const GreyImage& img, double log_z) {
  return -energy(model, img) - log_z;
}

double benchmark_scale(const std::string& texture_id) {
  if (texture_id == "D6" || texture_id == "D53") return 0.5;
  if (texture_id == "D21" || texture_id == "D77") return 0.75;
  return 1.0;
}

std::filesystem::path find_texture(const std::filesystem::path& dir, const std::string& texture_id) {
  for (const char* ext : {".pgm", ".png", ".PGM", ".PNG"}) {
    auto p = dir / (texture_id + ext);
    if (std::filesystem::exists(p)) return p;
  }
  fail(ErrorKind::Io, "missing texture asset '" + texture_id + "' in " + dir.string());
}

BenchmarkReport inpaint_benchmark_image(const std::string& name, const GreyImage& source,
                                        const BenchmarkConfig& cfg) {
  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  require(cfg.reps >= 1, "benchmark needs at least one repetition");
  require(source.levels() == 256, "benchmark source must have 256 levels");
  const int half = source.height() / 2;
  require(half >= cfg.frame && source.width() >= cfg.frame, "texture too small for the benchmark frame");
  const GreyImage quantized = uniform_quantize(source, cfg.levels);
  const GreyImage train = quantized.crop(0, 0, source.width(), half);
  const int test_y = half, test_h = source.height() - half;

  NestConfig nc = cfg.nest;
  nc.use_marginal = false;
  nc.seed = derive_seed(cfg.seed, 1);
  nc.threads = cfg.threads;
  const NestedModel model = nest(train, cfg.selectors, nc).model;
  BenchmarkReport rep;
  rep.texture = name;
  rep.reps = cfg.reps;
  rep.train_seconds = std::chrono::duration<double>(Clock::now() - t0).count();

  const Rect hole = centered_hole(cfg.frame, cfg.frame, cfg.hole, cfg.hole);
  const auto n = static_cast<std::size_t>(cfg.reps);
  std::vector<double> hole_q(n), hole_raw(n), frame_q(n), unsmoothed(n);
  parallel_for(n, cfg.threads, [&](std::size_t r) {
    Rng rng(derive_seed(cfg.seed, 1000 + r));
    const int fx = static_cast<int>(rng.below(static_cast<std::uint64_t>(source.width() - cfg.frame + 1)));
    const int fy = test_y + static_cast<int>(rng.below(static_cast<std::uint64_t>(test_h - cfg.frame + 1)));
    const GreyImage truth = quantized.crop(fx, fy, cfg.frame, cfg.frame);
    const GreyImage truth256 = source.crop(fx, fy, cfg.frame, cfg.frame);
    const auto result = inpaint(model, truth, hole, cfg.sweeps, cfg.smooth_window, rng);
    const auto out_hole = result.smoothed.crop(hole.x, hole.y, hole.w, hole.h);
    hole_q[r] = mssim(truth.crop(hole.x, hole.y, hole.w, hole.h), out_hole);
    GreyImage out256(hole.w, hole.h, 256);
    for (std::size_t i = 0; i < out256.size(); ++i)
      out256.pixels()[i] = rescale_level(out_hole.pixels()[i], cfg.levels);
    hole_raw[r] = mssim(truth256.crop(hole.x, hole.y, hole.w, hole.h), out256);
    frame_q[r] = mssim(truth, result.smoothed);
    unsmoothed[r] = mssim(truth.crop(hole.x, hole.y, hole.w, hole.h), result.raw.crop(hole.x, hole.y, hole.w, hole.h));
  });
  rep.scores = hole_q;
  rep.mean = mean_of(hole_q);
  rep.sd = sd_of(hole_q);
  rep.mean_raw256 = mean_of(hole_raw);
  rep.sd_raw256 = sd_of(hole_raw);
  rep.mean_frame = mean_of(frame_q);
  rep.sd_frame = sd_of(frame_q);
  rep.mean_unsmoothed = mean_of(unsmoothed);
  rep.sd_unsmoothed = sd_of(unsmoothed);
  rep.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return rep;
}

BenchmarkReport inpaint_benchmark(const std::string& texture_id, const std::filesystem::path& texture_dir,
                                  const BenchmarkConfig& cfg) {
  const GreyImage raw = load_image(find_texture(texture_dir, texture_id));
  const double scale = benchmark_scale(texture_id);
  const GreyImage src = scale == 1.0 ? raw : bilinear_scale(raw, scale);
  return inpaint_benchmark_image(texture_id, src, cfg);
}

std::string benchmark_csv_header() {
  return "texture,reps,mssim_hole_mean,mssim_hole_sd,mssim_hole_raw256_mean,mssim_hole_raw256_sd,"
         "mssim_frame_mean,mssim_frame_sd,mssim_unsmoothed_mean,mssim_unsmoothed_sd,train_seconds,seconds";
}

std::string benchmark_csv_row(const BenchmarkReport& r) {
  std::ostringstream s;
  s.precision(6);
  s << r.texture << ',' << r.reps << ',' << r.mean << ',' << r.sd << ',' << r.mean_raw256 << ',' << r.sd_raw256
    << ',' << r.mean_frame << ',' << r.sd_frame << ',' << r.mean_unsmoothed << ',' << r.sd_unsmoothed << ','
    << r.train_seconds << ',' << r.seconds;
  return s.str();
}

std::string benchmark_table(const std::vector<BenchmarkReport>& reports) {
  std::ostringstream s;
  s << std::left << std::setw(10) << "texture" << std::setw(6) << "reps" << std::setw(18) << "MSSIM hole"
    << std::setw(18) << "hole vs 256" << std::setw(18) << "frame" << std::setw(18) << "unsmoothed" << "time(s)\n";
  s << std::fixed << std::setprecision(2);
  for (const auto& r : reports) {
    auto pm = [](double m, double sd) {
      std::ostringstream t;
      t << std::fixed << std::setprecision(2) << m << " +- " << sd;
      return t.str();
    };
    s << std::setw(10) << r.texture << std::setw(6) << r.reps << std::setw(18) << pm(r.mean, r.sd) << std::setw(18)
      << pm(r.mean_raw256, r.sd_raw256) << std::setw(18) << pm(r.mean_frame, r.sd_frame) << std::setw(18)
      << pm(r.mean_unsmoothed, r.sd_unsmoothed) << std::setprecision(0) << r.seconds << std::setprecision(2)
      << '\n';
  }
  return s.str();
}

}  // namespace mgrf
