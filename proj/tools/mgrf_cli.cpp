// mgrf: train, synthesise, inpaint and benchmark nested MGRF texture models.
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "mgrf/mgrf.h"

namespace fs = std::filesystem;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

struct Failure {
  int code;
  std::string message;
};

void check(mgrf_status s, int code = kExitRuntime) {
  if (s != MGRF_OK) throw Failure{code, mgrf_last_error()};
}

// Owning wrappers over the C handles.
template <typename T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() {
    if (p) Free(p);
  }
  T** out() { return &p; }
  T* get() const { return p; }
};
using Image = Handle<mgrf_image, mgrf_image_free>;
using Model = Handle<mgrf_model, mgrf_model_free>;
using Config = Handle<mgrf_config, mgrf_config_free>;

std::string take(char* s) {
  std::string out = s ? s : "";
  mgrf_string_free(s);
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Failure{kExitRuntime, "cannot write " + path.string()};
  out << text;
}

// Shared config handling: --config file, then named flags, then --set pairs.
struct ConfigOptions {
  std::string path;
  std::vector<std::string> sets;
  std::map<std::string, std::string> flags;

  void add(CLI::App* app) {
    app->add_option("-c,--config", path, "Run configuration (key = value lines)");
    app->add_option("--set", sets, "Override a config key: key=value (repeatable)");
  }

  void flag(CLI::App* app, const std::string& name, const std::string& key, const std::string& help) {
    app->add_option(name, flags[key], help);
  }

  void resolve(Config& cfg) const {
    if (path.empty())
      check(mgrf_config_create(cfg.out()), kExitUsage);
    else
      check(mgrf_config_load(path.c_str(), cfg.out()), kExitUsage);
    for (const auto& [key, value] : flags)
      if (!value.empty()) check(mgrf_config_set(cfg.get(), key.c_str(), value.c_str()), kExitUsage);
    for (const auto& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw Failure{kExitUsage, "--set expects key=value, got '" + kv + "'"};
      check(mgrf_config_set(cfg.get(), kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()), kExitUsage);
    }
  }
};

std::string get(const Config& cfg, const char* key) {
  char* v = nullptr;
  check(mgrf_config_get(cfg.get(), key, &v));
  return take(v);
}

std::uint64_t seed_of(const Config& cfg) { return std::stoull(get(cfg, "seed")); }

void on_progress(const char* row, void*) { std::cerr << row << '\n'; }

int cmd_train(const ConfigOptions& opts) {
  Config cfg;
  opts.resolve(cfg);
  const std::string training = get(cfg, "training");
  if (training.empty()) throw Failure{kExitUsage, "no training image given (training key or --training)"};
  const fs::path out = get(cfg, "output_dir");
  check(mgrf_config_write_resolved(cfg.get(), out.c_str()));
  Image raw;
  check(mgrf_image_load(training.c_str(), raw.out()));
  Model model;
  char* log = nullptr;
  check(mgrf_train(cfg.get(), raw.get(), on_progress, nullptr, model.out(), &log));
  write_text(out / "log.csv", take(log));
  const fs::path model_path = get(cfg, "model").empty() ? out / "model.mgrf" : fs::path(get(cfg, "model"));
  check(mgrf_model_save(model.get(), model_path.c_str()));
  int potentials = 0;
  check(mgrf_model_info(model.get(), nullptr, &potentials));
  std::cout << "wrote " << model_path.string() << " (" << potentials << " potentials)\n";
  return 0;
}

int cmd_synth(const ConfigOptions& opts, const std::string& output) {
  Config cfg;
  opts.resolve(cfg);
  const std::string model_path = get(cfg, "model"), training = get(cfg, "training");
  if (model_path.empty()) throw Failure{kExitUsage, "no model given (model key or --model)"};
  if (training.empty()) throw Failure{kExitUsage, "no training image given for the seed patch"};
  Model model;
  check(mgrf_model_load(model_path.c_str(), model.out()));
  Image raw, result;
  check(mgrf_image_load(training.c_str(), raw.out()));
  check(mgrf_synthesize(model.get(), cfg.get(), raw.get(), seed_of(cfg), result.out()));
  const fs::path path = output.empty() ? fs::path(get(cfg, "output_dir")) / "synth.png" : fs::path(output);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  check(mgrf_config_write_resolved(cfg.get(), path.has_parent_path() ? path.parent_path().c_str() : "."));
  check(mgrf_image_save(result.get(), path.c_str(), 1));
  std::cout << "wrote " << path.string() << '\n';
  return 0;
}

int cmd_inpaint(const ConfigOptions& opts, const std::string& frame_path) {
  Config cfg;
  opts.resolve(cfg);
  const std::string model_path = get(cfg, "model");
  if (model_path.empty()) throw Failure{kExitUsage, "no model given (model key or --model)"};
  Model model;
  check(mgrf_model_load(model_path.c_str(), model.out()));
  int levels = 0;
  check(mgrf_model_info(model.get(), &levels, nullptr));
  Image loaded;
  check(mgrf_image_load(frame_path.c_str(), loaded.out()));
  int fw = 0, fh = 0, fl = 0;
  check(mgrf_image_info(loaded.get(), &fw, &fh, &fl));
  Image quantized;
  const mgrf_image* frame = loaded.get();
  if (fl != levels) {
    check(mgrf_image_uniform(loaded.get(), levels, quantized.out()));
    frame = quantized.get();
  }
  const int hole = std::stoi(get(cfg, "hole"));
  int hx = 0, hy = 0;
  check(mgrf_centered_hole(fw, fh, hole, hole, &hx, &hy), kExitUsage);
  const int sweeps = std::stoi(get(cfg, "inpaint_sweeps")), window = std::stoi(get(cfg, "smooth_window"));
  const int reps = std::stoi(get(cfg, "reps"));
  const fs::path out = get(cfg, "output_dir");
  check(mgrf_config_write_resolved(cfg.get(), out.c_str()));

  Image truth;
  check(mgrf_image_crop(frame, hx, hy, hole, hole, truth.out()));
  std::ostringstream csv;
  csv << "rep,mssim_raw,mssim_smoothed\n";
  double sum_raw = 0, sum_smooth = 0;
  for (int r = 0; r < reps; ++r) {
    Image raw, smoothed;
    check(mgrf_inpaint(model.get(), frame, hx, hy, hole, hole, sweeps, window, seed_of(cfg) + static_cast<unsigned>(r),
                       raw.out(), smoothed.out()));
    double s_raw = 0, s_smooth = 0;
    Image raw_hole, smooth_hole;
    check(mgrf_image_crop(raw.get(), hx, hy, hole, hole, raw_hole.out()));
    check(mgrf_image_crop(smoothed.get(), hx, hy, hole, hole, smooth_hole.out()));
    check(mgrf_mssim(truth.get(), raw_hole.get(), &s_raw));
    check(mgrf_mssim(truth.get(), smooth_hole.get(), &s_smooth));
    sum_raw += s_raw;
    sum_smooth += s_smooth;
    csv << r << ',' << s_raw << ',' << s_smooth << '\n';
    if (r == 0) {
      check(mgrf_image_save(raw.get(), (out / "inpaint_raw.png").c_str(), 1));
      check(mgrf_image_save(smoothed.get(), (out / "inpaint_smoothed.png").c_str(), 1));
    }
  }
  write_text(out / "inpaint_scores.csv", csv.str());
  std::cout << "mean MSSIM over hole: raw " << sum_raw / reps << ", smoothed " << sum_smooth / reps << '\n';
  return 0;
}

int cmd_bench(const ConfigOptions& opts) {
  Config cfg;
  opts.resolve(cfg);
  const fs::path out = get(cfg, "output_dir");
  check(mgrf_config_write_resolved(cfg.get(), out.c_str()));
  std::vector<mgrf_bench_report> reports;
  std::stringstream ids(get(cfg, "textures"));
  for (std::string id; std::getline(ids, id, ',');) {
    if (id.empty()) continue;
    mgrf_bench_report r{};
    check(mgrf_bench(cfg.get(), id.c_str(), &r));
    reports.push_back(r);
    std::cerr << id << ": " << r.mean << " +- " << r.sd << '\n';
  }
  char* csv = nullptr;
  char* table = nullptr;
  check(mgrf_bench_format(reports.data(), reports.size(), 1, &csv));
  check(mgrf_bench_format(reports.data(), reports.size(), 0, &table));
  write_text(out / "bench.csv", take(csv));
  std::cout << take(table);
  return 0;
}

int cmd_inspect(const std::string& path) {
  Model model;
  check(mgrf_model_load(path.c_str(), model.out()));
  char* text = nullptr;
  check(mgrf_model_describe(model.get(), &text));
  std::cout << take(text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nested Markov-Gibbs random field texture models"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(mgrf_version()));

  ConfigOptions train_opts, synth_opts, inpaint_opts, bench_opts;
  std::string synth_out, frame_path, model_path;

  auto* train = app.add_subcommand("train", "Learn a nested model from a training texture");
  train_opts.add(train);
  train_opts.flag(train, "-i,--training", "training", "Training image (PGM or PNG)");
  train_opts.flag(train, "-o,--out", "output_dir", "Output directory");
  train_opts.flag(train, "-m,--model", "model", "Model file path (default <out>/model.mgrf)");
  train_opts.flag(train, "--selectors", "selectors", "Selector sequence, e.g. gld2:8:3,jagstar9:8:1");
  train_opts.flag(train, "--levels", "levels", "Grey levels Q");
  train_opts.flag(train, "--seed", "seed", "Master seed");
  train_opts.flag(train, "--threads", "threads", "Worker thread cap");

  auto* synth = app.add_subcommand("synth", "Synthesise a texture from a model");
  synth_opts.add(synth);
  synth_opts.flag(synth, "-m,--model", "model", "Model file");
  synth_opts.flag(synth, "-i,--training", "training", "Training image supplying the seed patch");
  synth_opts.flag(synth, "--width", "synth_width", "Output width");
  synth_opts.flag(synth, "--height", "synth_height", "Output height");
  synth_opts.flag(synth, "--sweeps", "synth_sweeps", "Annealing sweeps");
  synth_opts.flag(synth, "--freeze", "freeze_theta", "true: plain Gibbs with fixed parameters");
  synth_opts.flag(synth, "--seed", "seed", "Seed");
  synth->add_option("-o,--output", synth_out, "Output image (.png or .pgm)");

  auto* inpaint = app.add_subcommand("inpaint", "Fill the centred hole of a frame");
  inpaint_opts.add(inpaint);
  inpaint_opts.flag(inpaint, "-m,--model", "model", "Model file");
  inpaint->add_option("-f,--frame", frame_path, "Frame image")->required();
  inpaint_opts.flag(inpaint, "--hole", "hole", "Hole side");
  inpaint_opts.flag(inpaint, "--sweeps", "inpaint_sweeps", "Gibbs sweeps");
  inpaint_opts.flag(inpaint, "--smooth", "smooth_window", "Samples averaged for the smoothed output");
  inpaint_opts.flag(inpaint, "--reps", "reps", "Repetitions");
  inpaint_opts.flag(inpaint, "-o,--out", "output_dir", "Output directory");
  inpaint_opts.flag(inpaint, "--seed", "seed", "Seed");

  auto* bench = app.add_subcommand("bench", "Run the inpainting benchmark");
  bench_opts.add(bench);
  bench_opts.flag(bench, "--textures", "textures", "Comma-separated texture ids");
  bench_opts.flag(bench, "--texture-dir", "texture_dir", "Directory holding <id>.pgm/.png");
  bench_opts.flag(bench, "--selectors", "selectors", "Selector sequence");
  bench_opts.flag(bench, "--reps", "reps", "Repetitions per texture");
  bench_opts.flag(bench, "-o,--out", "output_dir", "Output directory");
  bench_opts.flag(bench, "--seed", "seed", "Master seed");
  bench_opts.flag(bench, "--threads", "threads", "Worker thread cap");

  auto* inspect = app.add_subcommand("inspect", "Print a model's potentials and clique shapes");
  inspect->add_option("model", model_path, "Model file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*train) return cmd_train(train_opts);
    if (*synth) return cmd_synth(synth_opts, synth_out);
    if (*inpaint) return cmd_inpaint(inpaint_opts, frame_path);
    if (*bench) return cmd_bench(bench_opts);
    if (*inspect) return cmd_inspect(model_path);
  } catch (const Failure& f) {
    std::cerr << "mgrf: " << f.message << '\n';
    return f.code;
  } catch (const std::exception& e) {
    std::cerr << "mgrf: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
