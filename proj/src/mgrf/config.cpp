#include "mgrf/config.hpp"

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

#include "mgrf/error.hpp"

namespace mgrf {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

long long to_int(const std::string& key, const std::string& v) {
  long long out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    fail(ErrorKind::InvalidArgument, "key '" + key + "': expected an integer, got '" + v + "'");
  return out;
}

int to_positive(const std::string& key, const std::string& v) {
  const auto n = to_int(key, v);
  if (n < 1 || n > 1'000'000'000)
    fail(ErrorKind::InvalidArgument, "key '" + key + "': expected a positive integer, got '" + v + "'");
  return static_cast<int>(n);
}

double to_real(const std::string& key, const std::string& v) {
  double out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    fail(ErrorKind::InvalidArgument, "key '" + key + "': expected a number, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  fail(ErrorKind::InvalidArgument, "key '" + key + "': expected true/false, got '" + v + "'");
}

std::string real_text(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

std::string bool_text(bool b) { return b ? "true" : "false"; }

std::string selectors_text(const std::vector<SelectorSpec>& s) {
  std::string out;
  for (const auto& spec : s) {
    if (!out.empty()) out += ',';
    out += selector_name(spec.family) + ':' + std::to_string(spec.iterations) + ':' + std::to_string(spec.add_count);
  }
  return out;
}

struct Field {
  const char* key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"training", [](const RunConfig& c) { return c.training; }, [](RunConfig& c, const std::string& v) { c.training = v; }},
      {"output_dir", [](const RunConfig& c) { return c.output_dir; },
       [](RunConfig& c, const std::string& v) { c.output_dir = v; }},
      {"model", [](const RunConfig& c) { return c.model; }, [](RunConfig& c, const std::string& v) { c.model = v; }},
      {"levels", [](const RunConfig& c) { return std::to_string(c.levels); },
       [](RunConfig& c, const std::string& v) {
         c.levels = to_positive("levels", v);
         require(c.levels >= 2 && c.levels <= 256, "key 'levels': must lie in 2..256");
       }},
      {"quantize", [](const RunConfig& c) { return c.quantize; },
       [](RunConfig& c, const std::string& v) {
         require(v == "clahe" || v == "uniform" || v == "none", "key 'quantize': expected clahe, uniform or none");
         c.quantize = v;
       }},
      {"clahe_tiles", [](const RunConfig& c) { return std::to_string(c.clahe_tiles); },
       [](RunConfig& c, const std::string& v) { c.clahe_tiles = to_positive("clahe_tiles", v); }},
      {"clahe_clip", [](const RunConfig& c) { return real_text(c.clahe_clip); },
       [](RunConfig& c, const std::string& v) {
         c.clahe_clip = to_real("clahe_clip", v);
         require(c.clahe_clip > 0 && c.clahe_clip <= 1, "key 'clahe_clip': must lie in (0, 1]");
       }},
      {"selectors", [](const RunConfig& c) { return selectors_text(c.selectors); },
       [](RunConfig& c, const std::string& v) { c.selectors = parse_selectors(v); }},
      {"use_marginal", [](const RunConfig& c) { return bool_text(c.nest.use_marginal); },
       [](RunConfig& c, const std::string& v) { c.nest.use_marginal = to_bool("use_marginal", v); }},
      {"max_radius", [](const RunConfig& c) { return real_text(c.nest.max_radius); },
       [](RunConfig& c, const std::string& v) {
         c.nest.max_radius = to_real("max_radius", v);
         require(c.nest.max_radius >= 1, "key 'max_radius': must be at least 1");
       }},
      {"piece_size", [](const RunConfig& c) { return std::to_string(c.nest.piece_size); },
       [](RunConfig& c, const std::string& v) { c.nest.piece_size = to_positive("piece_size", v); }},
      {"piece_overlap", [](const RunConfig& c) { return std::to_string(c.nest.piece_overlap); },
       [](RunConfig& c, const std::string& v) {
         const auto n = to_int("piece_overlap", v);
         require(n >= 0 && n < c.nest.piece_size, "key 'piece_overlap': must lie in [0, piece_size)");
         c.nest.piece_overlap = static_cast<int>(n);
       }},
      {"selection", [](const RunConfig& c) { return to_string(c.nest.mode); },
       [](RunConfig& c, const std::string& v) { c.nest.mode = parse_selection_mode(v, c.nest.mode.alpha); }},
      {"alpha", [](const RunConfig& c) { return real_text(c.nest.mode.alpha); },
       [](RunConfig& c, const std::string& v) { c.nest.mode.alpha = to_real("alpha", v); }},
      {"csa_runs", [](const RunConfig& c) { return std::to_string(c.nest.csa_runs); },
       [](RunConfig& c, const std::string& v) { c.nest.csa_runs = to_positive("csa_runs", v); }},
      {"csa_sweeps", [](const RunConfig& c) { return std::to_string(c.nest.csa_sweeps); },
       [](RunConfig& c, const std::string& v) { c.nest.csa_sweeps = to_positive("csa_sweeps", v); }},
      {"csa_size", [](const RunConfig& c) { return std::to_string(c.nest.csa_size); },
       [](RunConfig& c, const std::string& v) { c.nest.csa_size = to_positive("csa_size", v); }},
      {"csa_rule", [](const RunConfig& c) { return std::string(c.nest.csa_rule == StepRule::Adaptive ? "acsa" : "rm"); },
       [](RunConfig& c, const std::string& v) {
         require(v == "rm" || v == "acsa", "key 'csa_rule': expected rm or acsa");
         c.nest.csa_rule = v == "acsa" ? StepRule::Adaptive : StepRule::RobbinsMonro;
       }},
      {"smoothing", [](const RunConfig& c) { return real_text(c.nest.smoothing); },
       [](RunConfig& c, const std::string& v) {
         c.nest.smoothing = to_real("smoothing", v);
         require(c.nest.smoothing >= 0, "key 'smoothing': must be non-negative");
       }},
      {"second_order", [](const RunConfig& c) { return bool_text(c.nest.second_order); },
       [](RunConfig& c, const std::string& v) { c.nest.second_order = to_bool("second_order", v); }},
      {"max_step", [](const RunConfig& c) { return real_text(c.nest.max_step); },
       [](RunConfig& c, const std::string& v) {
         c.nest.max_step = to_real("max_step", v);
         require(c.nest.max_step > 0, "key 'max_step': must be positive");
       }},
      {"variance_floor", [](const RunConfig& c) { return real_text(c.nest.variance_floor); },
       [](RunConfig& c, const std::string& v) {
         c.nest.variance_floor = to_real("variance_floor", v);
         require(c.nest.variance_floor > 0, "key 'variance_floor': must be positive");
       }},
      {"seed", [](const RunConfig& c) { return std::to_string(c.nest.seed); },
       [](RunConfig& c, const std::string& v) {
         std::uint64_t out = 0;
         auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
         require(ec == std::errc() && p == v.data() + v.size(), "key 'seed': expected an unsigned integer, got '" + v + "'");
         c.nest.seed = out;
       }},
      {"threads", [](const RunConfig& c) { return std::to_string(c.nest.threads); },
       [](RunConfig& c, const std::string& v) { c.nest.threads = to_positive("threads", v); }},
      {"synth_width", [](const RunConfig& c) { return std::to_string(c.synth.width); },
       [](RunConfig& c, const std::string& v) { c.synth.width = to_positive("synth_width", v); }},
      {"synth_height", [](const RunConfig& c) { return std::to_string(c.synth.height); },
       [](RunConfig& c, const std::string& v) { c.synth.height = to_positive("synth_height", v); }},
      {"synth_sweeps", [](const RunConfig& c) { return std::to_string(c.synth.sweeps); },
       [](RunConfig& c, const std::string& v) { c.synth.sweeps = to_positive("synth_sweeps", v); }},
      {"freeze_theta", [](const RunConfig& c) { return bool_text(c.synth.freeze_theta); },
       [](RunConfig& c, const std::string& v) { c.synth.freeze_theta = to_bool("freeze_theta", v); }},
      {"frame", [](const RunConfig& c) { return std::to_string(c.frame); },
       [](RunConfig& c, const std::string& v) { c.frame = to_positive("frame", v); }},
      {"hole", [](const RunConfig& c) { return std::to_string(c.hole); },
       [](RunConfig& c, const std::string& v) { c.hole = to_positive("hole", v); }},
      {"inpaint_sweeps", [](const RunConfig& c) { return std::to_string(c.inpaint_sweeps); },
       [](RunConfig& c, const std::string& v) { c.inpaint_sweeps = to_positive("inpaint_sweeps", v); }},
      {"smooth_window", [](const RunConfig& c) { return std::to_string(c.smooth_window); },
       [](RunConfig& c, const std::string& v) { c.smooth_window = to_positive("smooth_window", v); }},
      {"reps", [](const RunConfig& c) { return std::to_string(c.reps); },
       [](RunConfig& c, const std::string& v) { c.reps = to_positive("reps", v); }},
      {"bench_levels", [](const RunConfig& c) { return std::to_string(c.bench_levels); },
       [](RunConfig& c, const std::string& v) {
         c.bench_levels = to_positive("bench_levels", v);
         require(c.bench_levels >= 2 && c.bench_levels <= 256, "key 'bench_levels': must lie in 2..256");
       }},
      {"textures", [](const RunConfig& c) { return c.textures; }, [](RunConfig& c, const std::string& v) { c.textures = v; }},
      {"texture_dir", [](const RunConfig& c) { return c.texture_dir; },
       [](RunConfig& c, const std::string& v) { c.texture_dir = v; }},
  };
  return table;
}

}  // namespace

int default_threads() {
  if (const char* env = std::getenv("MGRF_THREADS")) {
    int n = 0;
    const std::string s(env);
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
    if (ec == std::errc() && p == s.data() + s.size() && n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

RunConfig default_run_config() {
  RunConfig c;
  c.nest.threads = default_threads();
  return c;
}

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& f : fields())
    if (key == f.key) {
      try {
        f.set(cfg, value);
      } catch (const Error& e) {
        fail(ErrorKind::InvalidArgument, e.what());
      }
      return;
    }
  fail(ErrorKind::InvalidArgument, "unknown key '" + key + "'");
}

void apply_config_text(RunConfig& cfg, const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  int no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = source + ":" + std::to_string(no) + ": ";
    if (eq == std::string::npos) fail(ErrorKind::Format, where + "expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    try {
      set_config_value(cfg, key, value);
    } catch (const Error& e) {
      fail(ErrorKind::Format, where + e.what());
    }
  }
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  RunConfig cfg = default_run_config();
  apply_config_text(cfg, ss.str(), path);
  return cfg;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& f : fields()) out.emplace_back(f.key);
  return out;
}

std::string config_to_text(const RunConfig& cfg) {
  std::string out;
  for (const auto& f : fields()) out += std::string(f.key) + " = " + f.get(cfg) + "\n";
  return out;
}

void write_resolved_config(const RunConfig& cfg, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const auto path = std::filesystem::path(dir) / "resolved.cfg";
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
  out << config_to_text(cfg);
}

GreyImage preprocess_training(const GreyImage& img, const RunConfig& cfg) {
  if (cfg.quantize == "clahe") return clahe_quantize(img, cfg.levels, cfg.clahe_tiles, cfg.clahe_clip);
  if (cfg.quantize == "uniform") return uniform_quantize(img, cfg.levels);
  if (img.levels() != cfg.levels) return uniform_quantize(img, cfg.levels);
  return img;
}

}  // namespace mgrf
