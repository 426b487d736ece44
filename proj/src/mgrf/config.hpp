#pragma once

#include <string>
#include <vector>

#include "mgrf/evaluation.hpp"

namespace mgrf {

// Every knob of a run as a flat key = value document.
struct RunConfig {
  std::string training;
  std::string output_dir = "out";
  std::string model;

  int levels = 8;
  std::string quantize = "clahe";  // clahe | uniform | none
  int clahe_tiles = 16;
  double clahe_clip = 0.03;

  std::vector<SelectorSpec> selectors = {default_selector(SelectorFamily::GLD2)};
  NestConfig nest;

  SynthesisConfig synth;

  int frame = 76;
  int hole = 54;
  int inpaint_sweeps = 300;
  int smooth_window = 50;
  int reps = 20;
  int bench_levels = 16;
  std::string textures = "D6,D21,D53,D77";
  std::string texture_dir = "assets";
};

// Default worker count: MGRF_THREADS if set and positive, else the hardware
// concurrency.
int default_threads();

RunConfig default_run_config();

// Sets one key from its textual value; throws InvalidArgument for unknown
// keys or malformed values.
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);

// Parses "key = value" lines; '#' starts a comment. Errors carry the line
// number.
void apply_config_text(RunConfig& cfg, const std::string& text, const std::string& source = "config");
RunConfig load_run_config(const std::string& path);

std::vector<std::string> config_keys();
std::string config_to_text(const RunConfig& cfg);
void write_resolved_config(const RunConfig& cfg, const std::string& dir);

GreyImage preprocess_training(const GreyImage& img, const RunConfig& cfg);

}  // namespace mgrf
