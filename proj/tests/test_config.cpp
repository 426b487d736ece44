#include <doctest.h>

#include <cstdlib>
#include <fstream>

#include "mgrf/config.hpp"
#include "mgrf/error.hpp"
#include "support.hpp"

using namespace mgrf;

TEST_CASE("defaults") {
  const auto c = default_run_config();
  CHECK(c.levels == 8);
  CHECK(c.clahe_tiles == 16);
  CHECK(c.clahe_clip == 0.03);
  CHECK(c.frame == 76);
  CHECK(c.hole == 54);
  CHECK(c.smooth_window == 50);
  CHECK(c.synth.width == 180);
  CHECK(c.synth.sweeps == 300);
  CHECK(c.nest.csa_runs == 4);
  CHECK(c.nest.csa_sweeps == 50);
  CHECK(c.nest.csa_size == 100);
  CHECK(c.nest.max_radius == 40);
  CHECK(c.nest.mode.kind == SelectionMode::MaxMin);
  CHECK(c.selectors.size() == 1);
  CHECK(c.selectors[0].iterations == 8);
  CHECK(c.selectors[0].add_count == 3);
}

TEST_CASE("thread count from the environment") {
  ::setenv("MGRF_THREADS", "3", 1);
  CHECK(default_threads() == 3);
  CHECK(default_run_config().nest.threads == 3);
  ::setenv("MGRF_THREADS", "zero", 1);
  CHECK(default_threads() >= 1);
  ::unsetenv("MGRF_THREADS");
}

TEST_CASE("parsing key = value text") {
  RunConfig c = default_run_config();
  apply_config_text(c,
                    "# experiment\n"
                    "levels = 16\n"
                    "\n"
                    "selectors = gld2:4:2, jagstar9:2:1   # trailing comment\n"
                    "selection = softmin\n"
                    "alpha = 2.5\n"
                    "csa_rule = acsa\n"
                    "use_marginal = false\n"
                    "seed = 18446744073709551615\n");
  CHECK(c.levels == 16);
  REQUIRE(c.selectors.size() == 2);
  CHECK(c.selectors[1].family == SelectorFamily::JagStarBP9);
  CHECK(c.nest.mode.kind == SelectionMode::SoftMin);
  CHECK(c.nest.mode.alpha == 2.5);
  CHECK(c.nest.csa_rule == StepRule::Adaptive);
  CHECK_FALSE(c.nest.use_marginal);
  CHECK(c.nest.seed == 18446744073709551615ull);
}

TEST_CASE("errors carry the line number") {
  RunConfig c;
  auto message = [&](const std::string& text) {
    try {
      apply_config_text(c, text, "run.cfg");
    } catch (const Error& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message("levels = 8\ncolour = red\n") == "run.cfg:2: unknown key 'colour'");
  CHECK(message("levels 8\n").rfind("run.cfg:1: ", 0) == 0);
  CHECK(message("\n\nlevels = eight\n").rfind("run.cfg:3: ", 0) == 0);
  CHECK(message("levels = 1\n").rfind("run.cfg:1: ", 0) == 0);
  CHECK(message("quantize = median\n").rfind("run.cfg:1: ", 0) == 0);
  CHECK(message("selectors = gld9\n").rfind("run.cfg:1: ", 0) == 0);
  CHECK_THROWS_AS(load_run_config("/nonexistent/run.cfg"), Error);
}

TEST_CASE("resolved config round trip") {
  RunConfig c = default_run_config();
  set_config_value(c, "selectors", "combined-bp5:3:2,filters");
  set_config_value(c, "clahe_clip", "0.05");
  set_config_value(c, "training", "some/path.png");
  const auto text = config_to_text(c);
  RunConfig d;
  apply_config_text(d, text);
  CHECK(config_to_text(d) == text);
  CHECK(config_keys().size() >= 30);
  auto dir = testing::temp_dir("config");
  write_resolved_config(c, (dir / "sub").string());
  std::ifstream in(dir / "sub" / "resolved.cfg");
  std::string first;
  std::getline(in, first);
  CHECK(first == "training = some/path.png");
}

TEST_CASE("training preprocessing") {
  const auto raw = testing::pattern_image(64, 64, 1);
  RunConfig c;
  CHECK(preprocess_training(raw, c) == clahe_quantize(raw, 8));
  c.quantize = "uniform";
  CHECK(preprocess_training(raw, c) == uniform_quantize(raw, 8));
}
