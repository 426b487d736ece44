#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "mgrf/image.hpp"
#include "mgrf/model.hpp"

namespace testing {

inline mgrf::GreyImage random_image(int w, int h, int levels, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<int> d(0, levels - 1);
  mgrf::GreyImage img(w, h, levels);
  for (auto& v : img.pixels()) v = static_cast<std::uint8_t>(d(gen));
  return img;
}

// Smooth-ish 256-level test pattern: two sinusoids plus noise.
inline mgrf::GreyImage pattern_image(int w, int h, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> noise(0.0, 12.0);
  mgrf::GreyImage img(w, h, 256);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double v = 128 + 60 * std::sin(2 * M_PI * x / 9.0) + 40 * std::sin(2 * M_PI * (x + y) / 13.0) + noise(gen);
      img.at(x, y) = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
    }
  return img;
}

// Regular texture in the spirit of a woven cane: a staggered lattice of dark
// round holes on a bright, slightly noisy background. 256 levels.
inline mgrf::GreyImage regular_texture(int w, int h, std::uint64_t seed, int period = 12, double hole = 3.2) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> noise(0.0, 10.0);
  std::uniform_real_distribution<double> phase(0.0, period);
  const double px = phase(gen), py = phase(gen);
  mgrf::GreyImage img(w, h, 256);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double fy = y + py;
      const int row = static_cast<int>(std::floor(fy / period));
      const double fx = x + px + (row % 2 ? period / 2.0 : 0.0);
      const double dx = std::fmod(fx, period) - period / 2.0, dy = std::fmod(fy, period) - period / 2.0;
      const double r = std::sqrt(dx * dx + dy * dy);
      double v = 200.0 - 140.0 / (1.0 + std::exp(4.0 * (r - hole)));
      v += noise(gen);
      img.at(x, y) = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
    }
  return img;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("mgrf_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

// Random model over a small lattice with a mix of feature kinds.
inline mgrf::NestedModel random_model(int levels, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> th(-scale, scale);
  std::uniform_int_distribution<int> off(-2, 2);
  mgrf::NestedModel m;
  m.levels = levels;
  auto add = [&](mgrf::FeatureKind k, mgrf::OffsetList o) {
    auto p = mgrf::make_potential(k, std::move(o));
    for (auto& t : p.theta) t = th(gen);
    m.potentials.push_back(std::move(p));
  };
  add(mgrf::FeatureKind::marginal(levels), {{0, 0}});
  add(mgrf::FeatureKind::gld(levels), {{0, 0}, {1, 0}});
  add(mgrf::FeatureKind::gld(levels), {{0, 0}, {0, 1}});
  mgrf::Offset a{off(gen), off(gen)};
  while (a == mgrf::Offset{0, 0}) a = {off(gen), off(gen)};
  add(mgrf::FeatureKind::glc(levels, 2), {{0, 0}, a});
  add(mgrf::FeatureKind::bp(levels, 3), {{0, 0}, {1, 0}, {-1, 1}});
  add(mgrf::FeatureKind::be(levels, 3, mgrf::default_be_threshold(levels)), {{0, 0}, {0, 1}, {1, 1}});
  return m;
}

}  // namespace testing
