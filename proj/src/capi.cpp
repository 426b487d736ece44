#include "mgrf/mgrf.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "mgrf/config.hpp"
#include "mgrf/error.hpp"

struct mgrf_image {
  mgrf::GreyImage img;
};
struct mgrf_model {
  mgrf::NestedModel model;
};
struct mgrf_config {
  mgrf::RunConfig cfg;
};

namespace {

thread_local std::string g_last_error;

mgrf_status record(mgrf_status s, const char* what) {
  g_last_error = what;
  return s;
}

template <typename F>
mgrf_status guarded(F&& f) {
  try {
    f();
    return MGRF_OK;
  } catch (const mgrf::Error& e) {
    switch (e.kind()) {
      case mgrf::ErrorKind::InvalidArgument: return record(MGRF_ERR_INVALID_ARGUMENT, e.what());
      case mgrf::ErrorKind::Io: return record(MGRF_ERR_IO, e.what());
      case mgrf::ErrorKind::Format: return record(MGRF_ERR_FORMAT, e.what());
      case mgrf::ErrorKind::Unsupported: return record(MGRF_ERR_UNSUPPORTED, e.what());
      case mgrf::ErrorKind::Runtime: break;
    }
    return record(MGRF_ERR_RUNTIME, e.what());
  } catch (const std::bad_alloc&) {
    return record(MGRF_ERR_OUT_OF_MEMORY, "out of memory");
  } catch (const std::exception& e) {
    return record(MGRF_ERR_RUNTIME, e.what());
  } catch (...) {
    return record(MGRF_ERR_RUNTIME, "unknown error");
  }
}

template <typename T>
void need(const T* p, const char* name) {
  if (!p) mgrf::fail(mgrf::ErrorKind::InvalidArgument, std::string(name) + " is null");
}

char* dup_string(const std::string& s) {
  auto* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

mgrf_image* wrap(mgrf::GreyImage img) { return new mgrf_image{std::move(img)}; }

mgrf::GreyImage seed_image(const mgrf::GreyImage& raw, const mgrf::RunConfig& cfg, int levels) {
  if (raw.levels() == levels) return raw;
  mgrf::RunConfig c = cfg;
  c.levels = levels;
  return mgrf::preprocess_training(raw, c);
}

}  // namespace

extern "C" {

const char* mgrf_version(void) { return "1.0.0"; }

const char* mgrf_last_error(void) { return g_last_error.c_str(); }

const char* mgrf_status_name(mgrf_status status) {
  switch (status) {
    case MGRF_OK: return "ok";
    case MGRF_ERR_INVALID_ARGUMENT: return "invalid argument";
    case MGRF_ERR_IO: return "i/o error";
    case MGRF_ERR_FORMAT: return "format error";
    case MGRF_ERR_RUNTIME: return "runtime error";
    case MGRF_ERR_UNSUPPORTED: return "unsupported";
    case MGRF_ERR_OUT_OF_MEMORY: return "out of memory";
  }
  return "unknown status";
}

void mgrf_string_free(char* s) { std::free(s); }

mgrf_status mgrf_image_create(int width, int height, int levels, mgrf_image** out) {
  return guarded([&] {
    need(out, "out");
    *out = wrap(mgrf::GreyImage(width, height, levels));
  });
}

mgrf_status mgrf_image_load(const char* path, mgrf_image** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = wrap(mgrf::load_image(path));
  });
}

mgrf_status mgrf_image_save(const mgrf_image* img, const char* path, int rescale) {
  return guarded([&] {
    need(img, "image");
    need(path, "path");
    mgrf::save_image(img->img, path, rescale != 0);
  });
}

mgrf_status mgrf_image_info(const mgrf_image* img, int* width, int* height, int* levels) {
  return guarded([&] {
    need(img, "image");
    if (width) *width = img->img.width();
    if (height) *height = img->img.height();
    if (levels) *levels = img->img.levels();
  });
}

mgrf_status mgrf_image_get_pixels(const mgrf_image* img, uint8_t* buffer, size_t size) {
  return guarded([&] {
    need(img, "image");
    need(buffer, "buffer");
    mgrf::require(size == img->img.size(), "buffer size does not match the image");
    std::memcpy(buffer, img->img.pixels().data(), size);
  });
}

mgrf_status mgrf_image_set_pixels(mgrf_image* img, const uint8_t* buffer, size_t size) {
  return guarded([&] {
    need(img, "image");
    need(buffer, "buffer");
    mgrf::require(size == img->img.size(), "buffer size does not match the image");
    for (size_t i = 0; i < size; ++i)
      mgrf::require(buffer[i] < img->img.levels(), "pixel value out of range for the image's levels");
    std::memcpy(img->img.pixels().data(), buffer, size);
  });
}

mgrf_status mgrf_image_crop(const mgrf_image* img, int x, int y, int width, int height, mgrf_image** out) {
  return guarded([&] {
    need(img, "image");
    need(out, "out");
    *out = wrap(img->img.crop(x, y, width, height));
  });
}

mgrf_status mgrf_image_clahe(const mgrf_image* img, int levels, int tiles, double clip, mgrf_image** out) {
  return guarded([&] {
    need(img, "image");
    need(out, "out");
    *out = wrap(mgrf::clahe_quantize(img->img, levels, tiles, clip));
  });
}

mgrf_status mgrf_image_uniform(const mgrf_image* img, int levels, mgrf_image** out) {
  return guarded([&] {
    need(img, "image");
    need(out, "out");
    *out = wrap(mgrf::uniform_quantize(img->img, levels));
  });
}

mgrf_status mgrf_image_scale(const mgrf_image* img, double scale, mgrf_image** out) {
  return guarded([&] {
    need(img, "image");
    need(out, "out");
    *out = wrap(mgrf::bilinear_scale(img->img, scale));
  });
}

void mgrf_image_free(mgrf_image* img) { delete img; }

mgrf_status mgrf_mssim(const mgrf_image* a, const mgrf_image* b, double* out) {
  return guarded([&] {
    need(a, "a");
    need(b, "b");
    need(out, "out");
    *out = mgrf::mssim(a->img, b->img);
  });
}

mgrf_status mgrf_config_create(mgrf_config** out) {
  return guarded([&] {
    need(out, "out");
    *out = new mgrf_config{mgrf::default_run_config()};
  });
}

mgrf_status mgrf_config_load(const char* path, mgrf_config** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new mgrf_config{mgrf::load_run_config(path)};
  });
}

mgrf_status mgrf_config_set(mgrf_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    need(cfg, "config");
    need(key, "key");
    need(value, "value");
    mgrf::set_config_value(cfg->cfg, key, value);
  });
}

mgrf_status mgrf_config_get(const mgrf_config* cfg, const char* key, char** value) {
  return guarded([&] {
    need(cfg, "config");
    need(key, "key");
    need(value, "value");
    const std::string text = mgrf::config_to_text(cfg->cfg);
    const std::string prefix = std::string(key) + " = ";
    size_t pos = 0;
    while (pos < text.size()) {
      const size_t end = text.find('\n', pos);
      const std::string line = text.substr(pos, end - pos);
      if (line.rfind(prefix, 0) == 0) {
        *value = dup_string(line.substr(prefix.size()));
        return;
      }
      pos = end + 1;
    }
    mgrf::fail(mgrf::ErrorKind::InvalidArgument, "unknown key '" + std::string(key) + "'");
  });
}

mgrf_status mgrf_config_text(const mgrf_config* cfg, char** text) {
  return guarded([&] {
    need(cfg, "config");
    need(text, "text");
    *text = dup_string(mgrf::config_to_text(cfg->cfg));
  });
}

mgrf_status mgrf_config_write_resolved(const mgrf_config* cfg, const char* dir) {
  return guarded([&] {
    need(cfg, "config");
    need(dir, "dir");
    mgrf::write_resolved_config(cfg->cfg, dir);
  });
}

void mgrf_config_free(mgrf_config* cfg) { delete cfg; }

mgrf_status mgrf_preprocess(const mgrf_config* cfg, const mgrf_image* raw, mgrf_image** out) {
  return guarded([&] {
    need(cfg, "config");
    need(raw, "image");
    need(out, "out");
    *out = wrap(mgrf::preprocess_training(raw->img, cfg->cfg));
  });
}

mgrf_status mgrf_model_load(const char* path, mgrf_model** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new mgrf_model{mgrf::load_model(path)};
  });
}

mgrf_status mgrf_model_save(const mgrf_model* model, const char* path) {
  return guarded([&] {
    need(model, "model");
    need(path, "path");
    mgrf::save_model(model->model, path);
  });
}

mgrf_status mgrf_model_info(const mgrf_model* model, int* levels, int* potentials) {
  return guarded([&] {
    need(model, "model");
    if (levels) *levels = model->model.levels;
    if (potentials) *potentials = static_cast<int>(model->model.potentials.size());
  });
}

mgrf_status mgrf_model_describe(const mgrf_model* model, char** text) {
  return guarded([&] {
    need(model, "model");
    need(text, "text");
    *text = dup_string(mgrf::describe_model(model->model));
  });
}

void mgrf_model_free(mgrf_model* model) { delete model; }

mgrf_status mgrf_train(const mgrf_config* cfg, const mgrf_image* raw, mgrf_progress_fn progress, void* user,
                       mgrf_model** model, char** log_csv) {
  return guarded([&] {
    need(cfg, "config");
    need(raw, "image");
    need(model, "model");
    const auto training = mgrf::preprocess_training(raw->img, cfg->cfg);
    std::string log = mgrf::iteration_csv_header() + "\n";
    auto result = mgrf::nest(training, cfg->cfg.selectors, cfg->cfg.nest, [&](const mgrf::IterationLog& it) {
      const auto row = mgrf::iteration_csv_row(it);
      log += row + "\n";
      if (progress) progress(row.c_str(), user);
    });
    *model = new mgrf_model{std::move(result.model)};
    if (log_csv) *log_csv = dup_string(log);
  });
}

mgrf_status mgrf_synthesize(const mgrf_model* model, const mgrf_config* cfg, const mgrf_image* raw, uint64_t seed,
                            mgrf_image** out) {
  return guarded([&] {
    need(model, "model");
    need(cfg, "config");
    need(raw, "image");
    need(out, "out");
    const auto training = seed_image(raw->img, cfg->cfg, model->model.levels);
    mgrf::Rng rng(seed);
    *out = wrap(mgrf::synthesize(model->model, training, cfg->cfg.synth, rng));
  });
}

mgrf_status mgrf_inpaint(const mgrf_model* model, const mgrf_image* frame, int x, int y, int w, int h, int sweeps,
                         int smooth_window, uint64_t seed, mgrf_image** raw, mgrf_image** smoothed) {
  return guarded([&] {
    need(model, "model");
    need(frame, "frame");
    need(raw, "raw");
    need(smoothed, "smoothed");
    mgrf::require(frame->img.levels() == model->model.levels, "frame level count does not match the model");
    mgrf::Rng rng(seed);
    auto result = mgrf::inpaint(model->model, frame->img, mgrf::Rect{x, y, w, h}, sweeps, smooth_window, rng);
    *raw = wrap(std::move(result.raw));
    *smoothed = wrap(std::move(result.smoothed));
  });
}

mgrf_status mgrf_centered_hole(int frame_w, int frame_h, int hole_w, int hole_h, int* x, int* y) {
  return guarded([&] {
    need(x, "x");
    need(y, "y");
    const auto r = mgrf::centered_hole(frame_w, frame_h, hole_w, hole_h);
    *x = r.x;
    *y = r.y;
  });
}

mgrf_status mgrf_bench(const mgrf_config* cfg, const char* texture_id, mgrf_bench_report* report) {
  return guarded([&] {
    need(cfg, "config");
    need(texture_id, "texture id");
    need(report, "report");
    const auto& c = cfg->cfg;
    mgrf::BenchmarkConfig b;
    b.selectors = c.selectors;
    b.nest = c.nest;
    b.levels = c.bench_levels;
    b.reps = c.reps;
    b.frame = c.frame;
    b.hole = c.hole;
    b.sweeps = c.inpaint_sweeps;
    b.smooth_window = c.smooth_window;
    b.seed = c.nest.seed;
    b.threads = c.nest.threads;
    const auto r = mgrf::inpaint_benchmark(texture_id, c.texture_dir, b);
    *report = mgrf_bench_report{};
    std::strncpy(report->texture, r.texture.c_str(), sizeof report->texture - 1);
    report->reps = r.reps;
    report->mean = r.mean;
    report->sd = r.sd;
    report->mean_raw256 = r.mean_raw256;
    report->sd_raw256 = r.sd_raw256;
    report->mean_frame = r.mean_frame;
    report->sd_frame = r.sd_frame;
    report->mean_unsmoothed = r.mean_unsmoothed;
    report->sd_unsmoothed = r.sd_unsmoothed;
    report->train_seconds = r.train_seconds;
    report->seconds = r.seconds;
  });
}

mgrf_status mgrf_bench_format(const mgrf_bench_report* reports, size_t count, int csv, char** text) {
  return guarded([&] {
    need(text, "text");
    if (count > 0) need(reports, "reports");
    std::vector<mgrf::BenchmarkReport> rs;
    for (size_t i = 0; i < count; ++i) {
      const auto& c = reports[i];
      mgrf::BenchmarkReport r;
      r.texture = c.texture;
      r.reps = c.reps;
      r.mean = c.mean;
      r.sd = c.sd;
      r.mean_raw256 = c.mean_raw256;
      r.sd_raw256 = c.sd_raw256;
      r.mean_frame = c.mean_frame;
      r.sd_frame = c.sd_frame;
      r.mean_unsmoothed = c.mean_unsmoothed;
      r.sd_unsmoothed = c.sd_unsmoothed;
      r.train_seconds = c.train_seconds;
      r.seconds = c.seconds;
      rs.push_back(std::move(r));
    }
    std::string out;
    if (csv) {
      out = mgrf::benchmark_csv_header() + "\n";
      for (const auto& r : rs) out += mgrf::benchmark_csv_row(r) + "\n";
    } else {
      out = mgrf::benchmark_table(rs);
    }
    *text = dup_string(out);
  });
}

}  // extern "C"
