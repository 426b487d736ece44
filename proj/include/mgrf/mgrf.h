/* C interface to the nested MGRF texture library.
 *
 * Every function returns an mgrf_status; on failure a description is
 * available from mgrf_last_error() on the calling thread until the next
 * failing call. Objects are opaque and owned by the caller once returned;
 * release them with the matching *_free function. Strings returned through
 * char** are heap-allocated and released with mgrf_string_free. */
#ifndef MGRF_MGRF_H
#define MGRF_MGRF_H

#include <stddef.h>
#include <stdint.h>

#if defined(MGRF_BUILDING_LIBRARY)
#define MGRF_API __attribute__((visibility("default")))
#else
#define MGRF_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mgrf_status {
  MGRF_OK = 0,
  MGRF_ERR_INVALID_ARGUMENT = 1,
  MGRF_ERR_IO = 2,
  MGRF_ERR_FORMAT = 3,
  MGRF_ERR_RUNTIME = 4,
  MGRF_ERR_UNSUPPORTED = 5,
  MGRF_ERR_OUT_OF_MEMORY = 6
} mgrf_status;

typedef struct mgrf_image mgrf_image;
typedef struct mgrf_model mgrf_model;
typedef struct mgrf_config mgrf_config;

/* Called once per nesting iteration with a CSV row of the iteration log. */
typedef void (*mgrf_progress_fn)(const char* csv_row, void* user);

typedef struct mgrf_bench_report {
  char texture[64];
  int reps;
  double mean, sd;
  double mean_raw256, sd_raw256;
  double mean_frame, sd_frame;
  double mean_unsmoothed, sd_unsmoothed;
  double train_seconds, seconds;
} mgrf_bench_report;

MGRF_API const char* mgrf_version(void);
MGRF_API const char* mgrf_last_error(void);
MGRF_API const char* mgrf_status_name(mgrf_status status);
MGRF_API void mgrf_string_free(char* s);

/* Images: 8-bit pixels holding grey levels 0..levels-1, row-major. */
MGRF_API mgrf_status mgrf_image_create(int width, int height, int levels, mgrf_image** out);
MGRF_API mgrf_status mgrf_image_load(const char* path, mgrf_image** out);
/* rescale != 0 stretches levels to 0..255 before writing. */
MGRF_API mgrf_status mgrf_image_save(const mgrf_image* img, const char* path, int rescale);
MGRF_API mgrf_status mgrf_image_info(const mgrf_image* img, int* width, int* height, int* levels);
MGRF_API mgrf_status mgrf_image_get_pixels(const mgrf_image* img, uint8_t* buffer, size_t size);
MGRF_API mgrf_status mgrf_image_set_pixels(mgrf_image* img, const uint8_t* buffer, size_t size);
MGRF_API mgrf_status mgrf_image_crop(const mgrf_image* img, int x, int y, int width, int height, mgrf_image** out);
MGRF_API mgrf_status mgrf_image_clahe(const mgrf_image* img, int levels, int tiles, double clip, mgrf_image** out);
MGRF_API mgrf_status mgrf_image_uniform(const mgrf_image* img, int levels, mgrf_image** out);
MGRF_API mgrf_status mgrf_image_scale(const mgrf_image* img, double scale, mgrf_image** out);
MGRF_API void mgrf_image_free(mgrf_image* img);

MGRF_API mgrf_status mgrf_mssim(const mgrf_image* a, const mgrf_image* b, double* out);

/* Run configuration: flat key = value settings. */
MGRF_API mgrf_status mgrf_config_create(mgrf_config** out);
MGRF_API mgrf_status mgrf_config_load(const char* path, mgrf_config** out);
MGRF_API mgrf_status mgrf_config_set(mgrf_config* cfg, const char* key, const char* value);
MGRF_API mgrf_status mgrf_config_get(const mgrf_config* cfg, const char* key, char** value);
MGRF_API mgrf_status mgrf_config_text(const mgrf_config* cfg, char** text);
/* Writes resolved.cfg into dir, creating it if needed. */
MGRF_API mgrf_status mgrf_config_write_resolved(const mgrf_config* cfg, const char* dir);
MGRF_API void mgrf_config_free(mgrf_config* cfg);

/* Applies the configured quantisation to a raw training image. */
MGRF_API mgrf_status mgrf_preprocess(const mgrf_config* cfg, const mgrf_image* raw, mgrf_image** out);

MGRF_API mgrf_status mgrf_model_load(const char* path, mgrf_model** out);
MGRF_API mgrf_status mgrf_model_save(const mgrf_model* model, const char* path);
MGRF_API mgrf_status mgrf_model_info(const mgrf_model* model, int* levels, int* potentials);
MGRF_API mgrf_status mgrf_model_describe(const mgrf_model* model, char** text);
MGRF_API void mgrf_model_free(mgrf_model* model);

/* Preprocesses `raw` per the config and learns a nested model. log_csv may be
 * NULL; otherwise the per-iteration log is returned there. */
MGRF_API mgrf_status mgrf_train(const mgrf_config* cfg, const mgrf_image* raw, mgrf_progress_fn progress, void* user,
                                mgrf_model** model, char** log_csv);

/* Synthesises an image of the configured size. `raw` supplies the seed
 * patch; it is quantised like the training image when its level count
 * differs from the model's. */
MGRF_API mgrf_status mgrf_synthesize(const mgrf_model* model, const mgrf_config* cfg, const mgrf_image* raw,
                                     uint64_t seed, mgrf_image** out);

/* Gibbs inpainting of the rectangle (x, y, w, h); both the last sample and
 * the per-pixel average of the final smooth_window sweeps are returned. */
MGRF_API mgrf_status mgrf_inpaint(const mgrf_model* model, const mgrf_image* frame, int x, int y, int w, int h,
                                  int sweeps, int smooth_window, uint64_t seed, mgrf_image** raw,
                                  mgrf_image** smoothed);
/* Rectangle of a centred hole, or an error if it does not fit. */
MGRF_API mgrf_status mgrf_centered_hole(int frame_w, int frame_h, int hole_w, int hole_h, int* x, int* y);

/* Runs the inpainting benchmark for one texture from the configured
 * texture directory. */
MGRF_API mgrf_status mgrf_bench(const mgrf_config* cfg, const char* texture_id, mgrf_bench_report* report);
MGRF_API mgrf_status mgrf_bench_format(const mgrf_bench_report* reports, size_t count, int csv, char** text);

#ifdef __cplusplus
}
#endif

#endif
