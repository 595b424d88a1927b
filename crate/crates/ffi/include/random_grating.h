#ifndef RANDOM_GRATING_H
#define RANDOM_GRATING_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RgStatus {
  RG_STATUS_OK = 0,
  RG_STATUS_NULL_POINTER = 1,
  RG_STATUS_CONFIG = 2,
  RG_STATUS_NUMERICAL = 3,
  RG_STATUS_IO = 4,
  RG_STATUS_BUFFER_TOO_SMALL = 5,
  RG_STATUS_PANIC = 6,
} RgStatus;

// Run configuration handle.
typedef struct RgConfig RgConfig;

// Measurement dataset handle.
typedef struct RgDataset RgDataset;

// Reconstructed ensemble handle.
typedef struct RgEnsemble RgEnsemble;

// Ensemble statistics handle.
typedef struct RgStats RgStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copy the last error message of this thread into `buf` (NUL-terminated,
// truncated to `capacity`). Returns the full message length excluding the
// terminator, or 0 if there is none.
//
// # Safety
// `buf` must be null or point to `capacity` writable bytes.
size_t rg_last_error(char *buf, size_t capacity);

// Library version as a static NUL-terminated string.
const char *rg_version(void);

// Create a configuration from a built-in preset name (`"ex1"`..`"ex5"`).
//
// # Safety
// `name` must be a NUL-terminated string; `out` must be writable.
enum RgStatus rg_config_from_preset(const char *name, struct RgConfig **out);

// Create a configuration from a JSON object of preset overrides.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum RgStatus rg_config_from_json(const char *json, struct RgConfig **out);

// Override sample counts and seed. The configuration is re-validated.
//
// # Safety
// `config` must be a live handle.
enum RgStatus rg_config_set_run_size(struct RgConfig *config,
                                     size_t samples,
                                     size_t warm_samples,
                                     uint64_t seed);

// # Safety
// `config` must be null or a handle not yet freed.
void rg_config_free(struct RgConfig *config);

// Node heights `f_0..=f_N` of realization `m`.
//
// # Safety
// `config` must be a live handle; `buf` must hold `capacity` doubles;
// `len` must be writable.
enum RgStatus rg_sample_surface(const struct RgConfig *config,
                                uint64_t m,
                                double *buf,
                                size_t capacity,
                                size_t *len);

// Synthesise the dataset described by `config`.
//
// # Safety
// `config` must be a live handle; `out` must be writable.
enum RgStatus rg_dataset_generate(const struct RgConfig *config,
                                  size_t workers,
                                  struct RgDataset **out);

// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum RgStatus rg_dataset_load(const char *path, struct RgDataset **out);

// # Safety
// `dataset` must be a live handle; `path` a NUL-terminated string.
enum RgStatus rg_dataset_save(const struct RgDataset *dataset, const char *path);

// # Safety
// `dataset` must be a live handle; `count` must be writable.
enum RgStatus rg_dataset_record_count(const struct RgDataset *dataset, size_t *count);

// # Safety
// `dataset` must be null or a handle not yet freed.
void rg_dataset_free(struct RgDataset *dataset);

// Reconstruct every sample of `dataset` with the inversion settings of
// `config`.
//
// # Safety
// Handles must be live; `out` must be writable.
enum RgStatus rg_ensemble_invert(const struct RgConfig *config,
                                 const struct RgDataset *dataset,
                                 size_t workers,
                                 struct RgEnsemble **out);

// Number of successfully reconstructed samples.
//
// # Safety
// `ensemble` must be a live handle; `count` must be writable.
enum RgStatus rg_ensemble_size(const struct RgEnsemble *ensemble, size_t *count);

// Fourier coefficients of ensemble member `index`.
//
// # Safety
// `ensemble` must be a live handle; `buf` must hold `capacity` doubles;
// `len` must be writable.
enum RgStatus rg_ensemble_coeffs(const struct RgEnsemble *ensemble,
                                 size_t index,
                                 double *buf,
                                 size_t capacity,
                                 size_t *len);

// # Safety
// `ensemble` must be null or a handle not yet freed.
void rg_ensemble_free(struct RgEnsemble *ensemble);

// Node statistics of a reconstructed ensemble.
//
// # Safety
// Handles must be live; `out` must be writable.
enum RgStatus rg_stats_compute(const struct RgConfig *config,
                               const struct RgEnsemble *ensemble,
                               struct RgStats **out);

// Mean Fourier coefficients.
//
// # Safety
// `stats` must be a live handle; `buf` must hold `capacity` doubles;
// `len` must be writable.
enum RgStatus rg_stats_mean_coeffs(const struct RgStats *stats,
                                   double *buf,
                                   size_t capacity,
                                   size_t *len);

// Estimated squared intensity at the nodes.
//
// # Safety
// `stats` must be a live handle; `buf` must hold `capacity` doubles;
// `len` must be writable.
enum RgStatus rg_stats_intensity_squared(const struct RgStats *stats,
                                         double *buf,
                                         size_t capacity,
                                         size_t *len);

// # Safety
// `stats` must be null or a handle not yet freed.
void rg_stats_free(struct RgStats *stats);

// Full pipeline writing artifacts and a manifest into `out_dir`.
//
// # Safety
// `config` must be a live handle; `out_dir` a NUL-terminated string.
enum RgStatus rg_pipeline_run(const struct RgConfig *config, const char *out_dir, size_t workers);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RANDOM_GRATING_H */
