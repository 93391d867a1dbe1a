#ifndef CODA_DFM_H
#define CODA_DFM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CdfmSex {
  CDFM_SEX_FEMALE = 0,
  CDFM_SEX_MALE = 1,
  CDFM_SEX_TOTAL = 2,
} CdfmSex;

typedef enum CdfmStatus {
  CDFM_STATUS_OK = 0,
  CDFM_STATUS_NULL_POINTER = 1,
  CDFM_STATUS_INVALID_ARGUMENT = 2,
  CDFM_STATUS_PARSE = 3,
  CDFM_STATUS_SCHEMA = 4,
  CDFM_STATUS_DOMAIN = 5,
  CDFM_STATUS_INCOMPLETE = 6,
  CDFM_STATUS_DEGENERATE = 7,
  CDFM_STATUS_INSUFFICIENT_DATA = 8,
  CDFM_STATUS_RANK = 9,
  CDFM_STATUS_SHAPE = 10,
  CDFM_STATUS_POOL = 11,
  CDFM_STATUS_RANGE = 12,
  CDFM_STATUS_CONFIG = 13,
  CDFM_STATUS_IO = 14,
  CDFM_STATUS_PANIC = 15,
} CdfmStatus;

// A fitted two-stage dynamic factor model.
typedef struct CdfmFit CdfmFit;

// Bootstrap samples and pointwise bands at one horizon.
typedef struct CdfmForecast CdfmForecast;

// Years × ages matrix of life-table death counts.
typedef struct CdfmGrid CdfmGrid;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the most recent failure on this thread, or an empty string.
// The pointer stays valid until the next failing call on this thread.
const char *cdfm_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *cdfm_version(void);

// Read a life-table file and rebuild its death counts (radix 100000).
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum CdfmStatus cdfm_grid_load(const char *path, enum CdfmSex sex, struct CdfmGrid **out);

// Parse life-table text held in memory.
//
// # Safety
// `text` must be a NUL-terminated string; `out` must be writable.
enum CdfmStatus cdfm_grid_parse(const char *text, enum CdfmSex sex, struct CdfmGrid **out);

// Seeded synthetic grid with `years` years (at least 10).
//
// # Safety
// `out` must be writable.
enum CdfmStatus cdfm_grid_synthetic(size_t years, uint64_t seed, struct CdfmGrid **out);

// # Safety
// `grid` must be null or a handle from a `cdfm_grid_*` constructor that has
// not been freed.
void cdfm_grid_free(struct CdfmGrid *grid);

// # Safety
// `grid` must be null or a live handle.
size_t cdfm_grid_n_years(const struct CdfmGrid *grid);

// # Safety
// `grid` must be null or a live handle.
size_t cdfm_grid_n_ages(const struct CdfmGrid *grid);

// Copy the calendar years into `years[0..n_years]`.
//
// # Safety
// `grid` must be a live handle; `years` must hold `len` values.
enum CdfmStatus cdfm_grid_copy_years(const struct CdfmGrid *grid, int32_t *years, size_t len);

// Copy the death counts row-major (year by year) into `deaths`.
//
// # Safety
// `grid` must be a live handle; `deaths` must hold `len` values.
enum CdfmStatus cdfm_grid_copy_deaths(const struct CdfmGrid *grid, double *deaths, size_t len);

// Discrete Gini coefficient of one year's counts.
//
// # Safety
// `counts` must hold `len` values; `out` must be writable.
enum CdfmStatus cdfm_gini(const double *counts, size_t len, double *out);

// Centered log-ratio transform on a unit-spaced grid.
//
// # Safety
// `counts` and `out` must each hold `len` values.
enum CdfmStatus cdfm_clr(const double *counts, size_t len, double *out);

// Back-transform a clr curve to counts summing to `radix`.
//
// # Safety
// `curve` and `out` must each hold `len` values.
enum CdfmStatus cdfm_inverse_clr(const double *curve, size_t len, double radix, double *out);

// Fit the two-stage model to the clr curves of `grid`. A nonpositive
// `bandwidth` selects the default rule.
//
// # Safety
// `grid` must be a live handle; `out` must be writable.
enum CdfmStatus cdfm_fit_dfm(const struct CdfmGrid *grid,
                             size_t r,
                             size_t residual_components,
                             bool force_second_stage,
                             double bandwidth,
                             struct CdfmFit **out);

// # Safety
// `fit` must be null or a live handle.
void cdfm_fit_free(struct CdfmFit *fit);

// Total retained components `N̂` (primary plus residual stage).
//
// # Safety
// `fit` must be null or a live handle.
size_t cdfm_fit_n_components(const struct CdfmFit *fit);

// # Safety
// `fit` must be null or a live handle.
bool cdfm_fit_second_stage(const struct CdfmFit *fit);

// Bootstrap forecast at one horizon with the default score forecasters.
//
// # Safety
// `fit` must be a live handle; `levels` must hold `n_levels` values in
// (0, 1); `out` must be writable.
enum CdfmStatus cdfm_forecast(const struct CdfmFit *fit,
                              size_t horizon,
                              size_t replications,
                              const double *levels,
                              size_t n_levels,
                              uint64_t seed,
                              struct CdfmForecast **out);

// # Safety
// `forecast` must be null or a live handle.
void cdfm_forecast_free(struct CdfmForecast *forecast);

// # Safety
// `forecast` must be null or a live handle.
size_t cdfm_forecast_n_ages(const struct CdfmForecast *forecast);

// # Safety
// `forecast` must be null or a live handle.
size_t cdfm_forecast_replications(const struct CdfmForecast *forecast);

// Copy the point forecast into `point`.
//
// # Safety
// `forecast` must be a live handle; `point` must hold `len` values.
enum CdfmStatus cdfm_forecast_copy_point(const struct CdfmForecast *forecast,
                                         double *point,
                                         size_t len);

// Copy the band for `levels[level_index]` into `lower` and `upper`.
//
// # Safety
// `forecast` must be a live handle; `lower` and `upper` must hold `len`
// values.
enum CdfmStatus cdfm_forecast_copy_band(const struct CdfmForecast *forecast,
                                        size_t level_index,
                                        double *lower,
                                        double *upper,
                                        size_t len);

// Copy the `B × D` samples row-major (replicate by replicate).
//
// # Safety
// `forecast` must be a live handle; `samples` must hold `len` values.
enum CdfmStatus cdfm_forecast_copy_samples(const struct CdfmForecast *forecast,
                                           double *samples,
                                           size_t len);

// Empirical coverage of `windows` holdout curves of `ages` values each,
// stored row-major alongside their bounds. Values on a bound are covered.
//
// # Safety
// `holdouts`, `lower` and `upper` must each hold `windows * ages` values;
// `out` must be writable.
enum CdfmStatus cdfm_ecp(const double *holdouts,
                         const double *lower,
                         const double *upper,
                         size_t windows,
                         size_t ages,
                         double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CODA_DFM_H */
