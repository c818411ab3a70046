#ifndef P3P_H
#define P3P_H

/* Generated by cbindgen from crates/ffi; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum P3pStatus {
  P3P_STATUS_OK = 0,
  P3P_STATUS_NULL_POINTER = 1,
  // Non-finite values, zero-length bearings, or an invalid setting.
  P3P_STATUS_INVALID_INPUT = 2,
  // Coincident or collinear points, or parallel bearings.
  P3P_STATUS_DEGENERATE_GEOMETRY = 3,
  P3P_STATUS_INDEX_OUT_OF_RANGE = 4,
  // A Rust panic was caught at the boundary.
  P3P_STATUS_INTERNAL = 5,
} P3pStatus;

typedef enum P3pVariant {
  P3P_VARIANT_ADAPTIVE = 0,
  P3P_VARIANT_FERRARI_LAGRANGE = 1,
  P3P_VARIANT_CLASSICAL = 2,
} P3pVariant;

// Which squared distance fixes the scale of the third depth.
typedef enum P3pDepthSource {
  P3P_DEPTH_SOURCE_S12 = 0,
  P3P_DEPTH_SOURCE_S13 = 1,
  P3P_DEPTH_SOURCE_S23 = 2,
} P3pDepthSource;

// Solver settings. Starts at the library defaults.
typedef struct P3pConfig P3pConfig;

// Up to four candidate poses from one solve.
typedef struct P3pSolutions P3pSolutions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

struct P3pConfig *p3p_config_new(void);

// # Safety
// `config` must be null or a pointer from [`p3p_config_new`] not yet freed.
void p3p_config_free(struct P3pConfig *config);

// # Safety
// `config` must be null or a live handle.
enum P3pStatus p3p_config_set_gn_iterations(struct P3pConfig *config, uint32_t iterations);

// # Safety
// `config` must be null or a live handle.
enum P3pStatus p3p_config_set_variant(struct P3pConfig *config, enum P3pVariant variant);

// # Safety
// `config` must be null or a live handle.
enum P3pStatus p3p_config_set_reindex(struct P3pConfig *config, bool enabled);

// # Safety
// `config` must be null or a live handle.
enum P3pStatus p3p_config_set_depth_source(struct P3pConfig *config, enum P3pDepthSource source);

// Solves one problem. `bearings` and `points` each hold three xyz triples
// (nine doubles); bearings need not be normalized. `config` may be null for
// the defaults. On success `*out` receives a new handle, possibly holding
// zero solutions.
//
// # Safety
// Non-null pointers must be valid for the stated number of elements, and
// `config` must be null or a live handle.
enum P3pStatus p3p_solve(const struct P3pConfig *config,
                         const double *bearings,
                         const double *points,
                         struct P3pSolutions **out);

// Number of solutions in the set; 0 for a null handle.
//
// # Safety
// `solutions` must be null or a live handle.
uintptr_t p3p_solutions_len(const struct P3pSolutions *solutions);

// Copies solution `index` out. Any of `rotation` (9 doubles, row-major),
// `translation` (3) and `depths` (3) may be null to skip it.
//
// # Safety
// `solutions` must be a live handle; non-null outputs must be writable for
// their stated lengths.
enum P3pStatus p3p_solutions_get(const struct P3pSolutions *solutions,
                                 uintptr_t index,
                                 double *rotation,
                                 double *translation,
                                 double *depths);

// # Safety
// `solutions` must be null or a handle from [`p3p_solve`] not yet freed.
void p3p_solutions_free(struct P3pSolutions *solutions);

// Static, NUL-terminated description of a status code.
const char *p3p_status_message(enum P3pStatus status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* P3P_H */
