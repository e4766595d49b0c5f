#ifndef SEMIGLOBAL_H
#define SEMIGLOBAL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Normalization applied by [`sg_psi_grid`].
typedef enum SgNormalization {
  SG_NORMALIZATION_NONE = 0,
  SG_NORMALIZATION_MAX_ABS_ONE = 1,
  SG_NORMALIZATION_L2_UNIT = 2,
  // Match the outgoing WKB branch at the grid point of largest |p(q)|.
  SG_NORMALIZATION_WKB_MATCH = 3,
} SgNormalization;

// Status codes returned by every function.
typedef enum SgStatus {
  SG_STATUS_OK = 0,
  SG_STATUS_NULL_POINTER = 1,
  SG_STATUS_INVALID_UTF8 = 2,
  SG_STATUS_INVALID_INPUT = 3,
  SG_STATUS_ROOT_FINDING_FAILED = 4,
  SG_STATUS_BRANCH_AMBIGUOUS = 5,
  SG_STATUS_QUADRATURE_NO_CONVERGENCE = 6,
  SG_STATUS_SECTOR_DEGENERATE = 7,
  SG_STATUS_PATH_BLOCKED = 8,
  SG_STATUS_PATH_INVALID = 9,
  SG_STATUS_NO_INDEPENDENT_PAIR = 10,
  SG_STATUS_GRID_TOO_COARSE = 11,
  SG_STATUS_NORMALIZATION_DEGENERATE = 12,
  SG_STATUS_AT_TURNING_POINT = 13,
  SG_STATUS_OUT_OF_WINDOW = 14,
  SG_STATUS_BAD_BOUNDARY = 15,
  SG_STATUS_ILL_CONDITIONED_FIT = 16,
  // Some grid points failed; their outputs are NaN.
  SG_STATUS_PARTIAL = 17,
  SG_STATUS_PANIC = 99,
} SgStatus;

// Opaque problem handle: potential, energy and ħ.
typedef struct SgContext SgContext;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Create a context from a potential string such as `harmonic:1` or `poly:0,0,0.5`.
//
// # Safety
// `potential` must be a NUL-terminated string and `out` a valid pointer.
enum SgStatus sg_context_new(const char *potential,
                             double energy,
                             double hbar,
                             struct SgContext **out);

// Release a context. Null is ignored.
//
// # Safety
// `ctx` must come from [`sg_context_new`] and not be used afterwards.
void sg_context_free(struct SgContext *ctx);

// Put the action's anchor at the real turning point nearest `center`.
//
// # Safety
// `ctx` must be a live context.
enum SgStatus sg_context_set_default_anchor(struct SgContext *ctx, double center);

// Evaluate ψ at q on an automatically planned contour.
//
// # Safety
// `ctx` must be a live context; `re` and `im` valid pointers.
enum SgStatus sg_psi(const struct SgContext *ctx, double q, double *re, double *im);

// Evaluate ψ on `n` grid points, normalized by an `SgNormalization` value.
// Failed points are written as NaN and the call returns `SgStatus::Partial`.
//
// # Safety
// `q`, `re` and `im` must each point to `n` doubles.
enum SgStatus sg_psi_grid(const struct SgContext *ctx,
                          const double *q,
                          size_t n,
                          uint32_t normalization,
                          double *re,
                          double *im);

// Number of asymptotic decay sectors of the integrand at q.
//
// # Safety
// `ctx` must be a live context and `count` a valid pointer.
enum SgStatus sg_sector_count(const struct SgContext *ctx, double q, size_t *count);

// Airy function Ai(x) and its derivative.
//
// # Safety
// `ai` and `aip` must be valid pointers.
enum SgStatus sg_airy(double x, double *ai, double *aip);

// Pearcey integral ∫ exp(i(t⁴ + x t² + y t)) dt.
//
// # Safety
// `re` and `im` must be valid pointers.
enum SgStatus sg_pearcey(double x, double y, double *re, double *im);

// Copy the last error message of this thread into `buf` (NUL-terminated,
// truncated to `len`). Returns the full message length excluding the NUL.
//
// # Safety
// `buf` must point to `len` writable bytes, or be null with `len` zero.
size_t sg_last_error(char *buf, size_t len);

// Static name of a status code; unknown codes give "unknown".
const char *sg_status_name(int32_t status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SEMIGLOBAL_H */
