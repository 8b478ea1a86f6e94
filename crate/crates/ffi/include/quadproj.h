#ifndef QUADPROJ_H
#define QUADPROJ_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible entry point.
typedef enum QpStatus {
  QP_STATUS_OK = 0,
  QP_STATUS_NULL_POINTER = 1,
  QP_STATUS_INVALID_ARGUMENT = 2,
  QP_STATUS_NOT_SYMMETRIC = 3,
  // Conical, cylindrical, parabolic or empty quadric.
  QP_STATUS_UNSUPPORTED = 4,
  QP_STATUS_NO_CONVERGENCE = 5,
  QP_STATUS_INTERNAL = 6,
  QP_STATUS_PANIC = 7,
} QpStatus;

typedef enum QpKind {
  QP_KIND_CONICAL = 0,
  QP_KIND_CENTRAL = 1,
  QP_KIND_PARABOLIC = 2,
} QpKind;

// Opaque projector handle: a quadric with its eigendecomposition cached.
typedef struct QpProjector QpProjector;

// Opaque quadric handle.
typedef struct QpQuadric QpQuadric;

// Output of [`qp_quadric_classify`].
typedef struct QpClass {
  enum QpKind kind;
  bool cylindrical;
  // True when [`qp_projector_new`] accepts the quadric.
  bool supported;
  size_t dim;
  size_t rank_a;
  size_t positives;
  size_t negatives;
} QpClass;

// Per-projection diagnostics filled by [`qp_project`].
typedef struct QpProjectionInfo {
  double distance;
  // Multiplier in standardized coordinates.
  double multiplier;
  size_t newton_iterations;
  size_t candidates;
  bool degenerate;
  bool root_found;
} QpProjectionInfo;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *qp_version(void);

// Message of the last failed call on this thread, or an empty string. The
// pointer stays valid until the next `qp_*` call on the same thread.
const char *qp_last_error(void);

// Builds the quadric `x^T A x + b^T x + c`.
//
// # Safety
// `a` must point to `n * n` doubles, `b` to `n` doubles and `out` to writable
// storage for one pointer.
enum QpStatus qp_quadric_new(size_t n,
                             const double *a,
                             const double *b,
                             double c,
                             struct QpQuadric **out);

// # Safety
// `q` must be null or a handle from [`qp_quadric_new`] not yet freed.
void qp_quadric_free(struct QpQuadric *q);

// Dimension of `q`, or 0 for a null handle.
//
// # Safety
// `q` must be null or a live quadric handle.
size_t qp_quadric_dim(const struct QpQuadric *q);

// Writes `x^T A x + b^T x + c` to `out`.
//
// # Safety
// `q` must be a live quadric handle, `x` must point to `dim` doubles and
// `out` to one writable double.
enum QpStatus qp_quadric_evaluate(const struct QpQuadric *q, const double *x, double *out);

// Writes the rank-based classification of `q` to `out`.
//
// # Safety
// `q` must be a live quadric handle and `out` writable.
enum QpStatus qp_quadric_classify(const struct QpQuadric *q, struct QpClass *out);

// Standardizes `q` once so repeated projections skip the eigendecomposition.
// The projector keeps its own copy; `q` may be freed afterwards.
//
// # Safety
// `q` must be a live quadric handle and `out` writable.
enum QpStatus qp_projector_new(const struct QpQuadric *q, struct QpProjector **out);

// # Safety
// `p` must be null or a handle from [`qp_projector_new`] not yet freed.
void qp_projector_free(struct QpProjector *p);

// # Safety
// `p` must be null or a live projector handle.
size_t qp_projector_dim(const struct QpProjector *p);

// Projects `x0` onto the quadric, writing the nearest point to `point`.
// `info` may be null.
//
// A projector is immutable, so concurrent calls on one handle are fine.
//
// # Safety
// `p` must be a live projector handle; `x0` and `point` must each hold `dim`
// doubles and may alias.
enum QpStatus qp_project(const struct QpProjector *p,
                         const double *x0,
                         double *point,
                         struct QpProjectionInfo *info);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QUADPROJ_H */
