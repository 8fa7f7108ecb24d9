#ifndef SKETCHKIT_H
#define SKETCHKIT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

/**
 * Result of every fallible call.
 */
typedef enum SkStatus {
  SK_STATUS_OK = 0,
  SK_STATUS_NULL_POINTER = 1,
  SK_STATUS_DIMENSION_MISMATCH = 2,
  SK_STATUS_NON_FINITE = 3,
  SK_STATUS_NOT_POSITIVE_DEFINITE = 4,
  SK_STATUS_INVALID_PARAMETER = 5,
  SK_STATUS_BUDGET_EXCEEDED = 6,
  SK_STATUS_NO_CONVERGENCE = 7,
  SK_STATUS_PARSE = 8,
  SK_STATUS_IO = 9,
  SK_STATUS_PANIC = 10,
} SkStatus;

typedef enum SkFamilyKind {
  SK_FAMILY_KIND_GAUSSIAN = 0,
  SK_FAMILY_KIND_SPARSE_STACK = 1,
  SK_FAMILY_KIND_SPARSE_UNIFORM = 2,
  SK_FAMILY_KIND_SPARSE_IID = 3,
  SK_FAMILY_KIND_SPARSE_COL = 4,
  SK_FAMILY_KIND_SPARSE_RTT = 5,
  SK_FAMILY_KIND_KHATRI_RAO = 6,
} SkFamilyKind;

/**
 * Base distribution of the Khatri–Rao factors. Only the real ones are valid here.
 */
typedef enum SkBaseDist {
  SK_BASE_DIST_REAL_GAUSSIAN = 0,
  SK_BASE_DIST_REAL_RADEMACHER = 1,
  SK_BASE_DIST_REAL_SPHERICAL = 2,
} SkBaseDist;

/**
 * Opaque low-rank approximation.
 */
typedef struct SkLowRank SkLowRank;

/**
 * Opaque random test matrix `Ω ∈ R^{d×k}`.
 */
typedef struct SkTestMatrix SkTestMatrix;

/**
 * Family and parameters. Fields not used by `kind` are ignored.
 */
typedef struct SkFamily {
  enum SkFamilyKind kind;
  /**
   * Nonzeros per row (SparseStack, SparseUniform).
   */
  size_t zeta;
  /**
   * Expected nonzeros per row (SparseIid).
   */
  double density;
  /**
   * Nonzeros per column (SparseCol), or sampled columns (SparseRtt, 0 for the default).
   */
  size_t xi;
  /**
   * Factor dimension (KhatriRao).
   */
  size_t d0;
  enum SkBaseDist base;
} SkFamily;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. Valid until the next failing call on the same thread.
 */
const char *sk_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *sk_version(void);

/**
 * Draws `Ω ∈ R^{d×k}` from `family` with the given seed.
 */
enum SkStatus sk_test_matrix_new(const struct SkFamily *family,
                                 size_t d,
                                 size_t k,
                                 uint64_t seed,
                                 struct SkTestMatrix **out);

void sk_test_matrix_free(struct SkTestMatrix *tm);

enum SkStatus sk_test_matrix_dims(const struct SkTestMatrix *tm, size_t *d, size_t *k);

/**
 * `out (k×m) = Ω* b` for `b` of size `d×m`.
 */
enum SkStatus sk_test_matrix_apply_adjoint(const struct SkTestMatrix *tm,
                                           const double *b,
                                           size_t m,
                                           double *out);

/**
 * `out (d×m) = Ω c` for `c` of size `k×m`.
 */
enum SkStatus sk_test_matrix_apply(const struct SkTestMatrix *tm,
                                   const double *c,
                                   size_t m,
                                   double *out);

/**
 * `out (n×k) = A Ω` for `A` of size `n×d`.
 */
enum SkStatus sk_test_matrix_apply_right(const struct SkTestMatrix *tm,
                                         const double *a,
                                         size_t n,
                                         double *out);

/**
 * Writes the explicit `d×k` matrix `Ω`.
 */
enum SkStatus sk_test_matrix_materialize(const struct SkTestMatrix *tm, double *out);

/**
 * Injectivity `σ_min²(Ω* Q)` and dilation `σ_max²(Ω* Q)` for an orthonormal `d×r` basis `Q`.
 */
enum SkStatus sk_injectivity(const struct SkTestMatrix *tm,
                             const double *q,
                             size_t r,
                             double *alpha,
                             double *beta);

/**
 * Randomized SVD of the `n×d` matrix `a` with range sketch `A Ω`.
 */
enum SkStatus sk_rsvd(const double *a,
                      size_t n,
                      const struct SkTestMatrix *tm,
                      struct SkLowRank **out);

/**
 * Nyström approximation of the psd `n×n` matrix `a`.
 */
enum SkStatus sk_nystrom_psd(const double *a,
                             size_t n,
                             const struct SkTestMatrix *tm,
                             struct SkLowRank **out);

void sk_low_rank_free(struct SkLowRank *lr);

/**
 * Shape `rows × cols` and rank of the approximation.
 */
enum SkStatus sk_low_rank_dims(const struct SkLowRank *lr,
                               size_t *rows,
                               size_t *cols,
                               size_t *rank);

/**
 * Writes the dense `rows × cols` approximation.
 */
enum SkStatus sk_low_rank_to_dense(const struct SkLowRank *lr, double *out);

/**
 * Sketch-and-solve least squares: `out (d×m) = (Ψ* A)† (Ψ* B)` for `A` of size `n×d` and `B` of size `n×m`.
 */
enum SkStatus sk_sketch_and_solve(const double *a,
                                  size_t n,
                                  size_t d,
                                  const double *b,
                                  size_t m,
                                  const struct SkTestMatrix *psi,
                                  double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SKETCHKIT_H */
