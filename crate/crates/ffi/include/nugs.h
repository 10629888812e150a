#ifndef NUGS_H
#define NUGS_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Outcome of a call.
typedef enum NugsStatus {
  NUGS_STATUS_OK = 0,
  NUGS_STATUS_INVALID_INPUT = 1,
  NUGS_STATUS_UNSTABLE = 2,
  NUGS_STATUS_QUADRATURE = 3,
  NUGS_STATUS_BANDWIDTH_TOO_SMALL = 4,
  NUGS_STATUS_PARSE = 5,
  NUGS_STATUS_IO = 6,
  NUGS_STATUS_NULL_POINTER = 7,
  NUGS_STATUS_PANIC = 8,
} NugsStatus;

// Sampling pattern family for [`nugs_samples_generate`].
typedef enum NugsScheme {
  NUGS_SCHEME_UNIFORM = 0,
  NUGS_SCHEME_JITTERED = 1,
  NUGS_SCHEME_LOG = 2,
} NugsScheme;

// Least-squares coefficients in a space's basis.
typedef struct NugsReconstruction NugsReconstruction;

// Sorted frequencies with their bandwidth.
typedef struct NugsSamples NugsSamples;

// A reconstruction space with its orthonormal basis.
typedef struct NugsSpace NugsSpace;

// A complex number, laid out as two doubles.
typedef struct NugsComplex {
  double re;
  double im;
} NugsComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the most recent failure on this thread, or null if none.
// The pointer stays valid until the next failing call on the same thread.
const char *nugs_last_error(void);

// Library version as a static NUL-terminated string.
const char *nugs_version(void);

// Builds a sample set from `n` frequencies inside `[-bandwidth, bandwidth]`.
//
// # Safety
// `points` must hold `n` doubles; `out` must be writable.
enum NugsStatus nugs_samples_new(const double *points,
                                 size_t n,
                                 double bandwidth,
                                 struct NugsSamples **out);

// Generates `n` frequencies of the given pattern on `[-k, k]`. `theta` and
// `seed` apply to the jittered pattern only.
//
// # Safety
// `out` must be writable.
enum NugsStatus nugs_samples_generate(enum NugsScheme scheme,
                                      size_t n,
                                      double k,
                                      double theta,
                                      uint64_t seed,
                                      struct NugsSamples **out);

// Number of frequencies, or 0 for a null handle.
//
// # Safety
// `samples` must be null or a live handle.
size_t nugs_samples_len(const struct NugsSamples *samples);

// Copies the sorted frequencies into `out`, which must hold `len` doubles.
//
// # Safety
// `samples` must be a live handle; `out` must hold `len` doubles.
enum NugsStatus nugs_samples_points(const struct NugsSamples *samples, double *out, size_t len);

// Copies the density-compensation weights into `out`.
//
// # Safety
// `samples` must be a live handle; `out` must hold `len` doubles.
enum NugsStatus nugs_samples_weights(const struct NugsSamples *samples, double *out, size_t len);

// Largest gap between consecutive frequencies, counting the ghost points
// reflected about the bandwidth.
//
// # Safety
// `samples` must be a live handle; `out` must be writable.
enum NugsStatus nugs_samples_density(const struct NugsSamples *samples, double *out);

// Releases a sample set.
//
// # Safety
// `samples` must be null or a handle not yet freed.
void nugs_samples_free(struct NugsSamples *samples);

// Parses a space descriptor such as `"legendre:8"` or `"spline:3:16"`.
//
// # Safety
// `descriptor` must be a NUL-terminated string; `out` must be writable.
enum NugsStatus nugs_space_parse(const char *descriptor, struct NugsSpace **out);

// Dimension of the space, or 0 for a null handle.
//
// # Safety
// `space` must be null or a live handle.
size_t nugs_space_dimension(const struct NugsSpace *space);

// Releases a space.
//
// # Safety
// `space` must be null or a handle not yet freed.
void nugs_space_free(struct NugsSpace *space);

// Fourier transform of a described test function at every frequency of
// `samples`, written to `out` (length `len`).
//
// # Safety
// `function` must be a NUL-terminated string; `samples` a live handle;
// `out` must hold `len` elements.
enum NugsStatus nugs_transform_function(const char *function,
                                        const struct NugsSamples *samples,
                                        struct NugsComplex *out,
                                        size_t len);

// Stability ratio `(1 + delta) / sqrt(C1)` of the weighted least-squares
// problem, infinite when the problem is singular.
//
// # Safety
// `space` and `samples` must be live handles; `out` must be writable.
enum NugsStatus nugs_stability_constant(const struct NugsSpace *space,
                                        const struct NugsSamples *samples,
                                        double *out);

// Solves the weighted least-squares problem for `values` sampled at
// `samples`. `weights` may be null to use the midpoint weights.
//
// # Safety
// `space` and `samples` must be live handles; `values` (and `weights` if
// non-null) must hold `len` elements; `out` must be writable.
enum NugsStatus nugs_reconstruct(const struct NugsSpace *space,
                                 const struct NugsSamples *samples,
                                 const struct NugsComplex *values,
                                 const double *weights,
                                 size_t len,
                                 struct NugsReconstruction **out);

// Number of coefficients, or 0 for a null handle.
//
// # Safety
// `rec` must be null or a live handle.
size_t nugs_reconstruction_len(const struct NugsReconstruction *rec);

// Copies the coefficients into `out`.
//
// # Safety
// `rec` must be a live handle; `out` must hold `len` elements.
enum NugsStatus nugs_reconstruction_coefficients(const struct NugsReconstruction *rec,
                                                 struct NugsComplex *out,
                                                 size_t len);

// Weighted residual norm of the fit.
//
// # Safety
// `rec` must be a live handle; `out` must be writable.
enum NugsStatus nugs_reconstruction_residual(const struct NugsReconstruction *rec, double *out);

// Evaluates the reconstruction at `len` points of `[0, 1]`.
//
// # Safety
// `rec` and `space` must be live handles, `space` the one used to build
// `rec`; `xs` and `out` must hold `len` elements.
enum NugsStatus nugs_reconstruction_evaluate(const struct NugsReconstruction *rec,
                                             const struct NugsSpace *space,
                                             const double *xs,
                                             struct NugsComplex *out,
                                             size_t len);

// Releases a reconstruction.
//
// # Safety
// `rec` must be null or a handle not yet freed.
void nugs_reconstruction_free(struct NugsReconstruction *rec);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NUGS_H */
