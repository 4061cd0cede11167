#ifndef ROBDIFF_H
#define ROBDIFF_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/*
 Bumped on any incompatible change to this interface.
 */
#define RD_ABI_VERSION 1

/*
 Engine kinds reported in `RdDiagnostics::kind`.
 */
#define RD_KIND_ADAPTIVE 0

#define RD_KIND_FD 1

#define RD_KIND_RED 2

/*
 Opaque streaming differentiator.
 */
typedef struct RdEngine RdEngine;

/*
 Status code returned by every fallible function.
 */
typedef int32_t RdStatus;

/*
 Snapshot of the latest step. Fields not applicable to the engine kind
 are zero.
 */
typedef struct RdDiagnostics {
  uint32_t kind;
  uint64_t step;
  double y;
  /*
   Adaptive engines: noise amplitude estimate.
   */
  double n_hat;
  /*
   Adaptive engines: selected window scale.
   */
  double gamma;
  /*
   Adaptive engines: difference-quotient window in seconds.
   */
  double t_hat;
  /*
   Adaptive engines: the same window in samples.
   */
  uint64_t lag;
  /*
   RED engines: internal states.
   */
  double y1;
  double y2;
} RdDiagnostics;

#define RD_OK 0

/*
 A required pointer argument was null.
 */
#define RD_NULL_POINTER 1

/*
 A parameter violated its documented range.
 */
#define RD_INVALID_PARAM 2

/*
 No step has been taken since creation or the last reset.
 */
#define RD_NO_DATA 3

/*
 An internal panic was caught at the boundary.
 */
#define RD_PANIC 4

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Interface version, `RD_ABI_VERSION`.
 */
uint32_t rd_abi_version(void);

/*
 Message for the last failed call on this thread. The pointer stays valid
 until the next failing call on the same thread.
 */
const char *rd_last_error(void);

/*
 Adaptive differentiator. `k_bar = 0` keeps the whole history; otherwise
 `k_bar >= 2`. `gamma_bar` must lie in `[2, 1 + sqrt(2)]`.

 # Safety
 `out` must be null or valid for writing one pointer.
 */
RdStatus rd_adaptive_new(double accel_bound,
                         double dt,
                         uint64_t k_bar,
                         double gamma_bar,
                         struct RdEngine **out);

/*
 Adaptive differentiator with the window sized for noise up to `noise_ceiling`.

 # Safety
 `out` must be null or valid for writing one pointer.
 */
RdStatus rd_adaptive_new_tuned(double accel_bound,
                               double dt,
                               double noise_ceiling,
                               struct RdEngine **out);

/*
 Finite difference tuned for known bounds `L` and `N`.

 # Safety
 `out` must be null or valid for writing one pointer.
 */
RdStatus rd_fd_new(double accel_bound, double noise_bound, double dt, struct RdEngine **out);

/*
 Robust exact differentiator; `implicit != 0` selects the implicit scheme.

 # Safety
 `out` must be null or valid for writing one pointer.
 */
RdStatus rd_red_new(double lambda1,
                    double lambda2,
                    double accel_bound,
                    double dt,
                    int32_t implicit,
                    struct RdEngine **out);

/*
 Feeds one sample and writes the derivative estimate to `y`.

 # Safety
 `engine` must be null or a live handle; `y` must be null or writable.
 */
RdStatus rd_engine_step(struct RdEngine *engine, double u, double *y);

/*
 Feeds `len` samples from `u` and writes `len` estimates to `y`.

 # Safety
 `u` and `y` must each be valid for `len` elements and must not overlap.
 */
RdStatus rd_engine_step_many(struct RdEngine *engine, const double *u, double *y, uintptr_t len);

/*
 Returns the engine to its state before the first sample.

 # Safety
 `engine` must be null or a live handle.
 */
RdStatus rd_engine_reset(struct RdEngine *engine);

/*
 Writes diagnostics of the latest step to `out`.

 # Safety
 `engine` must be null or a live handle; `out` must be null or writable.
 */
RdStatus rd_engine_diagnostics(const struct RdEngine *engine, struct RdDiagnostics *out);

/*
 Releases a handle. Null is accepted and ignored.

 # Safety
 `engine` must be null or a handle from an `rd_*_new` call that has not
 been freed yet.
 */
void rd_engine_free(struct RdEngine *engine);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ROBDIFF_H */
