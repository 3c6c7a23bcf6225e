#ifndef EIT_MEMORY_H
#define EIT_MEMORY_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum EitStatus {
  EIT_STATUS_OK = 0,
  EIT_STATUS_NULL_POINTER = 1,
  EIT_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The pulse cannot be impedance matched.
   */
  EIT_STATUS_UNMATCHABLE = 3,
  /**
   * Other physically infeasible request (truncation, step or bath guards).
   */
  EIT_STATUS_INFEASIBLE = 4,
  EIT_STATUS_INVALID_STATE = 5,
  /**
   * Output buffer too small.
   */
  EIT_STATUS_BUFFER_TOO_SMALL = 6,
  EIT_STATUS_PANIC = 7,
} EitStatus;

/**
 * Opaque single-photon envelope.
 */
typedef struct EitEnvelope EitEnvelope;

/**
 * Opaque control schedule cos θ(t).
 */
typedef struct EitSchedule EitSchedule;

/**
 * Opaque density matrix in the photon-number basis.
 */
typedef struct EitState EitState;

/**
 * Physical constants, in units of the cavity decay rate.
 */
typedef struct EitParams {
  double gamma;
  double g_sqrt_n;
  double gamma_a;
  double gamma_0;
} EitParams;

/**
 * Summary of one memory cycle.
 */
typedef struct EitCycleReport {
  double d_in;
  double d_out;
  double eta;
  double fidelity;
  double released_norm;
} EitCycleReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call into this library on the same thread.
 */
const char *eit_last_error_message(void);

struct EitParams eit_params_default(void);

/**
 * Normalized sech pulse `sech((t − center)/width)` on `len` samples from `t0`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum EitStatus eit_envelope_sech(double width,
                                 double center,
                                 double t0,
                                 double dt,
                                 size_t len,
                                 struct EitEnvelope **out);

/**
 * Envelope from `len` samples; `im` may be null for a real pulse. The
 * samples are normalized to unit energy.
 *
 * # Safety
 * `re` (and `im` when non-null) must point to `len` readable doubles; `out`
 * must be writable.
 */
enum EitStatus eit_envelope_from_samples(double t0,
                                         double dt,
                                         size_t len,
                                         const double *re,
                                         const double *im,
                                         struct EitEnvelope **out);

/**
 * # Safety
 * `h` must be null or a handle from this library.
 */
size_t eit_envelope_len(const struct EitEnvelope *h);

/**
 * Copy the samples into `re` and `im` (each of capacity `cap`).
 *
 * # Safety
 * `re` and `im` must point to `cap` writable doubles.
 */
enum EitStatus eit_envelope_samples(const struct EitEnvelope *h,
                                    double *re,
                                    double *im,
                                    size_t cap);

/**
 * # Safety
 * `h` must be null or a handle from this library not yet freed.
 */
void eit_envelope_free(struct EitEnvelope *h);

/**
 * Impedance-matched schedule for envelope `h`. Fails with
 * `EIT_STATUS_UNMATCHABLE` when the pulse is faster than the cavity.
 *
 * # Safety
 * Pointers must be valid handles / structs; `out` writable.
 */
enum EitStatus eit_matched_schedule(const struct EitEnvelope *h,
                                    const struct EitParams *params,
                                    struct EitSchedule **out);

/**
 * # Safety
 * `s` must be null or a handle from this library.
 */
size_t eit_schedule_len(const struct EitSchedule *s);

/**
 * # Safety
 * `out` must point to `cap` writable doubles.
 */
enum EitStatus eit_schedule_cos_theta(const struct EitSchedule *s, double *out, size_t cap);

/**
 * # Safety
 * `s` must be null or a handle from this library not yet freed.
 */
void eit_schedule_free(struct EitSchedule *s);

/**
 * Final dark amplitude after driving with `h` under schedule `s`.
 *
 * # Safety
 * Handles must be valid; `d_re` and `d_im` writable.
 */
enum EitStatus eit_capture_amplitude(const struct EitEnvelope *h,
                                     const struct EitSchedule *s,
                                     const struct EitParams *params,
                                     double *d_re,
                                     double *d_im);

/**
 * Fock state `|n⟩` with cutoff `dim`.
 *
 * # Safety
 * `out` must be writable.
 */
enum EitStatus eit_state_fock(size_t n, size_t dim, struct EitState **out);

/**
 * Squeezed vacuum with parameter `r` and cutoff `dim`.
 *
 * # Safety
 * `out` must be writable.
 */
enum EitStatus eit_state_squeezed(double r, size_t dim, struct EitState **out);

/**
 * Pure state from `len` amplitudes (not renormalized). Two-mode states use
 * `len = d*d` with index `n*d + m`.
 *
 * # Safety
 * `re` and `im` must point to `len` readable doubles; `out` writable.
 */
enum EitStatus eit_state_from_amplitudes(const double *re,
                                         const double *im,
                                         size_t len,
                                         struct EitState **out);

/**
 * # Safety
 * `st` must be null or a handle from this library.
 */
size_t eit_state_dim(const struct EitState *st);

/**
 * # Safety
 * `st` must be null or a handle from this library not yet freed.
 */
void eit_state_free(struct EitState *st);

/**
 * Overlap fidelity `Tr{a b}`.
 *
 * # Safety
 * Handles must be valid; `out` writable.
 */
enum EitStatus eit_state_fidelity(const struct EitState *a, const struct EitState *b, double *out);

/**
 * Capture `rho` from pulse `h`, hold for `t_s`, release the mirror image.
 * `simulated = false` uses lossless capture and release. `out_state` may be
 * null when only the report is wanted.
 *
 * # Safety
 * Handles must be valid; `report` writable; `out_state` null or writable.
 */
enum EitStatus eit_full_cycle(const struct EitState *rho,
                              const struct EitEnvelope *h,
                              const struct EitParams *params,
                              double t_s,
                              bool simulated,
                              struct EitCycleReport *report,
                              struct EitState **out_state);

/**
 * Store both modes of a two-mode state, with real capture amplitudes.
 *
 * # Safety
 * `rho` must be a valid handle; `out` writable.
 */
enum EitStatus eit_bipartite_store(const struct EitState *rho,
                                   double d_left,
                                   double d_right,
                                   double gamma_0,
                                   double t_s,
                                   struct EitState **out);

/**
 * # Safety
 * `rho` must be a valid handle; `out` writable.
 */
enum EitStatus eit_negativity(const struct EitState *rho, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EIT_MEMORY_H */
