#ifndef ASEP_SPECTRA_H
#define ASEP_SPECTRA_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes; success is zero.
 */
typedef enum AsepStatus {
  ASEP_STATUS_OK = 0,
  ASEP_STATUS_INVALID_PARAMS = 1,
  ASEP_STATUS_CAP_EXCEEDED = 2,
  ASEP_STATUS_DEGENERATE_SECTOR = 3,
  ASEP_STATUS_OUT_OF_RANGE = 4,
  ASEP_STATUS_NO_CONVERGENCE = 5,
  ASEP_STATUS_INSUFFICIENT_DATA = 6,
  ASEP_STATUS_NON_DECAYING_CORRELATION = 7,
  ASEP_STATUS_CHECK_FAILED = 8,
  ASEP_STATUS_IO = 9,
  ASEP_STATUS_NULL_POINTER = 10,
  ASEP_STATUS_INTERNAL = 11,
} AsepStatus;

/**
 * Which Dirichlet form a gap refers to.
 */
typedef enum AsepForm {
  ASEP_FORM_FULL = 0,
  ASEP_FORM_MODIFIED = 1,
} AsepForm;

typedef enum AsepMode {
  ASEP_MODE_LATTICE = 0,
  ASEP_MODE_PROFILE = 1,
} AsepMode;

/**
 * Opaque canonical sector `(q, L, H, N)`.
 */
typedef struct AsepEnsemble AsepEnsemble;

/**
 * Opaque simulator state.
 */
typedef struct AsepSimulator AsepSimulator;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy the last error message of this thread into `buf` (nul-terminated,
 * truncated to `len`). Returns the full message length, `0` if none.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t asep_last_error(char *buf, size_t len);

/**
 * Static version string.
 */
const char *asep_version(void);

/**
 * Validate `(q, L, H, N)` and allocate a handle.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum AsepStatus asep_ensemble_new(double q,
                                  size_t sticks,
                                  size_t height,
                                  size_t particles,
                                  struct AsepEnsemble **out);

/**
 * # Safety
 * `ens` must come from [`asep_ensemble_new`] and not be used afterwards.
 */
void asep_ensemble_free(struct AsepEnsemble *ens);

/**
 * Spectral gap of the generator on the sector; `0` on reducible sectors.
 *
 * # Safety
 * `ens` must be a live handle and `gap` valid for writes.
 */
enum AsepStatus asep_sector_gap(const struct AsepEnsemble *ens, enum AsepForm form, double *gap);

/**
 * Gap of the lumped row-occupation chain.
 *
 * # Safety
 * `ens` must be a live handle and `gap` valid for writes.
 */
enum AsepStatus asep_profile_gap(const struct AsepEnsemble *ens, double *gap);

/**
 * Largest eigenvalue modulus of the stick kernel off the constants and
 * the centred occupation.
 *
 * # Safety
 * `ens` must be a live handle and `out` valid for writes.
 */
enum AsepStatus asep_third_modulus(const struct AsepEnsemble *ens, double *out);

/**
 * First excitation of the kink chain with spin `twice_s / 2` and length
 * `height` in the sector `S³ = sector_2n / 2`. `NaN` on one-state sectors.
 *
 * # Safety
 * `gap` must be valid for writes.
 */
enum AsepStatus asep_xxz_gap(size_t twice_s,
                             size_t height,
                             double delta,
                             int64_t sector_2n,
                             double *gap);

/**
 * Run the identity suite, optionally restricted by `filter` (may be null).
 * `passed` receives 1 or 0.
 *
 * # Safety
 * `filter` must be null or a nul-terminated string; `passed` valid for writes.
 */
enum AsepStatus asep_verify(const char *filter, int32_t *passed);

/**
 * Start a simulation of the sector from the bottom-filled configuration.
 *
 * # Safety
 * `ens` must be a live handle and `out` valid for writes.
 */
enum AsepStatus asep_simulator_new(const struct AsepEnsemble *ens,
                                   enum AsepMode mode,
                                   uint64_t seed,
                                   struct AsepSimulator **out);

/**
 * # Safety
 * `sim` must come from [`asep_simulator_new`] and not be used afterwards.
 */
void asep_simulator_free(struct AsepSimulator *sim);

/**
 * Advance by `events` jumps; `time` (may be null) receives the clock.
 *
 * # Safety
 * `sim` must be a live handle; `time` null or valid for writes.
 */
enum AsepStatus asep_simulator_step(struct AsepSimulator *sim, uint64_t events, double *time);

/**
 * Copy the row occupations `ω_1..ω_H` into `buf`, which must hold `len ≥ H`
 * entries.
 *
 * # Safety
 * `sim` must be a live handle and `buf` valid for `len` writes.
 */
enum AsepStatus asep_simulator_profile(const struct AsepSimulator *sim, size_t *buf, size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ASEP_SPECTRA_H */
