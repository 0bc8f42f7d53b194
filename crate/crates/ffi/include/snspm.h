#ifndef SNSPM_H
#define SNSPM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SnspmStatus {
  SNSPM_STATUS_OK = 0,
  SNSPM_STATUS_NULL_POINTER = 1,
  SNSPM_STATUS_INVALID_UTF8 = 2,
  /**
   * Malformed input: bad JSON, unknown preset, variant or override key.
   */
  SNSPM_STATUS_CONFIG = 3,
  /**
   * A parameter outside its allowed range.
   */
  SNSPM_STATUS_DOMAIN = 4,
  /**
   * The evaluation itself failed (no sign change, singular operator, ...).
   */
  SNSPM_STATUS_NUMERICAL = 5,
  SNSPM_STATUS_PANIC = 6,
} SnspmStatus;

/**
 * Opaque parameter set.
 */
typedef struct SnspmParams SnspmParams;

/**
 * One evaluated point of a key-rate curve. `e_signal` is NaN when no
 * conclusive events occur.
 */
typedef struct SnspmRatePoint {
  double distance_km;
  double rate;
  double e_signal;
  double chi;
  double p_conclusive;
  double p_sns;
  double p_ss;
  double p_nn;
} SnspmRatePoint;

/**
 * Distinguishing-attack comparison at one distance. `ratio` is NaN when the
 * baseline error rate is zero.
 */
typedef struct SnspmAttackReport {
  double distance_km;
  double e_distinguish;
  double e_baseline;
  double ratio;
  bool detectable;
} SnspmAttackReport;

typedef struct SnspmMcSummary {
  uint64_t rounds;
  uint64_t sns;
  uint64_t ss;
  uint64_t nn;
  uint64_t conclusive;
  uint64_t correlated;
  double p_conclusive;
  double correlation;
} SnspmMcSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses a JSON parameter set into a new handle written to `*out`.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum SnspmStatus snspm_params_from_json(const char *json, struct SnspmParams **out);

/**
 * Creates a handle holding the parameters of a named preset.
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` a valid pointer.
 */
enum SnspmStatus snspm_params_preset(const char *name, struct SnspmParams **out);

/**
 * Applies a `key=value` override. On failure the handle is left unchanged.
 *
 * # Safety
 * `params` must come from this library and `assignment` be NUL-terminated.
 */
enum SnspmStatus snspm_params_override(struct SnspmParams *params, const char *assignment);

/**
 * Serializes the parameter set as JSON. Free the string with
 * [`snspm_string_free`].
 *
 * # Safety
 * `params` must come from this library and `out` be a valid pointer.
 */
enum SnspmStatus snspm_params_to_json(const struct SnspmParams *params, char **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `params` must come from this library and not be used afterwards.
 */
void snspm_params_free(struct SnspmParams *params);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void snspm_string_free(char *s);

/**
 * Evaluates one rate variant (`loss`, `loss_rand`, `real`, `real_aopp`,
 * `rand`, `rand_aopp`) at distance `distance_km`.
 *
 * # Safety
 * Pointers must be valid; `variant` NUL-terminated.
 */
enum SnspmStatus snspm_rate(const struct SnspmParams *params,
                            const char *variant,
                            double distance_km,
                            struct SnspmRatePoint *out);

/**
 * Largest distance in `[lo, hi]` with a positive key rate, to 1e-3 km.
 *
 * # Safety
 * Pointers must be valid; `variant` NUL-terminated.
 */
enum SnspmStatus snspm_max_distance(const struct SnspmParams *params,
                                    const char *variant,
                                    double lo,
                                    double hi,
                                    double *out_km);

/**
 * Compares the distinguishing attack with the signal error rate at
 * `distance_km`. `realistic` selects the imperfect-device model.
 *
 * # Safety
 * Pointers must be valid.
 */
enum SnspmStatus snspm_attack(const struct SnspmParams *params,
                              bool realistic,
                              double distance_km,
                              struct SnspmAttackReport *out);

/**
 * Seeded Monte Carlo of the loss-only protocol.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum SnspmStatus snspm_mc_simulate(double mu,
                                   double epsilon,
                                   double eta,
                                   uint64_t rounds,
                                   uint64_t seed,
                                   struct SnspmMcSummary *out);

/**
 * Binary Shannon entropy in bits.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum SnspmStatus snspm_binary_entropy(double p, double *out);

/**
 * Message of the last failed call on this thread, or null. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *snspm_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *snspm_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SNSPM_H */
