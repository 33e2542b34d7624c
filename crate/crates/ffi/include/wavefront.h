#ifndef WAVEFRONT_H
#define WAVEFRONT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

/*
 Values of the `family` argument of [`wft_flux_model_new`].
 */
#define WFT_FAMILY_GREENSHIELDS 0

#define WFT_FAMILY_SKEWED_CUBIC 1

typedef enum WftStatus {
  WFT_STATUS_OK = 0,
  WFT_STATUS_NULL_POINTER = 1,
  WFT_STATUS_INVALID_ARGUMENT = 2,
  WFT_STATUS_DOMAIN = 3,
  WFT_STATUS_MODEL = 4,
  WFT_STATUS_SCENARIO = 5,
  WFT_STATUS_OUT_OF_RANGE = 6,
  WFT_STATUS_VALIDATION = 7,
  WFT_STATUS_GLIMM_VIOLATION = 8,
  WFT_STATUS_EVENT_CAP = 9,
  WFT_STATUS_IO = 10,
  WFT_STATUS_INTERNAL = 11,
  WFT_STATUS_PANIC = 12,
} WftStatus;

/*
 Opaque flux model.
 */
typedef struct WftFluxModel WftFluxModel;

/*
 Opaque simulation: a parsed scenario and a tracker that can be advanced.
 */
typedef struct WftSimulation WftSimulation;

/*
 Bottleneck quantities at one control speed.
 */
typedef struct WftGeometry {
  double u;
  double tilde_rho;
  double check_rho;
  double hat_rho;
  double star_rho;
  double capacity;
} WftGeometry;

/*
 One row of the interaction ledger. `kind`: 0 init, 1 collision,
 2 AV interaction, 3 control jump.
 */
typedef struct WftLedgerEntry {
  double t;
  uint32_t kind;
  double tv;
  double gamma;
  double tv_u;
  double upsilon;
  uintptr_t waves;
  double delta_upsilon;
} WftLedgerEntry;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Library version as a static NUL-terminated string.
 */
const char *wft_version(void);

/*
 Copies the calling thread's last error message into `buf` and returns the
 buffer size needed for the full message. An empty string means the last
 call succeeded.

 # Safety
 `buf` must be null or valid for `len` bytes.
 */
uintptr_t wft_last_error(char *buf, uintptr_t len);

/*
 Creates a flux model. `skew` is ignored for Greenshields.

 # Safety
 `out` must be a valid pointer.
 */
enum WftStatus wft_flux_model_new(uint32_t family,
                                  double rho_max,
                                  double v_max,
                                  double alpha,
                                  double skew,
                                  struct WftFluxModel **out);

/*
 # Safety
 `model` must be null or a handle from [`wft_flux_model_new`] not yet freed.
 */
void wft_flux_model_free(struct WftFluxModel *model);

/*
 # Safety
 `model` must be a live handle and `out` a valid pointer.
 */
enum WftStatus wft_flux(const struct WftFluxModel *model, double rho, double *out);

/*
 # Safety
 `model` must be a live handle and `out` a valid pointer.
 */
enum WftStatus wft_geometry_at(const struct WftFluxModel *model, double u, struct WftGeometry *out);

/*
 Parses scenario text and sets up a tracker at time 0.

 # Safety
 `text` must be a NUL-terminated UTF-8 string and `out` a valid pointer.
 */
enum WftStatus wft_simulation_new(const char *text, struct WftSimulation **out);

/*
 # Safety
 `sim` must be null or a handle from [`wft_simulation_new`] not yet freed.
 */
void wft_simulation_free(struct WftSimulation *sim);

/*
 Advances the simulation to `t`, which must exceed the current time. A
 negative `t` means the scenario's `t_end`.

 # Safety
 `sim` must be a live handle.
 */
enum WftStatus wft_simulation_run(struct WftSimulation *sim, double t);

/*
 # Safety
 `sim` must be a live handle and `out` a valid pointer.
 */
enum WftStatus wft_simulation_time(const struct WftSimulation *sim, double *out);

/*
 Density at the current time at each of the `n` positions in `xs`.

 # Safety
 `xs` and `out` must be valid for `n` doubles.
 */
enum WftStatus wft_simulation_sample_density(const struct WftSimulation *sim,
                                             const double *xs,
                                             uintptr_t n,
                                             double *out);

/*
 # Safety
 `sim` must be a live handle and `out` a valid pointer.
 */
enum WftStatus wft_simulation_av_position(const struct WftSimulation *sim, double *out);

/*
 Current value of the interaction functional.

 # Safety
 `sim` must be a live handle and `out` a valid pointer.
 */
enum WftStatus wft_simulation_upsilon(const struct WftSimulation *sim, double *out);

/*
 # Safety
 `sim` must be a live handle and `out` a valid pointer.
 */
enum WftStatus wft_simulation_ledger_len(const struct WftSimulation *sim, uintptr_t *out);

/*
 # Safety
 `sim` must be a live handle and `out` a valid pointer.
 */
enum WftStatus wft_simulation_ledger_entry(const struct WftSimulation *sim,
                                           uintptr_t index,
                                           struct WftLedgerEntry *out);

/*
 Re-checks the run so far at `samples` time slices and stores the number
 of violations found.

 # Safety
 `sim` must be a live handle and `violations` a valid pointer.
 */
enum WftStatus wft_simulation_validate(const struct WftSimulation *sim,
                                       uintptr_t samples,
                                       uintptr_t *violations);

/*
 Copies the scenario hash (64 hex digits) into `buf`; `needed` receives the
 buffer size required, including the terminator.

 # Safety
 `buf` must be null or valid for `len` bytes; `needed` must be null or valid.
 */
enum WftStatus wft_simulation_scenario_hash(const struct WftSimulation *sim,
                                            char *buf,
                                            uintptr_t len,
                                            uintptr_t *needed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WAVEFRONT_H */
