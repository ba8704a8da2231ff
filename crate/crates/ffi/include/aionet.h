#ifndef AIONET_H
#define AIONET_H

/* Generated by cbindgen from the aionet-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of a library call. Anything but `Ok` leaves a diagnostic in
 * [`aionet_last_error`].
 */
typedef enum AionetStatus {
  AionetStatus_Ok = 0,
  /**
   * A required pointer argument was null.
   */
  AionetStatus_NullArgument = 1,
  /**
   * An argument value is out of range or malformed (bad weights, bad gap,
   * non-UTF-8 text, index past the end).
   */
  AionetStatus_InvalidArgument = 2,
  /**
   * The input data is structurally invalid (unparsable JSON, inconsistent
   * scenario, schedule from a different network).
   */
  AionetStatus_InvalidInput = 3,
  /**
   * A file could not be read or written.
   */
  AionetStatus_Io = 4,
  /**
   * The operation refused to start because it would exceed a size limit.
   */
  AionetStatus_Limit = 5,
  /**
   * An internal panic was caught at the boundary.
   */
  AionetStatus_Panic = 6,
} AionetStatus;

/**
 * What the solver certified about a returned schedule.
 */
typedef enum AionetProofKind {
  /**
   * The schedule attains the minimum objective value.
   */
  AionetProofKind_Optimal = 0,
  /**
   * The objective is within the reported relative gap of the minimum.
   */
  AionetProofKind_GapBounded = 1,
  /**
   * Feasible only; no bound was proven.
   */
  AionetProofKind_Heuristic = 2,
} AionetProofKind;

/**
 * Link technology of a scheduled transmission.
 */
typedef enum AionetTechnology {
  AionetTechnology_Rf = 0,
  AionetTechnology_Oc = 1,
} AionetTechnology;

/**
 * Opaque network instance: devices, demand windows, visibility, budgets.
 */
typedef struct AionetScenario AionetScenario;

/**
 * Opaque solve result: schedule, objective breakdown, certificate.
 */
typedef struct AionetSolution AionetSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *aionet_version(void);

/**
 * Message describing the most recent failure on this thread, or null if the
 * most recent call succeeded. Valid until the next library call on the same
 * thread; do not free.
 */
const char *aionet_last_error(void);

/**
 * Generates a scenario from a JSON generation config and a seed. Pass null
 * for `config_json` to use the built-in defaults. The same config and seed
 * always produce the same scenario. On success `*out` owns the handle.
 *
 * # Safety
 * `config_json` must be null or a NUL-terminated string; `out` must be a
 * valid pointer.
 */
enum AionetStatus aionet_scenario_generate(const char *config_json,
                                           uint64_t seed,
                                           struct AionetScenario **out);

/**
 * Loads a scenario from a JSON file produced by [`aionet_scenario_save`].
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be a valid pointer.
 */
enum AionetStatus aionet_scenario_load(const char *path, struct AionetScenario **out);

/**
 * Writes the scenario to a JSON file.
 *
 * # Safety
 * `scenario` must be a live handle; `path` must be a NUL-terminated string.
 */
enum AionetStatus aionet_scenario_save(const struct AionetScenario *scenario, const char *path);

/**
 * Releases a scenario handle. Null is a no-op.
 *
 * # Safety
 * `scenario` must be null or a handle not freed before.
 */
void aionet_scenario_free(struct AionetScenario *scenario);

/**
 * Device count (nodes plus access points); 0 when the handle is null.
 *
 * # Safety
 * `scenario` must be null or a live handle.
 */
uintptr_t aionet_scenario_devices(const struct AionetScenario *scenario);

/**
 * Number of demanded messages; 0 when the handle is null.
 *
 * # Safety
 * `scenario` must be null or a live handle.
 */
uintptr_t aionet_scenario_messages(const struct AionetScenario *scenario);

/**
 * Number of time slots in the horizon; 0 when the handle is null.
 *
 * # Safety
 * `scenario` must be null or a live handle.
 */
uintptr_t aionet_scenario_horizon(const struct AionetScenario *scenario);

/**
 * Unscheduled-message delay penalty in slots; 0 when the handle is null.
 *
 * # Safety
 * `scenario` must be null or a live handle.
 */
uintptr_t aionet_scenario_tau(const struct AionetScenario *scenario);

/**
 * Minimizes the weighted objective by branch and bound. The three weights
 * must be finite, non-negative, and sum to one. `gap_target` 0 demands a
 * proven optimum; larger values accept any schedule proven within that
 * relative gap. `node_limit` 0 means unlimited, as does a non-positive
 * `time_limit_secs`. On success `*out` owns the solution handle.
 *
 * # Safety
 * `scenario` must be a live handle; `out` must be a valid pointer.
 */
enum AionetStatus aionet_solve(const struct AionetScenario *scenario,
                               double alpha_energy,
                               double alpha_switching,
                               double alpha_delay,
                               double gap_target,
                               uint64_t node_limit,
                               double time_limit_secs,
                               struct AionetSolution **out);

/**
 * Releases a solution handle. Null is a no-op.
 *
 * # Safety
 * `solution` must be null or a handle not freed before.
 */
void aionet_solution_free(struct AionetSolution *solution);

/**
 * Total weighted objective value; NaN when the handle is null.
 *
 * # Safety
 * `solution` must be null or a live handle.
 */
double aionet_solution_objective(const struct AionetSolution *solution);

/**
 * Raw energy consumed by the schedule, in energy units; NaN when null.
 *
 * # Safety
 * `solution` must be null or a live handle.
 */
double aionet_solution_energy(const struct AionetSolution *solution);

/**
 * Number of technology switches the schedule incurs; 0 when null.
 *
 * # Safety
 * `solution` must be null or a live handle.
 */
uint64_t aionet_solution_switches(const struct AionetSolution *solution);

/**
 * Total delay in slots, counting the penalty for unscheduled messages; 0
 * when null.
 *
 * # Safety
 * `solution` must be null or a live handle.
 */
uint64_t aionet_solution_delay(const struct AionetSolution *solution);

/**
 * Search states visited while solving; 0 when null.
 *
 * # Safety
 * `solution` must be null or a live handle.
 */
uint64_t aionet_solution_nodes(const struct AionetSolution *solution);

/**
 * Number of scheduled transmissions; 0 when null.
 *
 * # Safety
 * `solution` must be null or a live handle.
 */
uintptr_t aionet_solution_transmissions(const struct AionetSolution *solution);

/**
 * Reports the solver's certificate: the proof kind and the relative gap (0
 * for a proven optimum, infinity when no bound was proven).
 *
 * # Safety
 * `solution` must be a live handle; `kind` and `gap` must be valid pointers.
 */
enum AionetStatus aionet_solution_proof(const struct AionetSolution *solution,
                                        enum AionetProofKind *kind,
                                        double *gap);

/**
 * Copies one scheduled transmission out by index (ordered by step, then
 * sender). Fails with `InvalidArgument` when `index` is past the end.
 *
 * # Safety
 * `solution` must be a live handle; the four out pointers must be valid.
 */
enum AionetStatus aionet_solution_transmission(const struct AionetSolution *solution,
                                               uintptr_t index,
                                               uintptr_t *sender,
                                               uintptr_t *receiver,
                                               enum AionetTechnology *technology,
                                               uintptr_t *step);

/**
 * Writes the solution's schedule to a JSON file readable by the CLI.
 *
 * # Safety
 * `solution` must be a live handle; `path` must be a NUL-terminated string.
 */
enum AionetStatus aionet_solution_save_schedule(const struct AionetSolution *solution,
                                                const char *path);

/**
 * Serializes the full solution (schedule, objective breakdown, certificate,
 * search stats) to a JSON string. Free the result with
 * [`aionet_string_free`].
 *
 * # Safety
 * `solution` must be a live handle; `out` must be a valid pointer.
 */
enum AionetStatus aionet_solution_to_json(const struct AionetSolution *solution, char **out);

/**
 * Computes network-wide age-of-information metrics for the solution's
 * schedule: the mean and peak age averaged over every demanded stream.
 *
 * # Safety
 * `scenario` and `solution` must be live handles; `mean_aoi` and `peak_aoi`
 * must be valid pointers.
 */
enum AionetStatus aionet_aoi(const struct AionetScenario *scenario,
                             const struct AionetSolution *solution,
                             double *mean_aoi,
                             double *peak_aoi);

/**
 * Serializes the full age report (per-stream trajectories, per-type and
 * overall aggregates) to a JSON string. Free the result with
 * [`aionet_string_free`].
 *
 * # Safety
 * `scenario` and `solution` must be live handles; `out` must be a valid
 * pointer.
 */
enum AionetStatus aionet_aoi_to_json(const struct AionetScenario *scenario,
                                     const struct AionetSolution *solution,
                                     char **out);

/**
 * Releases a string returned by the `_to_json` functions. Null is a no-op.
 *
 * # Safety
 * `text` must be null or a string not freed before.
 */
void aionet_string_free(char *text);

/**
 * Writes the scenario's integer program in LP format under the given
 * objective weights.
 *
 * # Safety
 * `scenario` must be a live handle; `path` must be a NUL-terminated string.
 */
enum AionetStatus aionet_export_lp(const struct AionetScenario *scenario,
                                   double alpha_energy,
                                   double alpha_switching,
                                   double alpha_delay,
                                   const char *path);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AIONET_H */
