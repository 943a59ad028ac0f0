/* Generated by cbindgen from the tourplan-ffi crate. Do not edit. */

#ifndef TOURPLAN_H
#define TOURPLAN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  TP_STATUS_OK = 0,
  TP_STATUS_NULL_ARGUMENT = 1,
  TP_STATUS_INVALID_UTF8 = 2,
  TP_STATUS_INVALID_SCENARIO = 3,
  TP_STATUS_INVALID_ARGUMENT = 4,
  TP_STATUS_OUT_OF_RANGE = 5,
  TP_STATUS_PANIC = 6,
} TpStatus;

typedef enum {
  // Time-series greedy.
  TP_ALGORITHM_A = 0,
  // Whole single greedy.
  TP_ALGORITHM_B = 1,
  // Whole greedy with search width.
  TP_ALGORITHM_C = 2,
} TpAlgorithm;

// Ranked routes from one planner run.
typedef struct TpRoutes TpRoutes;

// A validated scenario.
typedef struct TpScenario TpScenario;

// One visit of a route. `spot_key` stays valid as long as the routes
// handle it came from.
typedef struct {
  // Minutes since midnight.
  uint16_t arrival_minutes;
  // Index of the spot in the scenario's spot list.
  size_t spot_index;
  const char *spot_key;
  double score;
} TpVisit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or an empty string.
// Valid until the next failing call on the same thread.
const char *tp_last_error(void);

// Library version as a static string.
const char *tp_version(void);

// Parses and validates a scenario document.
//
// # Safety
// `json` must be a nul-terminated string and `out` a valid pointer.
TpStatus tp_scenario_from_json(const char *json, TpScenario **out);

// Loads a bundled scenario by name (`table3`, `synth20`).
//
// # Safety
// `name` must be a nul-terminated string and `out` a valid pointer.
TpStatus tp_scenario_builtin(const char *name, TpScenario **out);

// # Safety
// `scenario` must come from this library and not be used afterwards.
void tp_scenario_free(TpScenario *scenario);

// Number of spots, or 0 for a null handle.
//
// # Safety
// `scenario` must be null or a live handle.
size_t tp_scenario_spot_count(const TpScenario *scenario);

// Serialises the scenario document.
//
// # Safety
// `scenario` must be a live handle and `out` a valid pointer.
TpStatus tp_scenario_to_json(const TpScenario *scenario, char **out);

// Plans from the scenario's start. `width` is ignored by A and B.
//
// # Safety
// `scenario` must be a live handle and `out` a valid pointer.
TpStatus tp_plan(const TpScenario *scenario,
                 TpAlgorithm algorithm,
                 size_t width,
                 size_t n_results,
                 TpRoutes **out);

// # Safety
// `routes` must come from this library and not be used afterwards.
void tp_routes_free(TpRoutes *routes);

// Number of routes, or 0 for a null handle.
//
// # Safety
// `routes` must be null or a live handle.
size_t tp_routes_count(const TpRoutes *routes);

// Tour score of route `index`.
//
// # Safety
// `routes` must be a live handle and `out` a valid pointer.
TpStatus tp_routes_score(const TpRoutes *routes, size_t index, double *out);

// Number of visits in route `index`.
//
// # Safety
// `routes` must be a live handle and `out` a valid pointer.
TpStatus tp_routes_len(const TpRoutes *routes, size_t index, size_t *out);

// Visit `visit` of route `index`.
//
// # Safety
// `routes` must be a live handle and `out` a valid pointer.
TpStatus tp_routes_visit(const TpRoutes *routes, size_t index, size_t visit, TpVisit *out);

// Routes as JSON, in the same layout as the HTTP service.
//
// # Safety
// `routes` must be a live handle and `out` a valid pointer.
TpStatus tp_routes_to_json(const TpRoutes *routes, char **out);

// Releases a string returned by this library.
//
// # Safety
// `s` must be null or a string from this library not yet freed.
void tp_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TOURPLAN_H */
