/* C interface of the mdpcrit finite-MDP optimality-criteria toolkit. */

#pragma once

/* Generated with cbindgen:0.29.4 */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Status code of every fallible call.
typedef enum MdpcritStatus {
  MDPCRIT_STATUS_OK = 0,
  MDPCRIT_STATUS_NULL_POINTER = 1,
  MDPCRIT_STATUS_INVALID_UTF8 = 2,
  MDPCRIT_STATUS_PARSE_ERROR = 3,
  MDPCRIT_STATUS_VALIDATION_ERROR = 4,
  MDPCRIT_STATUS_DOMAIN_ERROR = 5,
  MDPCRIT_STATUS_SOLVER_ERROR = 6,
} MdpcritStatus;

// Optimality criterion selector for `mdpcrit_solve_json`.
typedef enum MdpcritCriterion {
  MDPCRIT_CRITERION_DISCOUNTED = 0,
  MDPCRIT_CRITERION_GAIN = 1,
  MDPCRIT_CRITERION_N_DISCOUNT = 2,
  MDPCRIT_CRITERION_TOTAL = 3,
} MdpcritCriterion;

// Opaque MDP handle: the validated model plus its optional distinguished
// terminal/reset marker.
typedef struct MdpcritModel MdpcritModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Version string of the library; static storage, do not free.
const char *mdpcrit_version(void);

// Message of the most recent failure on this thread; the buffer stays owned
// by the library and is overwritten by the next failure.
const char *mdpcrit_last_error_message(void);

// Release a string returned through an out-parameter.
void mdpcrit_string_free(char *ptr);

// Parse and validate an MDP JSON document into a model handle.
enum MdpcritStatus mdpcrit_model_parse_json(const char *json, struct MdpcritModel **out);

// Release a model handle.
void mdpcrit_model_free(struct MdpcritModel *model);

uintptr_t mdpcrit_model_num_states(const struct MdpcritModel *model);

uintptr_t mdpcrit_model_num_actions(const struct MdpcritModel *model);

// Serialize the model back to canonical JSON.
enum MdpcritStatus mdpcrit_model_to_json(const struct MdpcritModel *model, char **out);

// Chain-pattern and accessibility classification as a JSON object.
enum MdpcritStatus mdpcrit_classify_json(const struct MdpcritModel *model,
                                         uint64_t max_enum,
                                         char **out);

// Discounted values of the deterministic policy `actions` (length
// `num_states`), written into `values` (length `num_states`).
enum MdpcritStatus mdpcrit_eval_discounted(const struct MdpcritModel *model,
                                           const uintptr_t *actions,
                                           uintptr_t actions_len,
                                           double gamma,
                                           double *values);

// isd-weighted gain of the deterministic policy `actions`.
enum MdpcritStatus mdpcrit_eval_gain(const struct MdpcritModel *model,
                                     const uintptr_t *actions,
                                     uintptr_t actions_len,
                                     double *gain);

// Solve for an optimal policy set; the result (criterion, optimal value,
// policy set, iterations, residual) is returned as JSON. `gamma` applies to
// the discounted criterion, `n` to the n-discount one.
enum MdpcritStatus mdpcrit_solve_json(const struct MdpcritModel *model,
                                      enum MdpcritCriterion criterion,
                                      double gamma,
                                      int32_t n,
                                      uint64_t max_enum,
                                      char **out);

// Estimate the critical discount factor; `use_gain_estimator != 0` selects
// the gain-optimality threshold instead of argmax-set stability. Returns a
// JSON object.
enum MdpcritStatus mdpcrit_blackwell_json(const struct MdpcritModel *model,
                                          double tol,
                                          uintptr_t grid_size,
                                          uint8_t use_gain_estimator,
                                          char **out);

// Convert between episodic encodings: `to_reset != 0` rewires the
// absorbing ("zrat") model into the resetting ("rst") one, otherwise the
// reverse. `force != 0` skips the inevitable-termination precondition of
// the forward direction. The input handle must carry a matching
// `distinguished` marker; a new handle is returned.
enum MdpcritStatus mdpcrit_convert(const struct MdpcritModel *model,
                                   uint8_t to_reset,
                                   uint8_t force,
                                   struct MdpcritModel **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus
