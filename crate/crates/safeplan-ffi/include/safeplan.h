#ifndef SAFEPLAN_H
#define SAFEPLAN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every entry point.
 */
typedef enum SpStatus {
  SpOk = 0,
  /**
   * A pointer was null or a parameter was out of range.
   */
  SpInvalidArgument = 1,
  /**
   * Input text was not valid UTF-8/JSON or violated its schema.
   */
  SpParseError = 2,
  /**
   * Inputs parsed but are inconsistent (mismatched variables, bad plan).
   */
  SpValidationError = 3,
  /**
   * The planner proved the problem unsolvable (a verdict, not an error).
   */
  SpNoPlan = 4,
  /**
   * The planner hit its resource limits before an answer.
   */
  SpResourceLimit = 5,
  /**
   * An internal panic was caught at the boundary.
   */
  SpPanic = 6,
} SpStatus;

/**
 * A learned model (precondition upper bounds, effect lower bounds).
 */
typedef struct SpLearned SpLearned;

/**
 * An action model behind an opaque handle (ground truth or compiled).
 */
typedef struct SpModel SpModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Returns the last error message recorded on this thread as a fresh
 * string (caller frees), or null if none.
 */
char *sp_last_error(void);

/**
 * Frees a string returned by this library. Null is ignored.
 */
void sp_string_free(char *s);

/**
 * Parses a domain JSON document into a model handle.
 */
enum SpStatus sp_model_parse(const char *json, struct SpModel **out);

/**
 * Builds a ground-truth logistics model.
 */
enum SpStatus sp_model_logistics(uintptr_t locations,
                                 uintptr_t trucks,
                                 uintptr_t packages,
                                 struct SpModel **out);

/**
 * Serializes a model handle back to canonical domain JSON.
 */
enum SpStatus sp_model_to_json(const struct SpModel *model, char **out);

void sp_model_free(struct SpModel *model);

/**
 * Learns a conservative model from a JSON-Lines trajectory corpus against
 * the variables of `vars_model`. `id` may be null.
 */
enum SpStatus sp_learn(const struct SpModel *vars_model,
                       const char *trajectories_jsonl,
                       const char *id,
                       struct SpLearned **out);

/**
 * Parses a learned-model JSON document.
 */
enum SpStatus sp_learned_parse(const char *json, struct SpLearned **out);

enum SpStatus sp_learned_to_json(const struct SpLearned *learned, char **out);

void sp_learned_free(struct SpLearned *learned);

/**
 * Compiles a learned model with the init/goal of `problem_json` (its
 * action set is ignored) and returns the compiled problem as JSON.
 */
enum SpStatus sp_compile(const struct SpLearned *learned, const char *problem_json, char **out);

/**
 * Solves a problem JSON document with the optimal planner. On `SpOk`
 * writes a plan JSON document; `SpNoPlan` and `SpResourceLimit` are
 * verdict statuses with no output. `max_generated = 0` and
 * `max_seconds <= 0` select the defaults (10^7 states, 60 s).
 */
enum SpStatus sp_plan(const char *problem_json,
                      uint64_t max_generated,
                      double max_seconds,
                      char **out_plan_json);

/**
 * Validates a plan JSON document against a problem JSON document.
 * `out_success` reports the verdict; the status is `SpOk` unless the
 * inputs are malformed (an invalid plan is a verdict, not an error).
 */
enum SpStatus sp_validate(const char *problem_json, const char *plan_json, bool *out_success);

/**
 * Audits a learned model against a ground-truth model and returns the
 * combined safety/bounds report as JSON. `samples = 0` selects exhaustive
 * mode with the default 50,000-state cap. `trajectories_jsonl` may be
 * null to skip the bounds audit. The status is `SpOk` for both safe and
 * unsafe outcomes; the report carries the verdict.
 */
enum SpStatus sp_audit(const struct SpLearned *learned,
                       const struct SpModel *truth,
                       const char *trajectories_jsonl,
                       uint64_t samples,
                       uint64_t seed,
                       char **out_report_json);

/**
 * Exports a problem JSON document as planner-input text (`.sas`), for
 * handing compiled problems to off-the-shelf planners.
 */
enum SpStatus sp_write_sas(const char *problem_json, char **out_sas);

/**
 * The trajectory-count bound. Writes the exact ceiling (saturating at
 * u64::MAX) and, when non-null, the pre-ceiling real value.
 */
enum SpStatus sp_sample_complexity(uint64_t d,
                                   uint64_t num_actions,
                                   uint64_t num_vars,
                                   double epsilon,
                                   double delta,
                                   uint64_t *out_m,
                                   double *out_real);

/**
 * Largest epsilon keeping P(solvable | no plan) at or below gamma.
 */
enum SpStatus sp_epsilon_for_gamma(double gamma, double mu, double *out_epsilon);

/**
 * P(solvable | no plan) for a given epsilon and mu.
 */
enum SpStatus sp_gamma_for_epsilon(double epsilon, double mu, double *out_gamma);

/**
 * The solvability probability table as JSON.
 */
enum SpStatus sp_solvability_table(double mu, double epsilon, char **out_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SAFEPLAN_H */
