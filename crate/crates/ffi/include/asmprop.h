#ifndef ASMPROP_H
#define ASMPROP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum AsmpropStatus {
  ASMPROP_STATUS_OK = 0,
  ASMPROP_STATUS_NULL_ARGUMENT = 1,
  ASMPROP_STATUS_INVALID_UTF8 = 2,
  ASMPROP_STATUS_INVALID_ARGUMENT = 3,
  /**
   * Syntax or type errors in a specification, property or scenario.
   */
  ASMPROP_STATUS_INVALID = 4,
  /**
   * A state, time or cancellation limit was hit.
   */
  ASMPROP_STATUS_LIMIT = 5,
  /**
   * The completion backend failed (network, HTTP, fixtures).
   */
  ASMPROP_STATUS_BACKEND = 6,
  /**
   * The agent gave up without a valid answer.
   */
  ASMPROP_STATUS_AGENT = 7,
  ASMPROP_STATUS_PANIC = 8,
} AsmpropStatus;

typedef enum AsmpropLogic {
  ASMPROP_LOGIC_CTL = 0,
  ASMPROP_LOGIC_LTL = 1,
} AsmpropLogic;

typedef enum AsmpropVerdict {
  ASMPROP_VERDICT_HOLDS = 0,
  ASMPROP_VERDICT_FAILS = 1,
  /**
   * Bounded LTL search found no violation.
   */
  ASMPROP_VERDICT_NO_VIOLATION_UP_TO = 2,
  ASMPROP_VERDICT_ERROR = 3,
} AsmpropVerdict;

/**
 * Verdicts for every property of a specification.
 */
typedef struct AsmpropReport AsmpropReport;

/**
 * A parsed and type-checked specification.
 */
typedef struct AsmpropSpec AsmpropSpec;

/**
 * Model checking limits. Zero fields keep the defaults.
 */
typedef struct AsmpropLimits {
  uint64_t max_states;
  uint64_t max_time_ms;
  uint32_t ltl_bound;
} AsmpropLimits;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next call on this thread.
 */
const char *asmprop_last_error(void);

/**
 * Releases a string returned by this library. Null is ignored.
 */
void asmprop_string_free(char *s);

/**
 * Library version as a static string.
 */
const char *asmprop_version(void);

/**
 * Parses and type-checks an AsmetaL specification.
 */
enum AsmpropStatus asmprop_spec_parse(const char *source, struct AsmpropSpec **out);

void asmprop_spec_free(struct AsmpropSpec *spec);

/**
 * Canonical AsmetaL text of the specification.
 */
enum AsmpropStatus asmprop_spec_print(const struct AsmpropSpec *spec, char **out);

enum AsmpropStatus asmprop_spec_property_count(const struct AsmpropSpec *spec, size_t *out);

/**
 * Type-checks a property and appends it to the specification. A
 * structurally identical property is not added twice.
 */
enum AsmpropStatus asmprop_spec_add_property(struct AsmpropSpec *spec,
                                             const char *formula,
                                             enum AsmpropLogic logic);

/**
 * Translates the specification to a NuSMV model.
 */
enum AsmpropStatus asmprop_spec_emit_smv(const struct AsmpropSpec *spec, char **out);

/**
 * Runs an Avalla scenario. `passed` receives 1 when every check holds.
 */
enum AsmpropStatus asmprop_spec_run_scenario(const struct AsmpropSpec *spec,
                                             const char *scenario,
                                             int32_t *passed);

/**
 * Model-checks every embedded property. `limits` may be null.
 */
enum AsmpropStatus asmprop_spec_check(const struct AsmpropSpec *spec,
                                      const struct AsmpropLimits *limits,
                                      struct AsmpropReport **out);

void asmprop_report_free(struct AsmpropReport *report);

enum AsmpropStatus asmprop_report_count(const struct AsmpropReport *report, size_t *out);

/**
 * Verdict of the property at a 0-based index. When the check itself
 * failed the verdict is `Error`, the status is still `Ok`, and the reason
 * is available from [`asmprop_report_error`].
 */
enum AsmpropStatus asmprop_report_verdict(const struct AsmpropReport *report,
                                          size_t index,
                                          enum AsmpropVerdict *out);

/**
 * Reason a property could not be checked. Fails with `InvalidArgument`
 * when the property was checked.
 */
enum AsmpropStatus asmprop_report_error(const struct AsmpropReport *report,
                                        size_t index,
                                        char **out);

/**
 * Exports the counterexample (or, with `witness` nonzero, the witness)
 * of a property as Avalla text.
 */
enum AsmpropStatus asmprop_report_export(const struct AsmpropReport *report,
                                         size_t index,
                                         int32_t witness,
                                         char **out);

/**
 * Formalizes a requirement with the agent and adds the resulting property
 * to the specification. With `fixtures` non-null responses are replayed
 * from that directory; otherwise the live endpoint configured through the
 * environment is used. The formula text is written to `formula` when it
 * is non-null.
 */
enum AsmpropStatus asmprop_spec_formalize(struct AsmpropSpec *spec,
                                          const char *requirement,
                                          enum AsmpropLogic logic,
                                          const char *fixtures,
                                          char **formula);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ASMPROP_H */
