#ifndef OFDI_H
#define OFDI_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible call.
 */
typedef enum OfdiStatus {
  OfdiStatus_Ok = 0,
  /**
   * A required pointer argument was NULL.
   */
  OfdiStatus_NullPointer = 1,
  /**
   * Arguments violate a documented precondition.
   */
  OfdiStatus_InvalidArgument = 2,
  /**
   * A solver or estimator failed on valid-looking input.
   */
  OfdiStatus_NumericalError = 3,
  /**
   * File input/output failed.
   */
  OfdiStatus_IoError = 4,
  /**
   * A JSON or CSV payload did not parse or validate.
   */
  OfdiStatus_ParseError = 5,
} OfdiStatus;

/**
 * Opaque firm-year panel handle.
 */
typedef struct OfdiPanel OfdiPanel;

/**
 * Flat model parameterization for the closed-form calls.
 */
typedef struct OfdiModelParams {
  /**
   * CES preference parameter, in (0, 1).
   */
  double rho;
  /**
   * Demand shifter, > 0.
   */
  double demand_shifter;
  /**
   * Pareto scale of the productivity distribution, > 0.
   */
  double pareto_scale;
  /**
   * Pareto shape; must exceed rho/(1-rho).
   */
  double pareto_shape;
  /**
   * Domestic unit input cost, >= 0.
   */
  double domestic_cost;
  /**
   * Foreign-subsidiary unit input cost, > 0.
   */
  double foreign_cost;
  /**
   * Intermediate-input intensity, >= 0.
   */
  double input_intensity;
  /**
   * Fixed production cost, > 0.
   */
  double fixed_cost;
  /**
   * Fixed investment cost of going abroad, > 0.
   */
  double ofdi_fixed_cost;
} OfdiModelParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *ofdi_version(void);

/**
 * Message for the most recent failure on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *ofdi_last_error_message(void);

/**
 * Release a string returned by one of the `*_json` functions.
 */
void ofdi_string_free(char *text);

/**
 * Probability that an entrant invests abroad under `params`.
 */
enum OfdiStatus ofdi_investment_probability(const struct OfdiModelParams *params, double *out);

/**
 * Entry and investment cutoffs. `out_has_investment_cutoff` is false when
 * the domestic input is weakly cheaper (the investment cutoff is absent) and
 * `out_investment` is then left untouched.
 */
enum OfdiStatus ofdi_cutoffs(const struct OfdiModelParams *params,
                             double *out_entry,
                             double *out_investment,
                             bool *out_has_investment_cutoff);

/**
 * Domestic cost level at which every entrant invests abroad.
 */
enum OfdiStatus ofdi_saturation_cost(const struct OfdiModelParams *params, double *out);

/**
 * Derivative of the investment probability in the domestic cost.
 */
enum OfdiStatus ofdi_marginal_effect(const struct OfdiModelParams *params, double *out);

/**
 * Run the import-ban experiment. `market_json` is a market configuration
 * (same schema as the CLI `market` block); the result is a policy-outcome
 * JSON document. Returns NULL on failure.
 */
char *ofdi_policy_experiment_json(const char *market_json);

/**
 * Simulate a panel from a configuration JSON document (the CLI `panel`
 * block schema). Returns NULL on failure; free with [`ofdi_panel_free`].
 */
struct OfdiPanel *ofdi_panel_simulate(const char *config_json);

/**
 * Load and validate a panel CSV. Returns NULL on failure.
 */
struct OfdiPanel *ofdi_panel_from_csv(const char *path);

/**
 * Write a panel to a CSV file in the canonical schema.
 */
enum OfdiStatus ofdi_panel_to_csv(const struct OfdiPanel *panel, const char *path);

/**
 * Number of firm-year rows, or 0 for a NULL handle.
 */
uintptr_t ofdi_panel_row_count(const struct OfdiPanel *panel);

/**
 * Release a panel handle.
 */
void ofdi_panel_free(struct OfdiPanel *panel);

/**
 * Firm-level treatment-effect estimate; `spec_json` follows the CLI `did`
 * block schema. Returns a result JSON document or NULL on failure.
 */
char *ofdi_panel_estimate_json(const struct OfdiPanel *panel, const char *spec_json);

/**
 * Aggregate-level (group relative frequency) estimate.
 */
char *ofdi_panel_estimate_aggregate_json(const struct OfdiPanel *panel, const char *spec_json);

/**
 * Event-study coefficients and the joint pre-policy test. `base_year` below
 * the panel range (for example -1) selects the first sample year.
 */
char *ofdi_panel_event_study_json(const struct OfdiPanel *panel,
                                  const char *spec_json,
                                  int32_t base_year);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OFDI_H */
