#ifndef STRONGTIES_H
#define STRONGTIES_H

/* Generated with cbindgen:0.29.4 */

/* Generated by cbindgen from crates/ffi. Do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum StStatus {
  ST_STATUS_OK = 0,
  ST_STATUS_NULL_POINTER = 1,
  ST_STATUS_INVALID_DISTRIBUTION = 2,
  ST_STATUS_INVALID_ARGUMENT = 3,
  ST_STATUS_UNKNOWN_NAME = 4,
  ST_STATUS_POPULATION_DIED = 5,
  ST_STATUS_NO_CONVERGENCE = 6,
  ST_STATUS_INVALID_UTF8 = 7,
  ST_STATUS_BUFFER_TOO_SMALL = 8,
  ST_STATUS_PANIC = 99,
} StStatus;

typedef enum StCriticality {
  ST_CRITICALITY_SUBCRITICAL = 0,
  ST_CRITICALITY_CRITICAL = 1,
  ST_CRITICALITY_SUPERCRITICAL = 2,
} StCriticality;

typedef enum StFormat {
  ST_FORMAT_DOT = 0,
  ST_FORMAT_GRAPHML = 1,
  ST_FORMAT_EDGE_CSV = 2,
} StFormat;

/**
 * Opaque child-count distribution.
 */
typedef struct StDist StDist;

/**
 * Opaque strong-ties network of one generation.
 */
typedef struct StNetwork StNetwork;

/**
 * Analytic summary of a family-size distribution at a marriage ratio.
 */
typedef struct StAnalysis {
  double mu;
  double mu_closed_form;
  enum StCriticality criticality;
  bool degenerate;
  /**
   * Extinction probability of one subtree; negative if iteration failed.
   */
  double extinction_probability;
  double residual_folded;
  double mean_children;
  double expected_population_ratio;
} StAnalysis;

typedef struct StMetrics {
  size_t node_count;
  size_t sibling_edge_count;
  size_t marital_edge_count;
  size_t component_count;
  size_t largest_component_size;
  double largest_component_fraction;
  size_t singleton_count;
} StMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static nul-terminated string.
 */
const char *st_version(void);

/**
 * Message of the last failure on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *st_last_error_message(void);

/**
 * Validate `len` weights into a new distribution handle.
 */
enum StStatus st_dist_new(const double *weights, size_t len, struct StDist **out_dist);

/**
 * Built-in policy (`1C`, `0/2C`, `2C`, `0/3C`, `C++`) or national
 * distribution (`china`, `india`).
 */
enum StStatus st_dist_builtin(const char *name, struct StDist **out_dist);

void st_dist_free(struct StDist *dist);

/**
 * Copy the weights into `buf`; `len` receives the number of weights.
 */
enum StStatus st_dist_weights(const struct StDist *dist, double *buf, size_t cap, size_t *len);

enum StStatus st_dist_mean(const struct StDist *dist, double *out_mean);

/**
 * Whether `actual` prefix-dominates `policy`.
 */
enum StStatus st_check_compliance(const struct StDist *actual,
                                  const struct StDist *policy,
                                  bool *out_compliant);

/**
 * Draw `count` quotas from `policy` into `buf`, seeded by `seed`.
 */
enum StStatus st_sample_quotas(const struct StDist *policy,
                               uint64_t seed,
                               size_t count,
                               size_t *buf);

enum StStatus st_expected_population_ratio(const struct StDist *policy,
                                           double alpha,
                                           double *out_ratio);

/**
 * Derived offspring law, its mean, regime and extinction probability.
 */
enum StStatus st_analyze(const struct StDist *f, double alpha, struct StAnalysis *out_analysis);

/**
 * Copy the derived offspring law into `buf`.
 */
enum StStatus st_derived_dist(const struct StDist *f,
                              double alpha,
                              double *buf,
                              size_t cap,
                              size_t *len);

/**
 * Extinction probability of a plain Galton-Watson process with offspring
 * law `a[0..len]`.
 */
enum StStatus st_extinction_probability(const double *a, size_t len, double *out_q);

/**
 * Fraction of `runs` strong-ties trees that reach a cap without dying out.
 */
enum StStatus st_survival_frequency(const struct StDist *f,
                                    double alpha,
                                    uint64_t runs,
                                    size_t max_levels,
                                    uint64_t max_nodes,
                                    uint64_t seed,
                                    double *out_frequency);

/**
 * Sample one generation of at least `target_n` persons and build its
 * network.
 */
enum StStatus st_sample_population(const struct StDist *f,
                                   double alpha,
                                   size_t target_n,
                                   uint64_t seed,
                                   struct StNetwork **out_network);

/**
 * Evolve `generations` generations from `initial_n` founders and return
 * the network of the last one. If the population dies out the status is
 * `POPULATION_DIED` and `out_network` holds the last non-empty generation,
 * or null when none was produced.
 */
enum StStatus st_run_policy_experiment(const struct StDist *policy,
                                       double alpha,
                                       size_t initial_n,
                                       uint32_t generations,
                                       double utilization,
                                       uint64_t seed,
                                       struct StNetwork **out_network);

void st_network_free(struct StNetwork *network);

enum StStatus st_network_metrics(const struct StNetwork *network, struct StMetrics *out_metrics);

/**
 * Component label of every node (the smallest node index in its
 * component).
 */
enum StStatus st_network_component_labels(const struct StNetwork *network,
                                          size_t *buf,
                                          size_t cap,
                                          size_t *len);

/**
 * Serialize the network; release the string with [`st_string_free`].
 */
enum StStatus st_network_export(const struct StNetwork *network,
                                enum StFormat format,
                                char **out_text);

void st_string_free(char *text);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STRONGTIES_H */
