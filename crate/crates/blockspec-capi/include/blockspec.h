#ifndef BLOCKSPEC_H
#define BLOCKSPEC_H

/* Generated by cbindgen from blockspec-capi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code of every fallible call.
 */
typedef enum BsStatus {
  BS_STATUS_OK = 0,
  BS_STATUS_NULL_ARGUMENT = 1,
  BS_STATUS_INVALID_ARGUMENT = 2,
  BS_STATUS_IO_ERROR = 3,
  BS_STATUS_PARSE_ERROR = 4,
  BS_STATUS_NUMERIC_ERROR = 5,
  BS_STATUS_BUFFER_TOO_SMALL = 6,
  BS_STATUS_PANIC = 7,
} BsStatus;

/**
 * Opaque undirected graph.
 */
typedef struct BsGraph BsGraph;

/**
 * Opaque blockmodel parameter set.
 */
typedef struct BsParams BsParams;

/**
 * Closed-form distance predictions for class 1.
 */
typedef struct BsAnalyticDistances {
  double d11_sq_unnorm;
  double d12_sq_unnorm;
  double d11_sq_norm;
  double d12_sq_norm;
  double ratio_d11;
} BsAnalyticDistances;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message for this thread into `buf` (NUL
 * terminated, truncated to `cap`). Returns the full length in bytes,
 * excluding the terminator.
 */
size_t bs_last_error(char *buf, size_t cap);

/**
 * Creates a parameter set; fails on out-of-range values or degenerate
 * class sizes.
 */
enum BsStatus bs_params_new(uint64_t n,
                            double pi,
                            double alpha,
                            double beta,
                            double gamma,
                            struct BsParams **out);

/**
 * # Safety
 * `p` must come from `bs_params_new` and not have been freed.
 */
void bs_params_free(struct BsParams *p);

/**
 * Number of class-1 nodes; the sampler assigns nodes `0..n1` to class 1.
 */
uint64_t bs_params_class1_size(const struct BsParams *p);

/**
 * Samples a graph from the blockmodel; deterministic given the seed.
 */
enum BsStatus bs_sample(const struct BsParams *params, uint64_t seed, struct BsGraph **out);

/**
 * Loads a whitespace-separated edge list from a file path.
 */
enum BsStatus bs_graph_load_edge_list(const char *path, struct BsGraph **out);

/**
 * Writes the edge list with decimal node ids, one pair per line.
 */
enum BsStatus bs_graph_save_edge_list(const struct BsGraph *g, const char *path);

/**
 * # Safety
 * `g` must come from a constructor of this library and not be freed twice.
 */
void bs_graph_free(struct BsGraph *g);

uint64_t bs_graph_node_count(const struct BsGraph *g);

uint64_t bs_graph_edge_count(const struct BsGraph *g);

/**
 * Copies all node degrees into `out` (length `len >= node_count`).
 */
enum BsStatus bs_graph_degrees(const struct BsGraph *g, uint64_t *out, size_t len);

/**
 * Induced subgraph on the largest connected component.
 */
enum BsStatus bs_graph_largest_component(const struct BsGraph *g, struct BsGraph **out);

/**
 * Iterated removal of nodes below the degree threshold.
 */
enum BsStatus bs_graph_prune_min_degree(const struct BsGraph *g,
                                        uint32_t min_degree,
                                        struct BsGraph **out);

/**
 * Spectral clustering into k groups; writes one label per node into
 * `labels_out` (length `labels_len >= node_count`).
 */
enum BsStatus bs_spectral_cluster(const struct BsGraph *g,
                                  uint32_t k,
                                  bool normalized,
                                  uint64_t seed,
                                  uint32_t *labels_out,
                                  size_t labels_len);

/**
 * Fraction of disagreeing labels minimized over relabelings.
 */
enum BsStatus bs_misclassification_rate(const uint32_t *predicted,
                                        const uint32_t *truth,
                                        size_t len,
                                        double *out);

/**
 * Closed-form class-1 distance predictions for the parameter set.
 */
enum BsStatus bs_analytic_distances(const struct BsParams *params, struct BsAnalyticDistances *out);

/**
 * The closed-form sparse-regime limit `1/4 + (3/2) x / (1 + x^2)`.
 */
double bs_sparse_limit_ratio(double x);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BLOCKSPEC_H */
