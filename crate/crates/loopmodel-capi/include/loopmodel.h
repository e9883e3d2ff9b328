#ifndef LOOPMODEL_H
#define LOOPMODEL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Error codes returned by every API function.
 */
typedef enum LmStatus {
  LmOk = 0,
  LmNullPointer = 1,
  LmInvalidArgument = 2,
  LmIndexOutOfRange = 3,
  LmResourceLimit = 4,
  LmInternal = 5,
} LmStatus;

/**
 * Opaque graph handle.
 */
typedef struct LmGraph LmGraph;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Build a d-dimensional box graph with `side` vertices per axis.
 *
 * # Safety
 * `out` must be a valid pointer. On `LmOk` it receives a handle that must
 * be released with `lm_graph_free`.
 */
enum LmStatus lm_graph_box(uintptr_t dimension,
                           uintptr_t side,
                           bool periodic,
                           struct LmGraph **out);

/**
 * Build a graph from `edge_count` vertex pairs laid out as
 * `[a0, b0, a1, b1, ...]`.
 *
 * # Safety
 * `endpoints` must point to `2 * edge_count` readable elements and `out`
 * must be valid. On `LmOk` the handle must be released with
 * `lm_graph_free`.
 */
enum LmStatus lm_graph_from_edges(const uintptr_t *endpoints,
                                  uintptr_t edge_count,
                                  struct LmGraph **out);

/**
 * Release a graph handle. A null handle is a no-op.
 *
 * # Safety
 * `g` must be a handle from a constructor of this library, not yet freed.
 */
void lm_graph_free(struct LmGraph *g);

/**
 * # Safety
 * `g` must be a live handle and `out` a valid pointer.
 */
enum LmStatus lm_graph_vertex_count(const struct LmGraph *g, uintptr_t *out);

/**
 * # Safety
 * `g` must be a live handle and `out` a valid pointer.
 */
enum LmStatus lm_graph_edge_count(const struct LmGraph *g, uintptr_t *out);

/**
 * # Safety
 * `g` must be a live handle and `out` a valid pointer.
 */
enum LmStatus lm_graph_max_degree(const struct LmGraph *g, uintptr_t *out);

/**
 * Evaluate the domination bound. `variant` 0 selects the conservative
 * form, 1 the larger optimistic form.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum LmStatus lm_delta(double beta,
                       double u,
                       double theta,
                       uintptr_t max_degree,
                       uint32_t variant,
                       double *out);

/**
 * Check the subcritical-percolation condition at theta = 1 against the
 * threshold `p_c`. Writes 1 into `out` when the condition holds.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum LmStatus lm_subcritical_condition(double beta,
                                       double u,
                                       uintptr_t max_degree,
                                       double p_c,
                                       uint8_t *out);

/**
 * Draw one configuration at theta = 1 and write its per-edge
 * open/blocking/non-blocking indicators (0 or 1) into three caller
 * buffers of length `edge_count`. Any of the three may be null to skip.
 *
 * # Safety
 * `g` must be a live handle; non-null indicator buffers must hold
 * `lm_graph_edge_count` writable elements.
 */
enum LmStatus lm_sample_indicators(const struct LmGraph *g,
                                   double beta,
                                   double u,
                                   uint64_t seed,
                                   uint8_t *open,
                                   uint8_t *blocking,
                                   uint8_t *nb);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* LOOPMODEL_H */
