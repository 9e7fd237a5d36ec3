#ifndef ICECAV_H
#define ICECAV_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every call.
 */
typedef enum IcecavStatus {
  ICECAV_STATUS_OK = 0,
  /**
   * A required pointer was null.
   */
  ICECAV_STATUS_NULL_POINTER = 1,
  /**
   * An argument was malformed (bad UTF-8, JSON or buffer size).
   */
  ICECAV_STATUS_INVALID_ARGUMENT = 2,
  /**
   * A query lay outside the grid or the navigable water.
   */
  ICECAV_STATUS_DOMAIN = 3,
  /**
   * Inconsistent configuration.
   */
  ICECAV_STATUS_CONFIG = 4,
  ICECAV_STATUS_IO = 5,
  /**
   * Non-finite values or non-convergence.
   */
  ICECAV_STATUS_NUMERICAL = 6,
  /**
   * An internal panic was caught.
   */
  ICECAV_STATUS_PANIC = 7,
} IcecavStatus;

/**
 * Flow grid, plus the cavity parameters when synthesised.
 */
typedef struct IcecavGrid IcecavGrid;

/**
 * Planning problem built on a grid.
 */
typedef struct IcecavMdp IcecavMdp;

/**
 * Solved lattice bound to the problem it was solved for.
 */
typedef struct IcecavSolution IcecavSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *icecav_version(void);

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next call on this thread.
 */
const char *icecav_last_error(void);

/**
 * Reads a grid archive directory.
 *
 * # Safety
 * `path` must be NUL-terminated; `out_grid` must be valid.
 */
enum IcecavStatus icecav_grid_read(const char *path,
                                   struct IcecavGrid **out_grid);

/**
 * Synthesises a cavity grid from JSON parameters, or the defaults when
 * `params_json` is null.
 *
 * # Safety
 * `params_json` must be null or NUL-terminated; `out_grid` must be valid.
 */
enum IcecavStatus icecav_grid_synthesize(const char *params_json,
                                         uint64_t seed,
                                         struct IcecavGrid **out_grid);

/**
 * Writes a grid archive directory.
 *
 * # Safety
 * `grid` must come from this library; `path` must be NUL-terminated.
 */
enum IcecavStatus icecav_grid_write(const struct IcecavGrid *grid,
                                    const char *path);

/**
 * Grid dimensions `nx, ny, nz, nt`.
 *
 * # Safety
 * `grid` must come from this library; `out_dims` must hold 4 values.
 */
enum IcecavStatus icecav_grid_dims(const struct IcecavGrid *grid,
                                   size_t *out_dims);

/**
 * Velocity `(u, v, w)` at `(x, y, z, t)`.
 *
 * # Safety
 * `grid` must come from this library; `out_uvw` must hold 3 values.
 */
enum IcecavStatus icecav_grid_interpolate(const struct IcecavGrid *grid,
                                          double x,
                                          double y,
                                          double z,
                                          double t,
                                          double *out_uvw);

/**
 * # Safety
 * `grid` must be null or come from this library and not be used again.
 */
void icecav_grid_free(struct IcecavGrid *grid);

/**
 * Builds the planning problem on `grid` from a scenario JSON document. A
 * null scenario selects the default scenario of a synthesised grid.
 *
 * # Safety
 * `grid` must come from this library; `scenario_json` must be null or
 * NUL-terminated; `out_mdp` must be valid.
 */
enum IcecavStatus icecav_mdp_new(const struct IcecavGrid *grid,
                                 const char *scenario_json,
                                 double subsample,
                                 struct IcecavMdp **out_mdp);

/**
 * Whether `(x, y, z)` is in navigable water above the depth rating.
 *
 * # Safety
 * `mdp` must come from this library; `out_valid` must be valid.
 */
enum IcecavStatus icecav_mdp_is_valid_state(const struct IcecavMdp *mdp,
                                            double x,
                                            double y,
                                            double z,
                                            bool *out_valid);

/**
 * Bounds of the depth action set at a valid state. The lower bound is
 * closed, the upper bound open when set by the ascent rate.
 *
 * # Safety
 * `mdp` must come from this library; output pointers must be valid.
 */
enum IcecavStatus icecav_mdp_action_bounds(const struct IcecavMdp *mdp,
                                           double x,
                                           double y,
                                           double z,
                                           double *out_lo,
                                           double *out_hi);

/**
 * # Safety
 * `mdp` must be null or come from this library and not be used again.
 */
void icecav_mdp_free(struct IcecavMdp *mdp);

/**
 * Solves `mdp` by value iteration on a lattice with the given strides. A
 * non-positive `tolerance` selects the default. A solution that did not
 * converge is still returned, with status `NUMERICAL`, and must be freed.
 *
 * # Safety
 * `mdp` must come from this library; `stride` must hold 3 values;
 * `out_solution` must be valid.
 */
enum IcecavStatus icecav_solve(const struct IcecavMdp *mdp,
                               const double *stride,
                               double subsample,
                               double tolerance,
                               size_t max_iters,
                               struct IcecavSolution **out_solution);

/**
 * Reads a solution archive solved for `mdp`.
 *
 * # Safety
 * `mdp` must come from this library; `path` must be NUL-terminated;
 * `out_solution` must be valid.
 */
enum IcecavStatus icecav_solution_read(const struct IcecavMdp *mdp,
                                       const char *path,
                                       struct IcecavSolution **out_solution);

/**
 * Writes a solution archive directory.
 *
 * # Safety
 * `solution` must come from this library; `path` must be NUL-terminated.
 */
enum IcecavStatus icecav_solution_write(const struct IcecavSolution *solution,
                                        const char *path);

/**
 * Number of lattice nodes, sweeps performed and convergence flag.
 *
 * # Safety
 * `solution` must come from this library; output pointers must be valid.
 */
enum IcecavStatus icecav_solution_info(const struct IcecavSolution *solution,
                                       size_t *out_nodes,
                                       size_t *out_iterations,
                                       bool *out_converged);

/**
 * Copies the node values into `buf`, which must hold exactly as many
 * values as the lattice has nodes.
 *
 * # Safety
 * `solution` must come from this library; `buf` must hold `len` values.
 */
enum IcecavStatus icecav_solution_values(const struct IcecavSolution *solution,
                                         double *buf,
                                         size_t len);

/**
 * MDP policy depth at `(x, y, z)`.
 *
 * # Safety
 * `solution` must come from this library; `out_depth` must be valid.
 */
enum IcecavStatus icecav_mdp_action(const struct IcecavSolution *solution,
                                    double x,
                                    double y,
                                    double z,
                                    double *out_depth);

/**
 * QMDP depth for a Gaussian belief with mean `(x, y, z)`, standard
 * deviations `sigma` and `samples` draws from a generator seeded by `seed`.
 * The Q table is built on first use.
 *
 * # Safety
 * `solution` must come from this library; `sigma` must hold 3 values;
 * `out_depth` must be valid.
 */
enum IcecavStatus icecav_qmdp_action(const struct IcecavSolution *solution,
                                     double x,
                                     double y,
                                     double z,
                                     const double *sigma,
                                     size_t samples,
                                     uint64_t seed,
                                     double *out_depth);

/**
 * # Safety
 * `solution` must be null or come from this library and not be used again.
 */
void icecav_solution_free(struct IcecavSolution *solution);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ICECAV_H */
