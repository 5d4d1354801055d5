#ifndef ROA_FFI_H
#define ROA_FFI_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum RoaStatus {
  ROA_STATUS_OK = 0,
  ROA_STATUS_NULL_POINTER = 1,
  ROA_STATUS_INVALID_ARGUMENT = 2,
  ROA_STATUS_NUMERICAL = 3,
  ROA_STATUS_BUFFER_TOO_SMALL = 4,
  ROA_STATUS_PANIC = 5,
} RoaStatus;

typedef enum RoaEquilibriumKind {
  ROA_EQUILIBRIUM_KIND_STABLE_NODE = 0,
  ROA_EQUILIBRIUM_KIND_UNSTABLE_NODE = 1,
  ROA_EQUILIBRIUM_KIND_SADDLE = 2,
  ROA_EQUILIBRIUM_KIND_NON_HYPERBOLIC = 3,
} RoaEquilibriumKind;

typedef enum RoaConvergence {
  ROA_CONVERGENCE_REACHED = 0,
  ROA_CONVERGENCE_TIMEOUT = 1,
  ROA_CONVERGENCE_DIVERGED = 2,
} RoaConvergence;

/*
 Opaque set of level-set snapshots.
 */
typedef struct RoaSolution RoaSolution;

/*
 Opaque reduced system.
 */
typedef struct RoaSystem RoaSystem;

typedef struct RoaEquilibrium {
  double li;
  double lbar;
  enum RoaEquilibriumKind kind;
} RoaEquilibrium;

typedef struct RoaGridSpec {
  double xmin;
  double xmax;
  double ymin;
  double ymax;
  size_t nx;
  size_t ny;
} RoaGridSpec;

/*
 Message of the last failed call on this thread, or null. The pointer
 stays valid until the next failing call on the same thread.
 */
const char *roa_last_error_message(void);

/*
 Linear preset `f = beta (1 - l)`, `g = gamma x`.

 # Safety
 `out` must be a valid pointer to writable storage for one handle.
 */
enum RoaStatus roa_system_new_linear(double w, double beta, double gamma, struct RoaSystem **out);

/*
 Nonlinear preset `f = l (1 - l)`, `g = x^2 - 0.1 x`.

 # Safety
 `out` must be a valid pointer to writable storage for one handle.
 */
enum RoaStatus roa_system_new_nonlinear(double w, struct RoaSystem **out);

/*
 Polynomial dynamics with ascending coefficients.

 # Safety
 `f` and `g` must point to `nf` and `ng` readable doubles; `out` must be
 writable.
 */
enum RoaStatus roa_system_new_poly(double w,
                                   const double *f,
                                   size_t nf,
                                   const double *g,
                                   size_t ng,
                                   struct RoaSystem **out);

/*
 # Safety
 `sys` must be null or a handle from `roa_system_new_*` not yet freed.
 */
void roa_system_free(struct RoaSystem *sys);

/*
 # Safety
 `sys` must be a live handle; `dli` and `dlbar` must be writable.
 */
enum RoaStatus roa_reduced_rhs(const struct RoaSystem *sys,
                               double li,
                               double lbar,
                               double *dli,
                               double *dlbar);

/*
 Equilibria with both coordinates in `[lo, hi]`. `count` receives the
 number found; `BufferTooSmall` is returned when it exceeds `cap`.

 # Safety
 `sys` must be a live handle, `buf` must hold `cap` entries (or be null
 with `cap == 0`) and `count` must be writable.
 */
enum RoaStatus roa_equilibria(const struct RoaSystem *sys,
                              double lo,
                              double hi,
                              struct RoaEquilibrium *buf,
                              size_t cap,
                              size_t *count);

/*
 Level-set solve from a circle of `radius` around `(cx, cy)`, keeping one
 snapshot per entry of `snapshots` (ascending, last equal to `t_final`).

 # Safety
 `sys` and `grid` must be valid, `snapshots` must hold `n_snapshots`
 doubles and `out` must be writable.
 */
enum RoaStatus roa_solve(const struct RoaSystem *sys,
                         const struct RoaGridSpec *grid,
                         double cx,
                         double cy,
                         double radius,
                         double t_final,
                         double cfl,
                         const double *snapshots,
                         size_t n_snapshots,
                         struct RoaSolution **out);

/*
 # Safety
 `sol` must be null or a handle from `roa_solve` not yet freed.
 */
void roa_solution_free(struct RoaSolution *sol);

/*
 Number of snapshots, or 0 for a null handle.

 # Safety
 `sol` must be null or a live handle.
 */
size_t roa_solution_snapshot_count(const struct RoaSolution *sol);

/*
 Area of the zero-sublevel set of snapshot `k`.

 # Safety
 `sol` must be a live handle and `area` writable.
 */
enum RoaStatus roa_solution_area(const struct RoaSolution *sol, size_t k, double *area);

/*
 Interior values of snapshot `k`, row-major with `y` outer (`nx * ny`).

 # Safety
 `sol` must be a live handle and `buf` must hold `cap` doubles.
 */
enum RoaStatus roa_solution_values(const struct RoaSolution *sol,
                                   size_t k,
                                   double *buf,
                                   size_t cap);

/*
 Zero-sublevel mask of snapshot `k` as 0/1 bytes, same layout as values.

 # Safety
 `sol` must be a live handle and `buf` must hold `cap` bytes.
 */
enum RoaStatus roa_solution_mask(const struct RoaSolution *sol, size_t k, uint8_t *buf, size_t cap);

/*
 Oracle basin of the nearest stable consensus state, with default
 integration parameters, as 0/1 bytes row-major with `y` outer.

 # Safety
 `sys` and `grid` must be valid and `buf` must hold `cap` bytes.
 */
enum RoaStatus roa_classify_basin(const struct RoaSystem *sys,
                                  const struct RoaGridSpec *grid,
                                  uint8_t *buf,
                                  size_t cap);

/*
 Time for the tracked node to settle within `eps`. `time` is written
 only when `kind` is `Reached`.

 # Safety
 `sys` must be a live handle; `time` and `kind` must be writable.
 */
enum RoaStatus roa_convergence_time(const struct RoaSystem *sys,
                                    double li,
                                    double lbar,
                                    double eps,
                                    double *time,
                                    enum RoaConvergence *kind);

/*
 Gershgorin certificate for the linear network Jacobian.
 `weights[j * n + i]` is the weight of edge `j -> i`.

 # Safety
 `weights` must hold `n * n` doubles; `certified` and `margin` must be
 writable.
 */
enum RoaStatus roa_certify_linear(size_t n,
                                  const double *weights,
                                  double beta,
                                  double gamma,
                                  bool *certified,
                                  double *margin);

#endif  /* ROA_FFI_H */
