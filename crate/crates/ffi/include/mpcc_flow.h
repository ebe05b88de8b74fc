#ifndef MPCC_FLOW_H
#define MPCC_FLOW_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MpccStatus {
  MPCC_STATUS_OK = 0,
  MPCC_STATUS_NULL_POINTER = 1,
  MPCC_STATUS_INVALID_ARGUMENT = 2,
  MPCC_STATUS_DIMENSION_MISMATCH = 3,
  MPCC_STATUS_UNKNOWN_PROBLEM = 4,
  MPCC_STATUS_INFEASIBLE = 5,
  MPCC_STATUS_OVERFLOW = 6,
  MPCC_STATUS_NON_FINITE = 7,
  MPCC_STATUS_INDEX_OUT_OF_RANGE = 8,
  MPCC_STATUS_PANIC = 9,
} MpccStatus;

typedef enum MpccStationarity {
  MPCC_STATIONARITY_S = 0,
  MPCC_STATIONARITY_M = 1,
  MPCC_STATIONARITY_C = 2,
  MPCC_STATIONARITY_W = 3,
  MPCC_STATIONARITY_NONE = 4,
} MpccStationarity;

/**
 * A problem definition.
 */
typedef struct MpccProblem MpccProblem;

/**
 * Collects callbacks until [`mpcc_builder_build`].
 */
typedef struct MpccProblemBuilder MpccProblemBuilder;

/**
 * The reports of one solve or multi-start batch.
 */
typedef struct MpccReport MpccReport;

/**
 * Returns `f(w)`; `w` has `n` entries.
 */
typedef double (*MpccValueFn)(const double *w, size_t n, void *user);

/**
 * Writes `∇f(w)` into `out`; both have `n` entries.
 */
typedef void (*MpccGradFn)(const double *w, size_t n, double *out, void *user);

/**
 * Integration and schedule settings. Non-positive numbers select the
 * library default.
 */
typedef struct MpccSolveOptions {
  double t_end;
  double rtol;
  double atol;
  double grad_tol;
  size_t max_steps;
  bool warm_start;
} MpccSolveOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty when none. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *mpcc_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *mpcc_version(void);

/**
 * The NCP function `φ(p, q)`.
 */
double mpcc_phi(double p, double q);

/**
 * Creates a built-in problem (`"mpcc1"`, `"mpcc3"`, ...).
 *
 * # Safety
 * `id` must be a NUL-terminated string and `out` a writable pointer.
 */
enum MpccStatus mpcc_problem_builtin(const char *id, struct MpccProblem **out);

/**
 * Number of variables, or 0 for a null handle.
 *
 * # Safety
 * `problem` must be null or a live handle.
 */
size_t mpcc_problem_dim(const struct MpccProblem *problem);

/**
 * # Safety
 * `problem` must be null or a handle not yet freed.
 */
void mpcc_problem_free(struct MpccProblem *problem);

/**
 * Starts a user problem with `dim` variables. Returns null on a null
 * `name`.
 *
 * # Safety
 * `name` must be a NUL-terminated string.
 */
struct MpccProblemBuilder *mpcc_builder_new(const char *name, size_t dim);

/**
 * Sets the objective. A null `grad` selects central differences.
 *
 * # Safety
 * `builder` must be a live handle; the callbacks must stay valid, and
 * `user` usable by them, for the life of the built problem.
 */
enum MpccStatus mpcc_builder_objective(struct MpccProblemBuilder *builder,
                                       MpccValueFn value,
                                       MpccGradFn grad,
                                       void *user);

/**
 * Adds `g(w) <= 0`.
 *
 * # Safety
 * As for [`mpcc_builder_objective`].
 */
enum MpccStatus mpcc_builder_ineq(struct MpccProblemBuilder *builder,
                                  MpccValueFn value,
                                  MpccGradFn grad,
                                  void *user);

/**
 * Adds `h(w) = 0`.
 *
 * # Safety
 * As for [`mpcc_builder_objective`].
 */
enum MpccStatus mpcc_builder_eq(struct MpccProblemBuilder *builder,
                                MpccValueFn value,
                                MpccGradFn grad,
                                void *user);

/**
 * Adds the pair `0 <= G(w) ⟂ H(w) >= 0`.
 *
 * # Safety
 * As for [`mpcc_builder_objective`], for both callback sets.
 */
enum MpccStatus mpcc_builder_pair(struct MpccProblemBuilder *builder,
                                  MpccValueFn g_value,
                                  MpccGradFn g_grad,
                                  void *g_user,
                                  MpccValueFn h_value,
                                  MpccGradFn h_grad,
                                  void *h_user);

/**
 * Validates and builds the problem. The builder is consumed and freed
 * whatever the outcome.
 *
 * # Safety
 * `builder` must be a live handle and `out` writable.
 */
enum MpccStatus mpcc_builder_build(struct MpccProblemBuilder *builder, struct MpccProblem **out);

/**
 * Releases a builder that was never built.
 *
 * # Safety
 * `builder` must be null or a live handle.
 */
void mpcc_builder_free(struct MpccProblemBuilder *builder);

/**
 * Evaluates `E(w, β)` into `value` and, when `grad` is non-null, `∇E` into
 * `grad` (`n` entries).
 *
 * # Safety
 * `problem` must be live, `w` readable and `grad` (if non-null) writable
 * for `n` doubles, `value` writable.
 */
enum MpccStatus mpcc_energy(const struct MpccProblem *problem,
                            double beta,
                            double lambda,
                            const double *w,
                            size_t n,
                            double *value,
                            double *grad);

/**
 * Fills `opts` with the library defaults.
 *
 * # Safety
 * `opts` must be writable.
 */
enum MpccStatus mpcc_solve_options_default(struct MpccSolveOptions *opts);

/**
 * Solves from `w0` over the `(β, λ)` schedule. `opts` may be null.
 *
 * # Safety
 * `problem` live; `betas`, `lambdas`, `w0` readable for their counts;
 * `opts` null or readable; `out` writable.
 */
enum MpccStatus mpcc_solve(const struct MpccProblem *problem,
                           const double *betas,
                           size_t n_betas,
                           const double *lambdas,
                           size_t n_lambdas,
                           const double *w0,
                           size_t n,
                           const struct MpccSolveOptions *opts,
                           struct MpccReport **out);

/**
 * Solves from `n_starts` points sampled from the problem's box with
 * `seed`. `opts` may be null.
 *
 * # Safety
 * As for [`mpcc_solve`].
 */
enum MpccStatus mpcc_multi_start(const struct MpccProblem *problem,
                                 const double *betas,
                                 size_t n_betas,
                                 const double *lambdas,
                                 size_t n_lambdas,
                                 size_t n_starts,
                                 uint64_t seed,
                                 const struct MpccSolveOptions *opts,
                                 struct MpccReport **out);

/**
 * Number of solves in the report, 0 for null.
 *
 * # Safety
 * `report` must be null or live.
 */
size_t mpcc_report_count(const struct MpccReport *report);

/**
 * Index of the best solve, or -1 when none qualifies.
 *
 * # Safety
 * `report` must be null or live.
 */
int64_t mpcc_report_best(const struct MpccReport *report);

/**
 * Copies the final point of solve `index` into `out` (`n` entries, which
 * must equal the problem dimension).
 *
 * # Safety
 * `report` live; `out` writable for `n` doubles.
 */
enum MpccStatus mpcc_report_point(const struct MpccReport *report,
                                  size_t index,
                                  double *out,
                                  size_t n);

/**
 * Final objective value of solve `index`.
 *
 * # Safety
 * `report` live; `out` writable.
 */
enum MpccStatus mpcc_report_objective(const struct MpccReport *report, size_t index, double *out);

/**
 * Stationarity class of solve `index`.
 *
 * # Safety
 * `report` live; `out` writable.
 */
enum MpccStatus mpcc_report_stationarity(const struct MpccReport *report,
                                         size_t index,
                                         enum MpccStationarity *out);

/**
 * Whether solve `index` stopped at a rest point that is MPCC feasible.
 *
 * # Safety
 * `report` live; `out` writable.
 */
enum MpccStatus mpcc_report_converged(const struct MpccReport *report, size_t index, bool *out);

/**
 * The whole report as JSON. Free with [`mpcc_string_free`]; null on
 * failure.
 *
 * # Safety
 * `report` must be null or live.
 */
char *mpcc_report_json(const struct MpccReport *report);

/**
 * # Safety
 * `s` must be null or a string returned by this library and not yet freed.
 */
void mpcc_string_free(char *s);

/**
 * # Safety
 * `report` must be null or a handle not yet freed.
 */
void mpcc_report_free(struct MpccReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MPCC_FLOW_H */
