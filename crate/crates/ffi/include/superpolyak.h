/* C interface to the superpolyak nonsmooth optimization library. */

#ifndef SUPERPOLYAK_H
#define SUPERPOLYAK_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Measurement ensemble for matrix sensing.
 */
typedef enum SpEnsemble {
  SP_ENSEMBLE_GAUSSIAN = 0,
  SP_ENSEMBLE_HADAMARD = 1,
} SpEnsemble;

/**
 * Problem family selector.
 */
typedef enum SpProblemKind {
  SP_PROBLEM_KIND_MATRIX_SENSING = 0,
  SP_PROBLEM_KIND_MAX_LINEAR = 1,
  SP_PROBLEM_KIND_PHASE_RETRIEVAL = 2,
  SP_PROBLEM_KIND_COMPRESSED_SENSING = 3,
} SpProblemKind;

/**
 * Terminal state of a run.
 */
typedef enum SpRunStatus {
  SP_RUN_STATUS_CONVERGED = 0,
  SP_RUN_STATUS_BUDGET_EXHAUSTED = 1,
  SP_RUN_STATUS_STALLED = 2,
} SpRunStatus;

/**
 * Status code returned by every fallible C-ABI call.
 */
typedef enum SpStatus {
  SP_STATUS_OK = 0,
  SP_STATUS_NULL_POINTER = 1,
  SP_STATUS_INVALID_ARGUMENT = 2,
  SP_STATUS_ZERO_GRADIENT = 3,
  SP_STATUS_BUFFER_TOO_SMALL = 4,
  SP_STATUS_INTERNAL_PANIC = 5,
} SpStatus;

/**
 * Step kind tags used in history rows.
 */
typedef enum SpStepKind {
  SP_STEP_KIND_INIT = 0,
  SP_STEP_KIND_FALLBACK = 1,
  SP_STEP_KIND_BUNDLE_ACCEPTED = 2,
  SP_STEP_KIND_BUNDLE_REJECTED = 3,
} SpStepKind;

/**
 * Opaque problem handle.
 */
typedef struct SpProblem SpProblem;

/**
 * Opaque run-report handle.
 */
typedef struct SpReport SpReport;

/**
 * Solver options; obtain defaults from `sp_solve_options_default`.
 */
typedef struct SpSolveOptions {
  double eps;
  double omega;
  double gamma;
  double eta_est0;
  double eta_lb;
  double q;
  double tau_max;
  uint64_t max_outer;
  uint64_t fallback_budget;
  /**
   * 0 means unlimited.
   */
  uint64_t max_oracle;
} SpSolveOptions;

/**
 * One convergence-trace record.
 */
typedef struct SpHistoryRow {
  uint64_t oracle_calls;
  double f_gap;
  double elapsed_sec;
  enum SpStepKind step_kind;
} SpHistoryRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Fills `out` with the default solver options.
 *
 * # Safety
 * `out` must point to writable memory for one `SpSolveOptions`.
 */
enum SpStatus sp_solve_options_default(struct SpSolveOptions *out);

/**
 * Creates a seeded problem instance.
 *
 * Unused parameters for a family are ignored; `lambda <= 0` selects the
 * library default penalty. On success `*out` owns the handle.
 *
 * # Safety
 * `out` must point to writable memory for one pointer.
 */
enum SpStatus sp_problem_create(enum SpProblemKind kind,
                                uintptr_t d,
                                uintptr_t r,
                                uintptr_t m,
                                uintptr_t s,
                                double kappa,
                                double lambda,
                                bool literal_prox,
                                enum SpEnsemble ensemble,
                                uint64_t seed,
                                struct SpProblem **out);

/**
 * Releases a problem handle. Null is a no-op.
 *
 * # Safety
 * `problem` must be null or a handle produced by `sp_problem_create` that
 * has not been freed.
 */
void sp_problem_free(struct SpProblem *problem);

/**
 * Ambient dimension of the problem's variable (0 on null).
 *
 * # Safety
 * `problem` must be null or a live problem handle.
 */
uintptr_t sp_problem_dim(const struct SpProblem *problem);

/**
 * Copies the seeded start point into `buf` (length must equal the problem
 * dimension).
 *
 * # Safety
 * `problem` must be a live handle; `buf` must point to `len` writable f64s.
 */
enum SpStatus sp_problem_initial_point(const struct SpProblem *problem, double *buf, uintptr_t len);

/**
 * Evaluates the objective gap `f(x) - f*` at `x`.
 *
 * # Safety
 * `problem` must be a live handle; `x` must point to `len` f64s; `out`
 * must be writable.
 */
enum SpStatus sp_problem_gap(const struct SpProblem *problem,
                             const double *x,
                             uintptr_t len,
                             double *out);

/**
 * Runs the coupled solver on the problem. `x0`/`x0_len` may be null/0 to
 * use the seeded start point; `opts` may be null for defaults. On success
 * `*out` owns the report.
 *
 * # Safety
 * Pointers must be null or valid as documented; `out` must be writable.
 */
enum SpStatus sp_solve(const struct SpProblem *problem,
                       const double *x0,
                       uintptr_t x0_len,
                       const struct SpSolveOptions *opts,
                       struct SpReport **out);

/**
 * Runs the problem's first-order baseline mapping alone until the gap
 * drops below `eps` or `budget` applications are spent.
 *
 * # Safety
 * `problem` must be a live handle; `out` must be writable.
 */
enum SpStatus sp_solve_baseline(const struct SpProblem *problem,
                                double eps,
                                uint64_t budget,
                                struct SpReport **out);

/**
 * Releases a report handle. Null is a no-op.
 *
 * # Safety
 * `report` must be null or an unfreed report handle.
 */
void sp_report_free(struct SpReport *report);

/**
 * Terminal status of the run.
 *
 * # Safety
 * `report` must be null or a live report handle.
 */
enum SpRunStatus sp_report_status(const struct SpReport *report);

/**
 * Final (best) function gap of the run.
 *
 * # Safety
 * `report` must be null or a live report handle.
 */
double sp_report_final_gap(const struct SpReport *report);

/**
 * Length of the returned solution vector (0 for baseline reports).
 *
 * # Safety
 * `report` must be null or a live report handle.
 */
uintptr_t sp_report_solution_len(const struct SpReport *report);

/**
 * Copies the solution vector into `buf`.
 *
 * # Safety
 * `report` must be a live handle; `buf` must point to `len` writable f64s.
 */
enum SpStatus sp_report_solution(const struct SpReport *report, double *buf, uintptr_t len);

/**
 * Number of history records in the report.
 *
 * # Safety
 * `report` must be null or a live report handle.
 */
uintptr_t sp_report_history_len(const struct SpReport *report);

/**
 * Copies history record `idx` into `row`.
 *
 * # Safety
 * `report` must be a live handle; `row` must be writable.
 */
enum SpStatus sp_report_history_row(const struct SpReport *report,
                                    uintptr_t idx,
                                    struct SpHistoryRow *row);

/**
 * Reads the run's cumulative oracle counts.
 *
 * # Safety
 * `report` must be a live handle; the three outputs must be writable.
 */
enum SpStatus sp_report_counts(const struct SpReport *report,
                               uint64_t *f_calls,
                               uint64_t *g_calls,
                               uint64_t *mapping_calls);

/**
 * Static description of a status code.
 */
const char *sp_strerror(enum SpStatus status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SUPERPOLYAK_H */
