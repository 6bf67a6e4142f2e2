#ifndef FRACSTAB_H
#define FRACSTAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FracstabStatus {
  FRACSTAB_STATUS_OK = 0,
  FRACSTAB_STATUS_NULL_POINTER = 1,
  FRACSTAB_STATUS_INVALID_ARGUMENT = 2,
  FRACSTAB_STATUS_PARSE_ERROR = 3,
  FRACSTAB_STATUS_SINGULAR_MATRIX = 4,
  FRACSTAB_STATUS_HYPOTHESIS_FAILED = 5,
  FRACSTAB_STATUS_LIMIT_EXCEEDED = 6,
  FRACSTAB_STATUS_NUMERIC_FAILURE = 7,
  FRACSTAB_STATUS_BUFFER_TOO_SMALL = 8,
  FRACSTAB_STATUS_PANIC = 99,
} FracstabStatus;

typedef enum FracstabVerdict {
  FRACSTAB_VERDICT_STABLE = 0,
  FRACSTAB_VERDICT_UNSTABLE = 1,
  FRACSTAB_VERDICT_MARGINAL = 2,
  FRACSTAB_VERDICT_INAPPLICABLE = 3,
} FracstabVerdict;

typedef struct FracstabApprox FracstabApprox;

// Result of [`fracstab_analyze`].
typedef struct FracstabReport FracstabReport;

// A matrix with its order vector, optionally with forcing and a
// simulation block from a problem file.
typedef struct FracstabSystem FracstabSystem;

typedef struct FracstabTrajectory FracstabTrajectory;

// Constants of the rational approximation. `delta1` is infinite when `R = 1`.
typedef struct FracstabConstants {
  double a;
  double b;
  double c;
  double r;
  double ln_rho;
  double delta1;
  double delta2;
  double delta3;
  double delta;
  double eps;
} FracstabConstants;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null. Valid until
// the next failing call on the same thread.
const char *fracstab_last_error(void);

// Library version as a static NUL-terminated string.
const char *fracstab_version(void);

// Build a system from a row-major `n x n` matrix and exact orders
// `num[i] / den[i]`. Matrix entries are read as the shortest decimals
// that round to them.
enum FracstabStatus fracstab_system_new(size_t n,
                                        const double *matrix,
                                        const int64_t *order_num,
                                        const int64_t *order_den,
                                        struct FracstabSystem **out);

// Build a system with real (floating-point) orders.
enum FracstabStatus fracstab_system_new_real(size_t n,
                                             const double *matrix,
                                             const double *orders,
                                             struct FracstabSystem **out);

// Build a system from the text of a JSON problem file.
enum FracstabStatus fracstab_system_from_json(const char *json, struct FracstabSystem **out);

void fracstab_system_free(struct FracstabSystem *system);

size_t fracstab_system_dim(const struct FracstabSystem *system);

// Decide stability. Exact orders use the companion test; real orders use
// the rational approximation with accuracy `eps` (`eps <= 0` or NaN picks
// the default). `tol` is the relative tolerance of the sector test.
enum FracstabStatus fracstab_analyze(const struct FracstabSystem *system,
                                     double tol,
                                     double eps,
                                     struct FracstabReport **out);

void fracstab_report_free(struct FracstabReport *report);

enum FracstabVerdict fracstab_report_verdict(const struct FracstabReport *report);

// `lambda_min(-(A + A^T))` for real-order analyses, NaN otherwise.
double fracstab_report_lambda_min(const struct FracstabReport *report);

// Smallest `|arg|` over the companion roots; NaN when no companion test ran.
double fracstab_report_min_abs_arg(const struct FracstabReport *report);

double fracstab_report_margin(const struct FracstabReport *report);

// Companion degree, 0 when no companion test ran.
size_t fracstab_report_degree(const struct FracstabReport *report);

enum FracstabStatus fracstab_report_gamma(const struct FracstabReport *report,
                                          int64_t *num,
                                          int64_t *den);

// Copy the companion roots into `re` and `im` (each of length `capacity`).
// `count` receives the number of roots; with too small a buffer nothing is
// copied and `BufferTooSmall` is returned.
enum FracstabStatus fracstab_report_roots(const struct FracstabReport *report,
                                          double *re,
                                          double *im,
                                          size_t capacity,
                                          size_t *count);

// Report as a JSON string; release with [`fracstab_string_free`].
enum FracstabStatus fracstab_report_to_json(const struct FracstabReport *report, char **out);

void fracstab_string_free(char *s);

// Rational approximation of the system's orders with accuracy `eps`.
enum FracstabStatus fracstab_approx_new(const struct FracstabSystem *system,
                                        double eps,
                                        struct FracstabApprox **out);

void fracstab_approx_free(struct FracstabApprox *approx);

enum FracstabStatus fracstab_approx_constants(const struct FracstabApprox *approx,
                                              struct FracstabConstants *out);

// Approximating order `index` as `num / den`.
enum FracstabStatus fracstab_approx_beta(const struct FracstabApprox *approx,
                                         size_t index,
                                         int64_t *num,
                                         int64_t *den);

// `sigma_min(diag(z^alpha) - A)` at `z = re + i im`.
enum FracstabStatus fracstab_sigma_min(const struct FracstabSystem *system,
                                       double re,
                                       double im,
                                       double *out);

// Sets `stable` to 1 when every row is strictly diagonally dominant with a
// negative diagonal (which implies stability for all orders), else 0.
enum FracstabStatus fracstab_prescreen(const struct FracstabSystem *system, int32_t *stable);

// Simulate `D^alpha x = A x (+ forcing from the problem file)` from `x0`.
// `per_decade = 0` keeps every step, otherwise that many log-spaced
// samples per decade.
enum FracstabStatus fracstab_simulate(const struct FracstabSystem *system,
                                      const double *x0,
                                      double t_final,
                                      double h,
                                      size_t per_decade,
                                      struct FracstabTrajectory **out);

// Simulate with the `simulation` block of the problem file the system was
// built from.
enum FracstabStatus fracstab_simulate_file(const struct FracstabSystem *system,
                                           size_t per_decade,
                                           struct FracstabTrajectory **out);

void fracstab_trajectory_free(struct FracstabTrajectory *traj);

// Number of stored samples.
size_t fracstab_trajectory_len(const struct FracstabTrajectory *traj);

// Steps at which Newton did not reach its tolerance.
size_t fracstab_trajectory_newton_failures(const struct FracstabTrajectory *traj);

// Time and state of sample `index`; `state` must hold `dim` values.
enum FracstabStatus fracstab_trajectory_sample(const struct FracstabTrajectory *traj,
                                               size_t index,
                                               double *t,
                                               double *state);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FRACSTAB_H */
