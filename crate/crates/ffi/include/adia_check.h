/* C interface to adia-check: two-level propagation and adiabatic-frame diagnostics. */

#ifndef ADIA_CHECK_H
#define ADIA_CHECK_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible entry point.
typedef enum AdiaStatus {
  ADIA_OK = 0,
  ADIA_ERR_INVALID_ARGUMENT = 1,
  ADIA_ERR_DEGENERATE_SPECTRUM = 2,
  ADIA_ERR_INTEGRATION_DIVERGED = 3,
  ADIA_ERR_UNSUPPORTED_MODEL = 4,
  ADIA_ERR_CONFIG = 5,
  ADIA_ERR_IO = 6,
  ADIA_ERR_NULL_POINTER = 7,
  ADIA_ERR_UTF8 = 8,
  ADIA_ERR_INDEX = 9,
  ADIA_ERR_PANIC = 10,
} AdiaStatus;

// Opaque model handle.
typedef struct AdiaModel AdiaModel;

// Opaque trajectory handle: propagator samples plus spectral frames.
typedef struct AdiaTrajectory AdiaTrajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the most recent failure on this thread. Never NULL;
// empty when nothing failed yet. Valid until the next failing call on the
// same thread.
const char *adia_last_error_message(void);

// Resonantly modulated rotating-field model with the closed-form
// propagator (the one whose frame prediction fails at half period).
//
// # Safety
// `out` must be a valid pointer to an `AdiaModel*`.
enum AdiaStatus adia_model_counterexample(double omega0, double tau, struct AdiaModel **out);

// Plain rotating-field model `R(t) = ω₀ n(t)`.
//
// # Safety
// `out` must be a valid pointer to an `AdiaModel*`.
enum AdiaStatus adia_model_rotating_field(double omega0, double tau, struct AdiaModel **out);

// Landau–Zener sweep `R(t) = Ω e_x − (Δ̇₀ t / 2) e_z`.
//
// # Safety
// `out` must be a valid pointer to an `AdiaModel*`.
enum AdiaStatus adia_model_landau_zener(double rabi, double sweep_rate, struct AdiaModel **out);

// Constant-field model.
//
// # Safety
// `out` must be a valid pointer to an `AdiaModel*`.
enum AdiaStatus adia_model_constant(double rx, double ry, double rz, struct AdiaModel **out);

// Load a tabulated model (`# adia-model v1` format) from a file.
//
// # Safety
// `path` must be a NUL-terminated C string; `out` a valid pointer.
enum AdiaStatus adia_model_from_table_file(const char *path, struct AdiaModel **out);

// Release a model handle. NULL is a no-op.
//
// # Safety
// `model` must be NULL or a pointer from an `adia_model_*` constructor not
// yet freed.
void adia_model_free(struct AdiaModel *model);

// Field vector at time `t`: writes `a0` and `r_out[3]` with
// `H = a0·1 + r·σ`.
//
// # Safety
// `model` must be a live handle; `a0_out` and `r_out` valid for writes
// (`r_out` for 3 doubles).
enum AdiaStatus adia_model_field(const struct AdiaModel *model,
                                 double t,
                                 double *a0_out,
                                 double *r_out);

// Instantaneous eigenvalues `±|R| + a0` at time `t`.
//
// # Safety
// `model` must be a live handle; `e_plus_out`, `e_minus_out` valid for
// writes.
enum AdiaStatus adia_model_energies(const struct AdiaModel *model,
                                    double t,
                                    double *e_plus_out,
                                    double *e_minus_out);

// Slowness ratio `|⟨E₊|Ė₋⟩| / |E₊ − E₋|` at time `t`.
//
// # Safety
// `model` must be a live handle; `out` valid for writes.
enum AdiaStatus adia_model_adiabaticity_ratio(const struct AdiaModel *model, double t, double *out);

// Closed-form survival probability for models with an explicit propagator
// parametrization (counterexample, rotating field).
//
// # Safety
// `model` must be a live handle; `out` valid for writes.
enum AdiaStatus adia_q_analytic(const struct AdiaModel *model, double t, double *out);

// Propagate `i U̇ = H U` over `[t0, t1]` with `steps` output intervals and
// `substeps` internal RK4 sub-steps per interval (0 means 1).
//
// # Safety
// `model` must be a live handle; `out` a valid pointer to an
// `AdiaTrajectory*`.
enum AdiaStatus adia_propagate(const struct AdiaModel *model,
                               double t0,
                               double t1,
                               size_t steps,
                               size_t substeps,
                               struct AdiaTrajectory **out);

// Release a trajectory handle. NULL is a no-op.
//
// # Safety
// `traj` must be NULL or a pointer from [`adia_propagate`] not yet freed.
void adia_trajectory_free(struct AdiaTrajectory *traj);

// Number of samples (grid steps + 1); 0 for NULL.
//
// # Safety
// `traj` must be NULL or a live trajectory handle.
size_t adia_trajectory_samples(const struct AdiaTrajectory *traj);

// Time of sample `index`.
//
// # Safety
// `traj` must be a live handle; `out` valid for writes.
enum AdiaStatus adia_trajectory_time(const struct AdiaTrajectory *traj, size_t index, double *out);

// `‖U†U − 1‖_F` at sample `index`.
//
// # Safety
// `traj` must be a live handle; `out` valid for writes.
enum AdiaStatus adia_trajectory_unitarity_error(const struct AdiaTrajectory *traj,
                                                size_t index,
                                                double *out);

// Propagator sample as interleaved re/im, row-major: 8 doubles.
//
// # Safety
// `traj` must be a live handle; `out` valid for writes of 8 doubles.
enum AdiaStatus adia_trajectory_unitary(const struct AdiaTrajectory *traj,
                                        size_t index,
                                        double *out);

// Survival probability `Q` at sample `index`.
//
// # Safety
// `traj` must be a live handle; `out` valid for writes.
enum AdiaStatus adia_survival_q(const struct AdiaTrajectory *traj, size_t index, double *out);

// Eigenstate overlap `F₀` at sample `index`.
//
// # Safety
// `traj` must be a live handle; `out` valid for writes.
enum AdiaStatus adia_overlap_f0(const struct AdiaTrajectory *traj, size_t index, double *out);

// Projected-prediction residual `‖U P₊(0) U† − P₊(t)‖_F` at sample `index`.
//
// # Safety
// `traj` must be a live handle; `out` valid for writes.
enum AdiaStatus adia_prediction_residual(const struct AdiaTrajectory *traj,
                                         size_t index,
                                         double *out);

// Fidelity between exact evolution and evolution under the
// spectral-projection generator, evaluated at sample `index` of a fresh
// propagation of both over `[t0, t1]`.
//
// # Safety
// `model` must be a live handle; `out` valid for writes.
enum AdiaStatus adia_avron_fidelity(const struct AdiaModel *model,
                                    double t0,
                                    double t1,
                                    size_t steps,
                                    size_t index,
                                    double *out);

// Run a scenario config file end to end and write the CSV report.
//
// # Safety
// `config_path` and `out_csv_path` must be NUL-terminated C strings.
enum AdiaStatus adia_run_scenario_file(const char *config_path, const char *out_csv_path);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ADIA_CHECK_H */
