/* C API for the lassodual library: complex-valued generalized LASSO solving,
 * dual-vector certificates, and regularization-parameter selection for
 * DOA estimation from single-snapshot sensor-array data.
 *
 * All handles are opaque; every function returns an ld_status. Complex vectors
 * cross the boundary as separate real/imaginary double arrays of the length
 * given by the corresponding *_size query.
 */
#ifndef LASSODUAL_H
#define LASSODUAL_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ld_status {
  LD_OK = 0,
  LD_ERR_INVALID_ARGUMENT = 1,
  LD_ERR_NOT_CONVERGED = 2,
  LD_ERR_K0_UNREACHABLE = 3,
  LD_ERR_AUDIT_FAILED = 4,
  LD_ERR_RANK_DEFICIENT = 5,
  LD_ERR_IO = 6,
  LD_ERR_INTERNAL = 7
} ld_status;

/* Message for the most recent error on this thread (empty string if none). */
const char* ld_last_error(void);

/* ------------------------------------------------------------------ */
/* Steering dictionaries                                              */

typedef struct ld_dictionary ld_dictionary;

/* ULA dictionary on the uniform grid theta_m = (m-1)*180/M - 90. */
ld_status ld_dictionary_create_uniform(int sensors, int grid_size,
                                       ld_dictionary** out);
/* ULA dictionary on the inclusive grid lo, lo+step, ..., hi. */
ld_status ld_dictionary_create_span(int sensors, double lo_deg, double hi_deg,
                                    double step_deg, ld_dictionary** out);
void ld_dictionary_destroy(ld_dictionary* dict);

int ld_dictionary_sensors(const ld_dictionary* dict);
int ld_dictionary_size(const ld_dictionary* dict);
ld_status ld_dictionary_angles(const ld_dictionary* dict, double* angles_deg);
ld_status ld_dictionary_coherence(const ld_dictionary* dict, int i, int j,
                                  double* re, double* im);
ld_status ld_dictionary_mutual_coherence(const ld_dictionary* dict, double* out);

/* ------------------------------------------------------------------ */
/* Measurement synthesis                                              */

/* y = A x + n for sources snapped to the nearest grid bins. Powers are linear
 * scale; noise is circularly symmetric complex normal with per-element
 * variance sigma2, deterministic for a given seed. Outputs have length N. */
ld_status ld_synthesize(const ld_dictionary* dict, const double* doas_deg,
                        const double* powers, const double* phases_rad,
                        int num_sources, double sigma2, uint64_t seed,
                        double* y_re, double* y_im);

/* Noise variance reaching snr_db for the given (snapped, noiseless) scene. */
ld_status ld_sigma_for_snr(const ld_dictionary* dict, const double* doas_deg,
                           const double* powers, const double* phases_rad,
                           int num_sources, double snr_db, double* out);

/* ------------------------------------------------------------------ */
/* Solving and selection                                              */

/* Zero-solution threshold 2*||D^-H A^H y||_inf. weights may be NULL (identity). */
ld_status ld_mu_max(const ld_dictionary* dict, const double* weights,
                    const double* y_re, const double* y_im, double* out);

typedef struct ld_solution ld_solution;

/* Solves the generalized LASSO at the given mu. weights NULL means identity. */
ld_status ld_solve(const ld_dictionary* dict, const double* weights,
                   const double* y_re, const double* y_im, double mu,
                   ld_solution** out);

typedef enum ld_select_algorithm {
  LD_SELECT_ORDER_RECURSIVE = 0,
  LD_SELECT_FAST = 1,
  LD_SELECT_DUAL = 2
} ld_select_algorithm;

/* Selects mu for sparsity order k0 (interval factor f in (0,1)) and returns
 * the solution at the selected mu. */
ld_status ld_select_mu(const ld_dictionary* dict, const double* weights,
                       const double* y_re, const double* y_im, int k0, double f,
                       ld_select_algorithm algorithm, ld_solution** out);

void ld_solution_destroy(ld_solution* sol);
double ld_solution_mu(const ld_solution* sol);
int ld_solution_converged(const ld_solution* sol);
int ld_solution_solve_count(const ld_solution* sol);
/* x, u have the dictionary grid length. */
ld_status ld_solution_primal(const ld_solution* sol, double* x_re, double* x_im);
ld_status ld_solution_dual(const ld_solution* sol, double* u_re, double* u_im);
int ld_solution_active_count(const ld_solution* sol);
ld_status ld_solution_active_set(const ld_solution* sol, int* indices);
int ld_solution_dual_active_count(const ld_solution* sol);
ld_status ld_solution_dual_active_set(const ld_solution* sol, int* indices);

/* ------------------------------------------------------------------ */
/* Scenario tasks (JSON in, files + JSON out)                         */

/* Runs a scenario config (JSON text). Writes result.json (and path.csv for
 * path tasks) into out_dir when non-NULL/non-empty. On success and on task
 * failures with a meaningful record (audit failure, unreachable K0) the
 * record JSON is returned through result_json; free it with ld_string_free. */
ld_status ld_run_task_json(const char* config_json, const char* out_dir,
                           char** result_json);

/* JSON text of a built-in scenario configuration. */
ld_status ld_builtin_scenario_json(const char* name, char** config_json);
/* Newline-separated list of built-in scenario names. */
ld_status ld_builtin_scenario_names(char** names);

void ld_string_free(char* s);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* LASSODUAL_H */
