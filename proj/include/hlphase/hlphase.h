#ifndef HLPHASE_H
#define HLPHASE_H

/* C interface to the hlphase library. Objects are opaque handles released
 * with the matching *_free function. Every call returns an hlp_status; on
 * failure hlp_last_error() describes the problem for the calling thread. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define HLP_API __declspec(dllexport)
#else
#define HLP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
    HLP_OK = 0,
    HLP_ERR_INTERNAL = 1,
    HLP_ERR_VALIDATION = 2,
    HLP_ERR_NONCONVERGENCE = 3,
    HLP_ERR_IO = 4,
    HLP_ERR_RANGE = 5
} hlp_status;

HLP_API const char* hlp_version(void);
HLP_API const char* hlp_last_error(void);
/* Name of the violated invariant for HLP_ERR_VALIDATION ("" otherwise). */
HLP_API const char* hlp_last_invariant(void);

/* Holevo variances equal to +infinity mean "no phase information". */
HLP_API int hlp_is_infinite(double variance);
HLP_API double hlp_heisenberg_limit(int resources);

/* ---- density matrices ---- */

typedef struct hlp_density hlp_density;

HLP_API hlp_status hlp_density_from_json(const char* text, hlp_density** out);
HLP_API hlp_status hlp_density_load(const char* path, hlp_density** out);
HLP_API hlp_status hlp_density_optimal(hlp_density** out);
HLP_API hlp_status hlp_density_maximally_mixed(int num_qubits, hlp_density** out);
/* Row-major real and imaginary parts of a 2^n x 2^n matrix. */
HLP_API hlp_status hlp_density_from_entries(int num_qubits, const double* real, const double* imag,
                                            hlp_density** out);
/* (1 - weight) rho + weight * other. */
HLP_API hlp_status hlp_density_mix(const hlp_density* rho, const hlp_density* other, double weight,
                                   hlp_density** out);
HLP_API void hlp_density_free(hlp_density* rho);
HLP_API int hlp_density_num_qubits(const hlp_density* rho);
/* Fidelity with the optimal two-photon probe (two-qubit states only). */
HLP_API hlp_status hlp_density_fidelity_optimal(const hlp_density* rho, double* out);
HLP_API hlp_status hlp_density_purity(const hlp_density* rho, double* out);

/* ---- two-photon protocol ---- */

typedef enum { HLP_MODE_EXACT = 0, HLP_MODE_MC = 1 } hlp_mode;

typedef struct {
    int grid_size;
    double grid_offset;
    int feedforward;
    hlp_mode mode;
    int64_t trials_per_phase;
    uint64_t seed;
    int workers;
} hlp_sweep_options;

HLP_API hlp_sweep_options hlp_sweep_default_options(void);

typedef struct hlp_sweep hlp_sweep;

HLP_API hlp_status hlp_hpea_sweep(const hlp_density* rho, const hlp_sweep_options* options, hlp_sweep** out);
HLP_API void hlp_sweep_free(hlp_sweep* sweep);
HLP_API size_t hlp_sweep_size(const hlp_sweep* sweep);
HLP_API size_t hlp_sweep_outcomes(const hlp_sweep* sweep);
HLP_API double hlp_sweep_phase(const hlp_sweep* sweep, size_t i);
HLP_API double hlp_sweep_conditional_variance(const hlp_sweep* sweep, size_t i);
HLP_API double hlp_sweep_sharpness(const hlp_sweep* sweep, size_t i);
HLP_API double hlp_sweep_probability(const hlp_sweep* sweep, size_t i, size_t outcome);
HLP_API double hlp_sweep_unconditional_variance(const hlp_sweep* sweep);
HLP_API double hlp_sweep_recombined_variance(const hlp_sweep* sweep);

/* Outcome label ("dd", "ad", ...) of a two-photon pattern index. */
HLP_API const char* hlp_outcome_label(size_t pattern);
HLP_API double hlp_estimate_for_pattern(size_t pattern);

/* Exact P(pattern | phi) for the four two-photon patterns. */
HLP_API hlp_status hlp_hpea_distribution(const hlp_density* rho, double phi, int feedforward, double out[4]);

/* `shots` independent shots at a fixed phase; patterns[t] receives the
 * pattern of shot t. Shot t uses its own random stream derived from seed. */
HLP_API hlp_status hlp_hpea_shots(const hlp_density* rho, double phi, int feedforward, int64_t shots, uint64_t seed,
                                  int32_t* patterns);
HLP_API hlp_status hlp_true_phase_from_counts(const int64_t counts[4], double* out);
HLP_API hlp_status hlp_conditional_variance_from_counts(const int64_t counts[4], double true_phase, double* out);

/* Percentile bootstrap interval of the unconditional variance of a
 * Monte-Carlo sweep (needs mode HLP_MODE_MC). */
HLP_API hlp_status hlp_sweep_bootstrap(const hlp_sweep* sweep, int resamples, uint64_t seed, double level,
                                       double* low, double* high, double* point);

/* ---- shot-noise baseline ---- */

typedef struct {
    int probes;
    hlp_mode mode;
    int64_t trials;
    uint64_t seed;
    int grid_size;
    double grid_offset;
    int workers;
} hlp_snl_options;

HLP_API hlp_snl_options hlp_snl_default_options(void);
HLP_API hlp_status hlp_snl_exact_variance(int probes, double* out);
/* Runs the sweep; results are returned through an hlp_sweep handle whose
 * outcome count is the number of outcome vectors (probabilities unavailable). */
HLP_API hlp_status hlp_snl_sweep(const hlp_snl_options* options, hlp_sweep** out);

/* ---- scheme optimizer ---- */

typedef enum { HLP_SEPARABLE = 0, HLP_SYMMETRIC = 1, HLP_GENERAL = 2 } hlp_state_class;

typedef struct {
    int restarts;
    uint64_t seed;
    int workers;
    int real_amplitudes;
    int max_evaluations;
} hlp_optimizer_options;

HLP_API hlp_optimizer_options hlp_optimizer_default_options(void);

typedef struct hlp_optimization hlp_optimization;

/* HLP_ERR_NONCONVERGENCE still returns a result in *out when no restart met
 * the convergence criteria; the caller owns it either way. */
HLP_API hlp_status hlp_optimize(const int* passes, size_t photons, hlp_state_class state_class, int adaptive,
                                const hlp_optimizer_options* options, hlp_optimization** out);
HLP_API hlp_status hlp_optimize_allocations(hlp_state_class state_class, int adaptive, int resources,
                                            const hlp_optimizer_options* options, hlp_optimization** out);
HLP_API hlp_status hlp_evaluate_scheme(const int* passes, size_t photons, hlp_state_class state_class, int adaptive,
                                       const double* amps_real, const double* amps_imag, const double* thetas,
                                       size_t theta_count, double* out);
HLP_API void hlp_optimization_free(hlp_optimization* result);
HLP_API double hlp_optimization_variance(const hlp_optimization* result);
HLP_API size_t hlp_optimization_photons(const hlp_optimization* result);
HLP_API int hlp_optimization_passes(const hlp_optimization* result, size_t photon);
HLP_API int hlp_optimization_restarts(const hlp_optimization* result);
HLP_API int hlp_optimization_converged(const hlp_optimization* result);
HLP_API int64_t hlp_optimization_evaluations(const hlp_optimization* result);
HLP_API size_t hlp_optimization_amplitude_count(const hlp_optimization* result);
HLP_API void hlp_optimization_amplitude(const hlp_optimization* result, size_t i, double* re, double* im);
HLP_API size_t hlp_optimization_theta_count(const hlp_optimization* result);
HLP_API double hlp_optimization_theta(const hlp_optimization* result, size_t i);

typedef struct hlp_table hlp_table;

HLP_API hlp_status hlp_table2(const hlp_optimizer_options* options, hlp_table** out);
HLP_API void hlp_table_free(hlp_table* table);
HLP_API size_t hlp_table_rows(const hlp_table* table);
/* flags: bit 0 symmetric entanglement, bit 1 multipass, bit 2 adaptive, bit 3 experimental. */
HLP_API int hlp_table_flags(const hlp_table* table, size_t row);
HLP_API const char* hlp_table_scheme(const hlp_table* table, size_t row);
/* Returns 0 and leaves *out untouched for experimental rows. */
HLP_API int hlp_table_computed(const hlp_table* table, size_t row, double* out);
HLP_API double hlp_table_reference(const hlp_table* table, size_t row);
HLP_API int hlp_table_precise_reference(const hlp_table* table, size_t row, double* out);

/* ---- waveplate model ---- */

typedef struct {
    char stage[16];
    double logical_phase;
    double hwp_angle;
    double extracted_phase;
    double error;
} hlp_calibration_row;

/* Writes 2 * points rows (unknown-phase stage, then feedforward stage). */
HLP_API hlp_status hlp_optics_calibration(int points, hlp_calibration_row* rows, size_t capacity);
/* Max |P_optics(d) - P_logical(d)| over a phi x theta grid for 1 and 2 passes. */
HLP_API hlp_status hlp_optics_equivalence(int phi_points, int theta_points, double* max_difference);
HLP_API hlp_status hlp_optics_double_pass(double phi, double* relative_phase);

#ifdef __cplusplus
}
#endif

#endif
