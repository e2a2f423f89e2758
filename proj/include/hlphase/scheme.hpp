#pragma once

// Holevo variance of sequential single-photon readout schemes, and their
// optimization over probe states and controlled phases.
//
// A scheme measures photons one at a time in the X basis. Photon i passes
// passes[i] times through the unknown phase and carries the controlled phase
// theta_i (theta_0 = 0). With outcome bits o_i, the (unnormalized) outcome
// amplitude is
//
//   <o|psi(phi)> = 2^{-n/2} sum_b psi_b (-1)^{o.b} exp(i sum_i b_i (p_i phi - theta_i))
//
// and the sharpness is mu = sum_o |(1/2pi) int e^{i phi} P(o|phi) dphi|,
// i.e. the optimal estimate is used for every outcome.
//
// Controlled-phase layout. Adaptive: photon i >= 1 owns 2^i entries indexed
// by the previous bits o_0 + 2 o_1 + ...; entries are concatenated in photon
// order (6 phases for three photons). Non-adaptive: one entry per photon i >= 1.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hlphase/quantum_core.hpp"

namespace hlphase::scheme {

enum class StateClass { separable, symmetric, general };

std::string to_string(StateClass c);
StateClass state_class_from_string(const std::string& name);

struct SchemeSpec {
    std::vector<int> passes;  // in measurement order
    StateClass state_class = StateClass::general;
    bool adaptive = false;

    int photons() const { return static_cast<int>(passes.size()); }
    int resources() const;
};

/// Throws ValidationError: non-positive passes, photon counts outside 1..4,
/// or an entangled state class requested for a single photon.
void validate(const SchemeSpec& spec);

/// Number of controlled phases in the layout described above.
std::size_t policy_size(const SchemeSpec& spec);

/// Per-photon phases in effect for an outcome pattern (bit i = o_i).
std::vector<double> resolve_thetas(const SchemeSpec& spec, std::span<const double> policy, std::size_t outcome);

/// Controlled phases after checking them against the spec's wiring. A
/// non-adaptive spec also accepts the adaptive layout when every photon's
/// entries agree; otherwise std::invalid_argument is thrown.
std::vector<double> check_wiring(const SchemeSpec& spec, std::span<const double> policy);

// ---- probabilities and sharpness ----

/// P(o|phi) for explicit per-photon phases; amplitude index bit (n-1-i) is photon i.
double outcome_probability(std::span<const Complex> amplitudes, std::span<const int> passes,
                           std::span<const double> thetas, std::size_t outcome, double phi);

double scheme_probability(const SchemeSpec& spec, std::span<const Complex> amplitudes, std::span<const double> policy,
                          std::size_t outcome, double phi);

/// Sharpness with the Fourier integral evaluated on `grid_size` points
/// (0 => the exact minimum 2(N+1)).
double scheme_sharpness(const SchemeSpec& spec, std::span<const Complex> amplitudes, std::span<const double> policy,
                        int grid_size = 0);

/// Holevo variance mu^-2 - 1 (infinity when mu < 1e-15).
double evaluate_scheme(const SchemeSpec& spec, std::span<const Complex> amplitudes, std::span<const double> policy);

// ---- state parameterization ----

/// Orthonormal basis (columns) of the allowed state subspace: permutation-
/// symmetric among photons with equal pass counts for the symmetric class,
/// the full space otherwise.
CMatrix symmetric_basis(std::span<const int> passes);

/// Real parameters describing a state of the class (hyperspherical moduli
/// angles followed by relative phases; phases omitted for real amplitudes).
std::size_t state_param_count(const SchemeSpec& spec, bool real_amplitudes);
std::vector<Complex> decode_state(const SchemeSpec& spec, std::span<const double> params, bool real_amplitudes);
std::vector<double> encode_state(const SchemeSpec& spec, std::span<const Complex> coefficients, bool real_amplitudes);

/// Multiplies by a global phase so the first non-negligible amplitude is real and non-negative.
std::vector<Complex> fix_global_phase(std::vector<Complex> amplitudes);

struct PolicyParameters {
    std::vector<double> state_params;
    std::vector<Complex> amplitudes;
    std::vector<double> theta;
};

double evaluate_scheme(const SchemeSpec& spec, const PolicyParameters& params);

// ---- optimization ----

struct OptimizerOptions {
    int restarts = 200;
    std::uint64_t seed = 1;
    int workers = 1;
    bool real_amplitudes = false;
    int max_evaluations = 40000;  // per restart
};

struct OptimizationResult {
    SchemeSpec spec;
    double best_variance = 0.0;
    PolicyParameters best_params;
    int restarts = 0;
    int restarts_converged = 0;
    std::int64_t evaluations = 0;
    std::vector<double> restart_values;
};

OptimizationResult optimize_scheme(const SchemeSpec& spec, const OptimizerOptions& options);

/// Ordered pass allocations (compositions) of `resources`.
std::vector<std::vector<int>> pass_allocations(int resources);

/// Best scheme over all pass allocations of `resources`, skipping allocations
/// the state class cannot use (a single photon cannot be entangled).
OptimizationResult optimize_over_allocations(StateClass state_class, bool adaptive, int resources,
                                             const OptimizerOptions& options);

// ---- summary of all schemes at N = 3 ----

struct TableRow {
    bool symmetric_entanglement;
    bool multipass;
    bool adaptive;
    std::string scheme;
    std::optional<double> computed;  // empty for experimental rows, which are not reproduced
    double reference;                // published table value
    std::optional<double> precise_reference;
    bool experimental;
};

struct TableOptions {
    OptimizerOptions optimizer;
};

std::vector<TableRow> table2_report(const TableOptions& options);

}  // namespace hlphase::scheme
