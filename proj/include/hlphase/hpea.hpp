#pragma once

// Heisenberg-limited phase estimation with K+1 photons and adaptive X-basis
// measurements. Photon k (0-based, in measurement order) passes 2^(K-k) times
// through the unknown phase. Measuring photon k yields bit phi_k (1 for
// outcome a); the estimate is phi_est = 2 pi sum_k phi_k 2^k / 2^(K+1).
//
// With feedforward enabled, photon k receives the reference phase
// R(theta_k), theta_k = pi * sum_{j<k} phi_j / 2^(k-j), before its last pass.
//
// Outcome patterns are indexed by sum_k phi_k 2^k. For K = 1 the labels read
// in measurement order (mode C first): 0 = dd, 1 = ad, 2 = da, 3 = aa.

#include <array>
#include <span>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hlphase/quantum_core.hpp"

namespace hlphase::hpea {

/// tan^2(pi / (N + 2)).
double heisenberg_limit(int resources);

/// N = 2^(K+1) - 1 phase-gate applications for K+1 photons.
int resources_for_photons(int num_photons);

/// Amplitudes (c0, c1) of the optimal two-photon probe c0 |Phi+> + c1 |Psi+>.
std::pair<double, double> optimal_coefficients();
PureState optimal_state(int K = 1);
DensityMatrix optimal_density();

/// CNOT (control 0, target 1) applied to (|0>+|1>)/sqrt2 (x) (c0|0> + c1|1>).
PureState prepare_via_cnot(double c0, double c1);

/// Label of outcome pattern `index` for `num_photons` photons, e.g. "ad".
std::string outcome_label(std::size_t index, int num_photons);

struct OutcomeDistribution {
    double true_phase = 0.0;
    int num_photons = 2;
    std::vector<double> probabilities;  // indexed by sum_k phi_k 2^k
};

/// Estimate for an outcome pattern index.
double estimate_for_pattern(std::size_t index, int num_photons);
/// pi (phi0 + 2 phi1) / 2 for the two-photon protocol.
double estimate_from_bits(int phi0, int phi1);

/// Exact outcome probabilities by walking the measure/feedforward chain on
/// density matrices.
OutcomeDistribution outcome_distribution_exact(const DensityMatrix& rho, double phi, bool feedforward);

struct ShotRecord {
    std::vector<int> bits;  // phi_0, phi_1, ...
    std::size_t pattern = 0;
    double estimate = 0.0;
    double true_phase = 0.0;
};

/// One shot through the chain with sequential collapse; draws[k] is the
/// uniform number used for photon k.
ShotRecord run_single_shot(const DensityMatrix& rho, double phi, bool feedforward, std::span<const double> draws);

/// Caches the branch probabilities of the chain at one phase so repeated
/// shots cost one comparison per photon. Samples the same law as
/// run_single_shot.
class ShotSampler {
public:
    ShotSampler(const DensityMatrix& rho, double phi, bool feedforward);

    template <class Rng>
    std::size_t sample(Rng& rng) const {
        std::size_t node = 0;  // index into the binary tree of prefixes
        std::size_t pattern = 0;
        for (int k = 0; k < num_photons_; ++k) {
            const bool a = !(rng.uniform() < prob_d_[node]);
            if (a) pattern |= std::size_t{1} << k;
            node = 2 * node + 1 + (a ? 1 : 0);
        }
        return pattern;
    }

    int num_photons() const noexcept { return num_photons_; }

private:
    int num_photons_;
    std::vector<double> prob_d_;  // P(d | prefix) in heap order
};

/// Complex conditional mean sum_o P(o|phi) e^{i(phi - phi_est(o))}.
Complex conditional_mean(const OutcomeDistribution& dist);
/// V_H^phi = mu^-2 - 1 with mu = |conditional_mean|; infinity when mu < 1e-15.
double conditional_holevo(const OutcomeDistribution& dist);
/// Same from observed pattern counts at a known phase.
double conditional_holevo(std::span<const std::int64_t> counts, double true_phase);

/// arg of sum_o n_o e^{i phi_est(o)}, wrapped into [0, 2 pi).
double true_phase_from_record(std::span<const std::int64_t> counts);

enum class SweepMode { exact, monte_carlo };

struct PhaseSweepResult {
    SweepMode mode = SweepMode::exact;
    int num_photons = 2;
    int resources = 3;
    std::vector<double> phases;
    std::vector<std::vector<double>> probabilities;  // exact or empirical
    std::vector<std::vector<std::int64_t>> counts;   // monte-carlo only
    std::vector<Complex> conditional_means;
    std::vector<double> sharpness;
    std::vector<double> conditional_variance;
    double unconditional_variance = 0.0;  // direct double average
    double recombined_variance = 0.0;     // from per-phase (V_H^phi, arg) pairs
};

struct SweepOptions {
    int grid_size = 64;
    double grid_offset = 0.0;
    bool feedforward = true;
    SweepMode mode = SweepMode::exact;
    std::int64_t trials_per_phase = 100000;
    std::uint64_t seed = 0;
    int workers = 1;
};

PhaseSweepResult phase_sweep(const DensityMatrix& rho, const SweepOptions& options);

/// |< <e^{i(phi - phi_est)}>_est >_phi|^-2 - 1 over the swept grid.
double unconditional_holevo(const PhaseSweepResult& sweep);

/// Recombines per-phase conditional variances, restoring each conditional
/// mean's complex phase: |<(V^phi + 1)^(-1/2) e^{i arg}>_phi|^-2 - 1.
double recombine_conditional(std::span<const double> conditional_variance, std::span<const double> mean_args);

struct PhaseRecord {
    double phase = 0.0;
    std::vector<std::int64_t> counts;
};

struct ConfidenceInterval {
    double low = 0.0;
    double high = 0.0;
    double point = 0.0;
};

/// Unconditional Holevo variance of observed records (uniform weight per record).
double unconditional_holevo(std::span<const PhaseRecord> records);

/// Percentile interval of the unconditional Holevo variance under multinomial
/// resampling of each record. Deterministic given seed.
ConfidenceInterval bootstrap_variance_ci(std::span<const PhaseRecord> records, int resamples, std::uint64_t seed,
                                         double level = 0.95);

}  // namespace hlphase::hpea
