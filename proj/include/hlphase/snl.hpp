#pragma once

// Shot-noise baseline: N independent single-photon probes, photon j read out
// against a controllable phase theta_j.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "hlphase/hpea.hpp"

namespace hlphase::snl {

inline constexpr int kMaxProbes = 12;

/// (1 + u cos(phi - theta)) / 2 for u = +-1.
double click_probability(int u, double phi, double theta);

/// theta_j = j pi / N, j = 1..N.
std::vector<double> default_schedule(int probes);

/// Product of click probabilities for the outcome vector `u`.
double sequence_probability(std::span<const int> u, double phi, std::span<const double> schedule);

/// First Fourier coefficient (1/2pi) int e^{i phi} P(u|phi) dphi, evaluated
/// exactly on a (2N+2)-point grid.
Complex first_fourier_coefficient(std::span<const int> u, std::span<const double> schedule);

/// Exact Holevo variance with the default schedule (or a custom one).
double exact_variance(int probes);
double exact_variance(std::span<const double> schedule);

/// arg of the first Fourier coefficient, or nullopt when the outcome carries
/// no phase information (coefficient below 1e-12).
std::optional<double> estimate(std::span<const int> u, std::span<const double> schedule);

struct SnlConfig {
    int probes = 3;
    std::vector<double> schedule;  // empty => default
    hpea::SweepMode mode = hpea::SweepMode::exact;
    std::int64_t trials = 100000;  // per phase, monte-carlo only
    std::uint64_t seed = 0;
    int grid_size = 64;
    double grid_offset = 0.0;
    int workers = 1;
};

struct SnlSweepResult {
    int probes = 3;
    std::size_t outcome_count = 8;
    std::vector<double> schedule;
    std::vector<double> phases;
    std::vector<Complex> conditional_means;
    std::vector<double> sharpness;
    std::vector<double> conditional_variance;
    double unconditional_variance = 0.0;
    double recombined_variance = 0.0;
};

/// Per-phase sharpness sum_u P(u|phi) e^{i(phi - phi_est(u))}; information-free
/// outcomes contribute nothing. Exact or sampled outcome probabilities.
SnlSweepResult simulate(const SnlConfig& config);

/// Decodes outcome-vector index bits into +-1 values (bit j set => u_j = -1).
std::vector<int> outcome_vector(std::size_t index, int probes);

}  // namespace hlphase::snl
