#include "hlphase/snl.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "hlphase/holevo.hpp"
#include "hlphase/parallel.hpp"
#include "hlphase/rng.hpp"

namespace hlphase::snl {

namespace {

constexpr double kInformationFloor = 1e-12;

void check_probes(int probes) {
    if (probes < 1 || probes > kMaxProbes) {
        throw std::invalid_argument("number of probes must lie in 1.." + std::to_string(kMaxProbes));
    }
}

std::vector<double> resolve_schedule(int probes, const std::vector<double>& schedule) {
    if (schedule.empty()) return default_schedule(probes);
    if (static_cast<int>(schedule.size()) != probes) throw std::invalid_argument("schedule length must equal N");
    return schedule;
}

}  // namespace

double click_probability(int u, double phi, double theta) {
    if (u != 1 && u != -1) throw std::invalid_argument("outcome u must be +1 or -1");
    return 0.5 * (1.0 + u * std::cos(phi - theta));
}

std::vector<double> default_schedule(int probes) {
    check_probes(probes);
    std::vector<double> s;
    for (int j = 1; j <= probes; ++j) s.push_back(j * std::numbers::pi / probes);
    return s;
}

double sequence_probability(std::span<const int> u, double phi, std::span<const double> schedule) {
    if (u.size() != schedule.size()) throw std::invalid_argument("outcome and schedule lengths differ");
    double p = 1.0;
    for (std::size_t j = 0; j < u.size(); ++j) p *= click_probability(u[j], phi, schedule[j]);
    return p;
}

std::vector<int> outcome_vector(std::size_t index, int probes) {
    std::vector<int> u(static_cast<std::size_t>(probes));
    for (int j = 0; j < probes; ++j) u[static_cast<std::size_t>(j)] = ((index >> j) & 1U) ? -1 : 1;
    return u;
}

Complex first_fourier_coefficient(std::span<const int> u, std::span<const double> schedule) {
    const int n = static_cast<int>(schedule.size());
    check_probes(n);
    const auto grid = uniform_phase_grid(minimum_grid_size(n));
    Complex acc = 0.0;
    for (double phi : grid) acc += std::polar(sequence_probability(u, phi, schedule), phi);
    return acc / static_cast<double>(grid.size());
}

double exact_variance(std::span<const double> schedule) {
    const int n = static_cast<int>(schedule.size());
    check_probes(n);
    double mu = 0.0;
    for (std::size_t idx = 0; idx < (std::size_t{1} << n); ++idx) {
        mu += std::abs(first_fourier_coefficient(outcome_vector(idx, n), schedule));
    }
    return holevo_from_sharpness(mu);
}

double exact_variance(int probes) {
    const auto s = default_schedule(probes);
    return exact_variance(s);
}

std::optional<double> estimate(std::span<const int> u, std::span<const double> schedule) {
    const Complex c = first_fourier_coefficient(u, schedule);
    if (std::abs(c) < kInformationFloor) return std::nullopt;
    return wrap_phase(std::arg(c));
}

SnlSweepResult simulate(const SnlConfig& config) {
    check_probes(config.probes);
    const int n = config.probes;
    require_grid(config.grid_size, n);
    if (config.mode == hpea::SweepMode::monte_carlo && config.trials < 1) {
        throw std::invalid_argument("trials must be >= 1");
    }

    SnlSweepResult out;
    out.probes = n;
    out.outcome_count = std::size_t{1} << n;
    out.schedule = resolve_schedule(n, config.schedule);
    out.phases = uniform_phase_grid(config.grid_size, config.grid_offset);

    // Estimates do not depend on phi: unit phasor, or zero for information-free outcomes.
    std::vector<Complex> estimate_phasor(out.outcome_count);
    for (std::size_t idx = 0; idx < out.outcome_count; ++idx) {
        const auto est = estimate(outcome_vector(idx, n), out.schedule);
        estimate_phasor[idx] = est ? std::polar(1.0, *est) : Complex(0.0);
    }

    out.conditional_means.assign(out.phases.size(), 0.0);
    parallel_for(out.phases.size(), config.workers, [&](std::size_t i) {
        const double phi = out.phases[i];
        std::vector<double> prob(out.outcome_count, 0.0);
        if (config.mode == hpea::SweepMode::exact) {
            for (std::size_t idx = 0; idx < out.outcome_count; ++idx) {
                prob[idx] = sequence_probability(outcome_vector(idx, n), phi, out.schedule);
            }
        } else {
            std::vector<double> p_plus(static_cast<std::size_t>(n));
            for (int j = 0; j < n; ++j) {
                p_plus[static_cast<std::size_t>(j)] = click_probability(1, phi, out.schedule[static_cast<std::size_t>(j)]);
            }
            std::vector<std::int64_t> counts(out.outcome_count, 0);
            for (std::int64_t t = 0; t < config.trials; ++t) {
                CounterStream stream(config.seed, i, static_cast<std::uint64_t>(t));
                std::size_t idx = 0;
                for (int j = 0; j < n; ++j) {
                    if (!(stream.uniform() < p_plus[static_cast<std::size_t>(j)])) idx |= std::size_t{1} << j;
                }
                ++counts[idx];
            }
            for (std::size_t idx = 0; idx < out.outcome_count; ++idx) {
                prob[idx] = static_cast<double>(counts[idx]) / static_cast<double>(config.trials);
            }
        }
        Complex m = 0.0;
        for (std::size_t idx = 0; idx < out.outcome_count; ++idx) {
            m += prob[idx] * std::polar(1.0, phi) * std::conj(estimate_phasor[idx]);
        }
        out.conditional_means[i] = m;
    });

    Complex total = 0.0;
    std::vector<double> args;
    for (const Complex& m : out.conditional_means) {
        out.sharpness.push_back(std::abs(m));
        out.conditional_variance.push_back(holevo_from_sharpness(std::abs(m)));
        args.push_back(std::arg(m));
        total += m;
    }
    out.unconditional_variance = holevo_from_sharpness(std::abs(total) / static_cast<double>(out.phases.size()));
    out.recombined_variance = hpea::recombine_conditional(out.conditional_variance, args);
    return out;
}

}  // namespace hlphase::snl
