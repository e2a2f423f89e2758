#include "hlphase/hpea.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <stdexcept>

#include "hlphase/holevo.hpp"
#include "hlphase/parallel.hpp"
#include "hlphase/rng.hpp"

namespace hlphase::hpea {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDistributionTolerance = 1e-10;

void check_photons(const DensityMatrix& rho) {
    if (rho.num_qubits() < 2) throw std::invalid_argument("protocol needs at least two photons");
}

// Gate applied to photon k (the leading qubit of the current reduced state):
// 2^(K-k) passes of the unknown phase and, if enabled, the feedforward phase.
Unitary stage_gate(int photon, int num_photons, double phi, bool feedforward, std::size_t prefix_bits) {
    const int passes = 1 << (num_photons - 1 - photon);
    double theta = 0.0;
    if (feedforward) {
        for (int j = 0; j < photon; ++j) {
            if ((prefix_bits >> j) & 1U) theta += kPi / static_cast<double>(1 << (photon - j));
        }
    }
    if (theta == 0.0) return phase_gate(passes, phi);
    const CMatrix m = phase_gate(passes, phi).matrix() * reference_phase(theta).matrix();
    return Unitary::from_matrix(m);
}

// Depth-first walk of the measurement chain. visit(photon, prefix, p_d_given_prefix)
// is called at every internal node; leaf(pattern, probability) at the end.
void walk_chain(const DensityMatrix& rho, double phi, bool feedforward,
                const std::function<void(int, std::size_t, double, double)>& node_visit,
                const std::function<void(std::size_t, double)>& leaf) {
    const int n = rho.num_qubits();
    std::function<void(const DensityMatrix&, int, std::size_t, double)> recurse =
        [&](const DensityMatrix& state, int photon, std::size_t prefix, double weight) {
            const DensityMatrix evolved = apply_on_qubit(stage_gate(photon, n, phi, feedforward, prefix), 0, state);
            XBranch d = project_x(evolved, 0, XOutcome::d);
            const double pd = d.probability;
            node_visit(photon, prefix, pd, weight);
            for (int bit = 0; bit < 2; ++bit) {
                const std::size_t next = prefix | (static_cast<std::size_t>(bit) << photon);
                const double p_branch = bit == 0 ? pd : 1.0 - pd;
                if (photon + 1 == n) {
                    leaf(next, weight * p_branch);
                    continue;
                }
                if (p_branch <= 0.0) {
                    // Zero-probability branch: every completion has probability zero.
                    std::function<void(int, std::size_t)> zero_fill = [&](int k, std::size_t pre) {
                        node_visit(k, pre, 0.5, 0.0);
                        for (int b = 0; b < 2; ++b) {
                            const std::size_t nx = pre | (static_cast<std::size_t>(b) << k);
                            if (k + 1 == n) leaf(nx, 0.0);
                            else zero_fill(k + 1, nx);
                        }
                    };
                    zero_fill(photon + 1, next);
                    continue;
                }
                XBranch branch = bit == 0 ? std::move(d) : project_x(evolved, 0, XOutcome::a);
                recurse(*branch.collapsed, photon + 1, next, weight * p_branch);
            }
        };
    recurse(rho, 0, 0, 1.0);
}

}  // namespace

double heisenberg_limit(int resources) {
    if (resources < 1) throw std::invalid_argument("Heisenberg limit needs N >= 1");
    const double t = std::tan(kPi / (resources + 2));
    return t * t;
}

int resources_for_photons(int num_photons) {
    if (num_photons < 1 || num_photons > kMaxQubits) throw std::invalid_argument("unsupported photon count");
    return (1 << num_photons) - 1;
}

std::pair<double, double> optimal_coefficients() {
    const double s0 = std::sin(kPi / 5.0), s1 = std::sin(2.0 * kPi / 5.0);
    const double norm = std::sqrt(s0 * s0 + s1 * s1);
    return {s0 / norm, s1 / norm};
}

PureState optimal_state(int K) {
    if (K != 1) throw std::invalid_argument("optimal probe is only tabulated for K = 1");
    const auto [c0, c1] = optimal_coefficients();
    const double r = 1.0 / std::sqrt(2.0);
    return PureState::from_amplitudes({c0 * r, c1 * r, c1 * r, c0 * r});
}

DensityMatrix optimal_density() { return DensityMatrix::from_pure(optimal_state(1)); }

PureState prepare_via_cnot(double c0, double c1) {
    if (std::abs(c0 * c0 + c1 * c1 - 1.0) > kDistributionTolerance) {
        throw std::invalid_argument("target amplitudes must satisfy c0^2 + c1^2 = 1");
    }
    const double r = 1.0 / std::sqrt(2.0);
    // (|0> + |1>)/sqrt2 (x) (c0|0> + c1|1>), control = qubit 0.
    const PureState product = PureState::normalized({r * c0, r * c1, r * c0, r * c1});
    return apply_cnot(product, 0, 1);
}

std::string outcome_label(std::size_t index, int num_photons) {
    std::string label;
    for (int k = 0; k < num_photons; ++k) label.push_back(((index >> k) & 1U) ? 'a' : 'd');
    return label;
}

double estimate_for_pattern(std::size_t index, int num_photons) {
    return 2.0 * kPi * static_cast<double>(index) / static_cast<double>(std::size_t{1} << num_photons);
}

double estimate_from_bits(int phi0, int phi1) {
    if ((phi0 != 0 && phi0 != 1) || (phi1 != 0 && phi1 != 1)) throw std::invalid_argument("bits must be 0 or 1");
    return kPi * (phi0 + 2 * phi1) / 2.0;
}

OutcomeDistribution outcome_distribution_exact(const DensityMatrix& rho, double phi, bool feedforward) {
    check_photons(rho);
    OutcomeDistribution dist;
    dist.true_phase = phi;
    dist.num_photons = rho.num_qubits();
    dist.probabilities.assign(std::size_t{1} << dist.num_photons, 0.0);
    walk_chain(rho, phi, feedforward, [](int, std::size_t, double, double) {},
               [&](std::size_t pattern, double p) { dist.probabilities[pattern] = p; });
    return dist;
}

ShotRecord run_single_shot(const DensityMatrix& rho, double phi, bool feedforward, std::span<const double> draws) {
    check_photons(rho);
    const int n = rho.num_qubits();
    if (draws.size() < static_cast<std::size_t>(n)) throw std::invalid_argument("need one draw per photon");
    ShotRecord shot;
    shot.true_phase = phi;
    std::optional<DensityMatrix> state = rho;
    for (int k = 0; k < n; ++k) {
        const DensityMatrix evolved = apply_on_qubit(stage_gate(k, n, phi, feedforward, shot.pattern), 0, *state);
        MeasurementOutcome m = measure_x(evolved, 0, draws[static_cast<std::size_t>(k)]);
        const int bit = m.result == XOutcome::a ? 1 : 0;
        shot.bits.push_back(bit);
        shot.pattern |= static_cast<std::size_t>(bit) << k;
        state = std::move(m.collapsed);
    }
    shot.estimate = estimate_for_pattern(shot.pattern, n);
    return shot;
}

ShotSampler::ShotSampler(const DensityMatrix& rho, double phi, bool feedforward) : num_photons_(rho.num_qubits()) {
    check_photons(rho);
    prob_d_.assign((std::size_t{1} << num_photons_) - 1, 0.5);
    walk_chain(
        rho, phi, feedforward,
        [&](int photon, std::size_t prefix, double pd, double) {
            // Heap index of the node reached by `prefix` bits (LSB first) after `photon` steps.
            std::size_t node = 0;
            for (int j = 0; j < photon; ++j) node = 2 * node + 1 + ((prefix >> j) & 1U);
            prob_d_[node] = pd;
        },
        [](std::size_t, double) {});
}

Complex conditional_mean(const OutcomeDistribution& dist) {
    Complex acc = 0.0;
    for (std::size_t o = 0; o < dist.probabilities.size(); ++o) {
        acc += dist.probabilities[o] * std::polar(1.0, dist.true_phase - estimate_for_pattern(o, dist.num_photons));
    }
    return acc;
}

double conditional_holevo(const OutcomeDistribution& dist) {
    if (dist.probabilities.empty()) throw std::invalid_argument("empty distribution");
    return holevo_from_sharpness(std::abs(conditional_mean(dist)));
}

namespace {

int photons_for_pattern_count(std::size_t size) {
    for (int n = 1; n <= kMaxQubits; ++n) {
        if (size == (std::size_t{1} << n)) return n;
    }
    throw std::invalid_argument("count vector length must be 2^n");
}

OutcomeDistribution empirical(std::span<const std::int64_t> counts, double true_phase) {
    OutcomeDistribution dist;
    dist.true_phase = true_phase;
    dist.num_photons = photons_for_pattern_count(counts.size());
    std::int64_t total = 0;
    for (auto c : counts) {
        if (c < 0) throw std::invalid_argument("negative count");
        total += c;
    }
    if (total <= 0) throw std::invalid_argument("record has no counts");
    for (auto c : counts) dist.probabilities.push_back(static_cast<double>(c) / static_cast<double>(total));
    return dist;
}

}  // namespace

double conditional_holevo(std::span<const std::int64_t> counts, double true_phase) {
    return conditional_holevo(empirical(counts, true_phase));
}

double true_phase_from_record(std::span<const std::int64_t> counts) {
    const OutcomeDistribution dist = empirical(counts, 0.0);
    Complex acc = 0.0;
    for (std::size_t o = 0; o < counts.size(); ++o) {
        acc += dist.probabilities[o] * std::polar(1.0, estimate_for_pattern(o, dist.num_photons));
    }
    return wrap_phase(std::arg(acc));
}

PhaseSweepResult phase_sweep(const DensityMatrix& rho, const SweepOptions& options) {
    check_photons(rho);
    const int n = rho.num_qubits();
    PhaseSweepResult out;
    out.mode = options.mode;
    out.num_photons = n;
    out.resources = resources_for_photons(n);
    require_grid(options.grid_size, out.resources);
    if (options.mode == SweepMode::monte_carlo && options.trials_per_phase < 1) {
        throw std::invalid_argument("trials per phase must be >= 1");
    }

    out.phases = uniform_phase_grid(options.grid_size, options.grid_offset);
    const std::size_t cells = out.phases.size();
    const std::size_t patterns = std::size_t{1} << n;
    out.probabilities.assign(cells, std::vector<double>(patterns, 0.0));
    if (options.mode == SweepMode::monte_carlo) out.counts.assign(cells, std::vector<std::int64_t>(patterns, 0));

    parallel_for(cells, options.workers, [&](std::size_t i) {
        const double phi = out.phases[i];
        if (options.mode == SweepMode::exact) {
            out.probabilities[i] = outcome_distribution_exact(rho, phi, options.feedforward).probabilities;
            return;
        }
        const ShotSampler sampler(rho, phi, options.feedforward);
        auto& counts = out.counts[i];
        for (std::int64_t t = 0; t < options.trials_per_phase; ++t) {
            CounterStream stream(options.seed, i, static_cast<std::uint64_t>(t));
            ++counts[sampler.sample(stream)];
        }
        for (std::size_t o = 0; o < patterns; ++o) {
            out.probabilities[i][o] = static_cast<double>(counts[o]) / static_cast<double>(options.trials_per_phase);
        }
    });

    std::vector<double> args(cells);
    for (std::size_t i = 0; i < cells; ++i) {
        OutcomeDistribution dist{out.phases[i], n, out.probabilities[i]};
        const Complex m = conditional_mean(dist);
        out.conditional_means.push_back(m);
        out.sharpness.push_back(std::abs(m));
        out.conditional_variance.push_back(holevo_from_sharpness(std::abs(m)));
        args[i] = std::arg(m);
    }
    out.unconditional_variance = unconditional_holevo(out);
    out.recombined_variance = recombine_conditional(out.conditional_variance, args);
    return out;
}

double unconditional_holevo(const PhaseSweepResult& sweep) {
    if (sweep.phases.empty()) throw std::invalid_argument("empty sweep");
    Complex acc = 0.0;
    for (std::size_t i = 0; i < sweep.phases.size(); ++i) {
        for (std::size_t o = 0; o < sweep.probabilities[i].size(); ++o) {
            acc += sweep.probabilities[i][o] *
                   std::polar(1.0, sweep.phases[i] - estimate_for_pattern(o, sweep.num_photons));
        }
    }
    return holevo_from_sharpness(std::abs(acc) / static_cast<double>(sweep.phases.size()));
}

double recombine_conditional(std::span<const double> conditional_variance, std::span<const double> mean_args) {
    if (conditional_variance.size() != mean_args.size() || conditional_variance.empty()) {
        throw std::invalid_argument("recombination needs matching, non-empty inputs");
    }
    Complex acc = 0.0;
    for (std::size_t i = 0; i < conditional_variance.size(); ++i) {
        const double v = conditional_variance[i];
        const double mu = is_infinite_variance(v) ? 0.0 : 1.0 / std::sqrt(v + 1.0);
        acc += std::polar(mu, mean_args[i]);
    }
    return holevo_from_sharpness(std::abs(acc) / static_cast<double>(conditional_variance.size()));
}

double unconditional_holevo(std::span<const PhaseRecord> records) {
    if (records.empty()) throw std::invalid_argument("no records");
    Complex acc = 0.0;
    for (const auto& rec : records) acc += conditional_mean(empirical(rec.counts, rec.phase));
    return holevo_from_sharpness(std::abs(acc) / static_cast<double>(records.size()));
}

ConfidenceInterval bootstrap_variance_ci(std::span<const PhaseRecord> records, int resamples, std::uint64_t seed,
                                         double level) {
    if (resamples < 100) throw std::invalid_argument("bootstrap needs at least 100 resamples");
    if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("confidence level must lie in (0, 1)");
    if (records.empty()) throw std::invalid_argument("too few samples: no records");
    std::vector<std::vector<double>> freqs;
    std::vector<std::int64_t> totals;
    for (const auto& rec : records) {
        const OutcomeDistribution d = empirical(rec.counts, rec.phase);
        std::int64_t total = 0;
        for (auto c : rec.counts) total += c;
        if (total < 2) throw std::invalid_argument("too few samples: each record needs at least two counts");
        freqs.push_back(d.probabilities);
        totals.push_back(total);
    }

    std::vector<double> stats(static_cast<std::size_t>(resamples));
    for (int r = 0; r < resamples; ++r) {
        std::vector<PhaseRecord> resampled(records.size());
        for (std::size_t i = 0; i < records.size(); ++i) {
            CounterStream stream(seed, static_cast<std::uint64_t>(r), i);
            std::int64_t left = totals[i];
            double mass = 1.0;
            auto& counts = resampled[i].counts;
            counts.assign(freqs[i].size(), 0);
            // Multinomial draw as a chain of conditional binomials.
            for (std::size_t o = 0; o + 1 < freqs[i].size() && left > 0; ++o) {
                const double p = mass > 0.0 ? std::clamp(freqs[i][o] / mass, 0.0, 1.0) : 0.0;
                std::binomial_distribution<std::int64_t> draw(left, p);
                counts[o] = draw(stream);
                left -= counts[o];
                mass -= freqs[i][o];
            }
            counts.back() += left;
            resampled[i].phase = records[i].phase;
        }
        stats[static_cast<std::size_t>(r)] = unconditional_holevo(resampled);
    }
    std::sort(stats.begin(), stats.end());
    auto quantile = [&](double q) {
        const double pos = q * static_cast<double>(stats.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = std::min(lo + 1, stats.size() - 1);
        if (is_infinite_variance(stats[hi]) || is_infinite_variance(stats[lo])) return stats[hi];
        return stats[lo] + (pos - static_cast<double>(lo)) * (stats[hi] - stats[lo]);
    };
    const double tail = (1.0 - level) / 2.0;
    return {quantile(tail), quantile(1.0 - tail), unconditional_holevo(records)};
}

}  // namespace hlphase::hpea
