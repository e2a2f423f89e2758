#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "hlphase/holevo.hpp"
#include "hlphase/hpea.hpp"
#include "hlphase/rng.hpp"

using namespace hlphase;
using namespace hlphase::hpea;

namespace {

constexpr double kPi = std::numbers::pi;
const double kS = 1.0 / std::sqrt(2.0);
const double kHL3 = std::pow(std::tan(kPi / 5), 2);

// Full 4x4 oracle: the two-photon chain written as explicit Kronecker
// products and projectors, independent of apply_on_qubit / project_x.
std::array<double, 4> brute_force_distribution(const DensityMatrix& rho, double phi, bool feedforward) {
    using M2 = Eigen::Matrix2cd;
    using M4 = Eigen::Matrix4cd;
    auto kron = [](const M2& a, const M2& b) {
        M4 out;
        for (int i = 0; i < 2; ++i) {
            for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
        }
        return out;
    };
    M2 u1 = M2::Identity(), u2 = M2::Identity(), r = M2::Identity();
    u1(1, 1) = std::polar(1.0, phi);
    u2(1, 1) = std::polar(1.0, 2 * phi);
    r(0, 0) = Complex(0, 1);
    M2 pd, pa;
    pd << 0.5, 0.5, 0.5, 0.5;
    pa << 0.5, -0.5, -0.5, 0.5;
    const M4 rho4 = rho.matrix();
    std::array<double, 4> out{};
    for (int b0 = 0; b0 < 2; ++b0) {
        for (int b1 = 0; b1 < 2; ++b1) {
            const M2 second = (feedforward && b0 == 1) ? M2(u1 * r) : u1;
            const M4 evolve = kron(u2, second);
            const M4 proj = kron(b0 ? pa : pd, b1 ? pa : pd);
            out[static_cast<std::size_t>(b0 + 2 * b1)] = (proj * evolve * rho4 * evolve.adjoint()).trace().real();
        }
    }
    return out;
}

DensityMatrix x_product_dd() {
    return DensityMatrix::from_pure(PureState::from_amplitudes({0.5, 0.5, 0.5, 0.5}));
}

double five_sigma(double p, double n) { return 5.0 * std::sqrt(std::max(p * (1 - p), 1.0 / n) / n); }

}  // namespace

TEST(HeisenbergLimit, Examples) {
    EXPECT_NEAR(heisenberg_limit(3), 0.5278, 1e-4);
    EXPECT_NEAR(heisenberg_limit(3), 0.5278640450004206, 1e-15);
    EXPECT_NEAR(heisenberg_limit(1), 3.0, 1e-12);
    EXPECT_NEAR(heisenberg_limit(2), 1.0, 1e-12);
    EXPECT_THROW(heisenberg_limit(0), std::invalid_argument);
}

TEST(OptimalState, CoefficientsAndAmplitudes) {
    const auto [c0, c1] = optimal_coefficients();
    EXPECT_NEAR(c0, 0.525731, 1e-6);
    EXPECT_NEAR(c1, 0.850651, 1e-6);
    EXPECT_NEAR(c0 * c0 + c1 * c1, 1.0, 1e-15);
    const auto psi = optimal_state();
    EXPECT_NEAR(psi.amplitude(0).real(), c0 * kS, 1e-15);
    EXPECT_NEAR(psi.amplitude(3).real(), c0 * kS, 1e-15);
    EXPECT_NEAR(psi.amplitude(1).real(), c1 * kS, 1e-15);
    EXPECT_NEAR(psi.amplitude(2).real(), c1 * kS, 1e-15);
    EXPECT_NEAR(fidelity(optimal_density(), psi), 1.0, 1e-12);
    EXPECT_THROW(optimal_state(2), std::invalid_argument);
}

TEST(PrepareViaCnot, Examples) {
    const auto bell = prepare_via_cnot(1.0, 0.0);
    EXPECT_NEAR(bell.amplitude(0).real(), kS, 1e-15);
    EXPECT_NEAR(bell.amplitude(3).real(), kS, 1e-15);
    const auto psi_plus = prepare_via_cnot(0.0, 1.0);
    EXPECT_NEAR(psi_plus.amplitude(1).real(), kS, 1e-15);
    EXPECT_NEAR(psi_plus.amplitude(2).real(), kS, 1e-15);
    const auto [c0, c1] = optimal_coefficients();
    const auto prepared = prepare_via_cnot(c0, c1);
    EXPECT_LT((prepared.amplitudes() - optimal_state().amplitudes()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_THROW(prepare_via_cnot(1.0, 1.0), std::invalid_argument);
}

TEST(Estimates, BitConvention) {
    EXPECT_DOUBLE_EQ(estimate_from_bits(0, 0), 0.0);
    EXPECT_DOUBLE_EQ(estimate_from_bits(1, 0), kPi / 2);
    EXPECT_DOUBLE_EQ(estimate_from_bits(0, 1), kPi);
    EXPECT_DOUBLE_EQ(estimate_from_bits(1, 1), 3 * kPi / 2);
    EXPECT_EQ(outcome_label(0, 2), "dd");
    EXPECT_EQ(outcome_label(1, 2), "ad");
    EXPECT_EQ(outcome_label(2, 2), "da");
    EXPECT_EQ(outcome_label(3, 2), "aa");
    EXPECT_THROW(estimate_from_bits(2, 0), std::invalid_argument);
}

TEST(OutcomeDistribution, OptimalStateAtZero) {
    const auto [c0, c1] = optimal_coefficients();
    const auto d = outcome_distribution_exact(optimal_density(), 0.0, true);
    EXPECT_NEAR(d.probabilities[0], (c0 + c1) * (c0 + c1) / 2, 1e-12);
    EXPECT_NEAR(d.probabilities[0], 0.9472135954999579, 1e-12);
    EXPECT_NEAR(d.probabilities[1], (c0 - c1) * (c0 - c1) / 4, 1e-12);
    EXPECT_NEAR(d.probabilities[3], (c0 - c1) * (c0 - c1) / 4, 1e-12);
    EXPECT_NEAR(d.probabilities[2], 0.0, 1e-12);
}

TEST(OutcomeDistribution, OptimalStateAtPi) {
    const auto d = outcome_distribution_exact(optimal_density(), kPi, true);
    EXPECT_NEAR(d.probabilities[2], 0.9472135954999579, 1e-12);
}

TEST(OutcomeDistribution, MaximallyMixedIsUniform) {
    for (double phi : {0.0, 0.4, 2.2}) {
        for (bool ff : {true, false}) {
            const auto d = outcome_distribution_exact(DensityMatrix::maximally_mixed(2), phi, ff);
            for (double p : d.probabilities) EXPECT_NEAR(p, 0.25, 1e-12);
        }
    }
}

TEST(OutcomeDistribution, MatchesBruteForceOracle) {
    const std::vector<DensityMatrix> states = {
        optimal_density(), optimal_density().mixed_with(DensityMatrix::maximally_mixed(2), 0.3),
        DensityMatrix::from_pure(PureState::normalized({Complex(0.3, 0.1), Complex(-0.2, 0.7), 0.4, Complex(0, -0.5)}))};
    for (const auto& rho : states) {
        for (int k = 0; k < 37; ++k) {
            const double phi = 2 * kPi * k / 37;
            for (bool ff : {true, false}) {
                const auto d = outcome_distribution_exact(rho, phi, ff);
                const auto oracle = brute_force_distribution(rho, phi, ff);
                double total = 0.0;
                for (std::size_t o = 0; o < 4; ++o) {
                    EXPECT_NEAR(d.probabilities[o], oracle[o], 1e-12);
                    EXPECT_GE(d.probabilities[o], -1e-15);
                    total += d.probabilities[o];
                }
                EXPECT_NEAR(total, 1.0, 1e-10);
            }
        }
    }
}

TEST(OutcomeDistribution, Periodic) {
    for (int k = 0; k < 16; ++k) {
        const double phi = 0.37 * k;
        const auto a = outcome_distribution_exact(optimal_density(), phi, true);
        const auto b = outcome_distribution_exact(optimal_density(), phi + 2 * kPi, true);
        for (std::size_t o = 0; o < 4; ++o) EXPECT_NEAR(a.probabilities[o], b.probabilities[o], 1e-12);
    }
}

TEST(OutcomeDistribution, RejectsSingleQubit) {
    EXPECT_THROW(outcome_distribution_exact(DensityMatrix::maximally_mixed(1), 0.0, true), std::invalid_argument);
}

TEST(SingleShot, DeterministicForXEigenstate) {
    const auto rho = x_product_dd();
    for (double u0 : {0.0, 0.5, 0.999}) {
        for (double u1 : {0.0, 0.3, 0.999}) {
            const std::array<double, 2> draws{u0, u1};
            const auto shot = run_single_shot(rho, 0.0, true, draws);
            EXPECT_EQ(shot.bits, (std::vector<int>{0, 0}));
            EXPECT_DOUBLE_EQ(shot.estimate, 0.0);
        }
    }
}

TEST(SingleShot, EstimatesLieOnLattice) {
    CounterStream rng(4, 0);
    for (int t = 0; t < 200; ++t) {
        const std::array<double, 2> draws{rng.uniform(), rng.uniform()};
        const auto shot = run_single_shot(optimal_density(), 1.3, true, draws);
        const double q = shot.estimate / (kPi / 2);
        EXPECT_NEAR(q, std::round(q), 1e-12);
        EXPECT_GE(shot.estimate, 0.0);
        EXPECT_LT(shot.estimate, 2 * kPi);
    }
}

TEST(SingleShot, FrequenciesMatchExactWithinFiveSigma) {
    const auto rho = optimal_density().mixed_with(DensityMatrix::maximally_mixed(2), 0.2);
    for (double phi : {0.0, 1.0, 2.5}) {
        const auto exact = outcome_distribution_exact(rho, phi, true);
        std::array<double, 4> freq{};
        const int n = 100000;
        for (int t = 0; t < n; ++t) {
            CounterStream s(99, 0, static_cast<std::uint64_t>(t));
            const std::array<double, 2> draws{s.uniform(), s.uniform()};
            freq[run_single_shot(rho, phi, true, draws).pattern] += 1.0 / n;
        }
        double total = 0.0;
        for (std::size_t o = 0; o < 4; ++o) {
            EXPECT_NEAR(freq[o], exact.probabilities[o], five_sigma(exact.probabilities[o], n));
            total += freq[o];
        }
        EXPECT_NEAR(total, 1.0, 1e-9);
    }
}

TEST(SingleShot, MillionShotsAtZero) {
    const ShotSampler sampler(optimal_density(), 0.0, true);
    const std::int64_t n = 1000000;
    std::int64_t dd = 0;
    for (std::int64_t t = 0; t < n; ++t) {
        CounterStream s(1, 0, static_cast<std::uint64_t>(t));
        if (sampler.sample(s) == 0) ++dd;
    }
    EXPECT_NEAR(static_cast<double>(dd) / n, 0.9472, 3e-4);
}

TEST(ConditionalHolevo, Examples) {
    OutcomeDistribution point{kPi / 2, 2, {0, 1, 0, 0}};
    EXPECT_NEAR(conditional_holevo(point), 0.0, 1e-12);
    OutcomeDistribution uniform{0.3, 2, {0.25, 0.25, 0.25, 0.25}};
    EXPECT_TRUE(is_infinite_variance(conditional_holevo(uniform)));
    const auto d = outcome_distribution_exact(optimal_density(), 0.0, true);
    EXPECT_NEAR(conditional_holevo(d), 1.0 / std::pow(0.9472135954999579, 2) - 1.0, 1e-12);
    EXPECT_NEAR(conditional_holevo(d), 0.1146, 5e-5);
}

TEST(TruePhase, Examples) {
    const std::array<std::int64_t, 4> dd{100, 0, 0, 0};
    EXPECT_NEAR(true_phase_from_record(dd), 0.0, 1e-12);
    const std::array<std::int64_t, 4> bisector{50, 50, 0, 0};
    EXPECT_NEAR(true_phase_from_record(bisector), kPi / 4, 1e-12);
    const std::array<std::int64_t, 4> none{0, 0, 0, 0};
    EXPECT_THROW(true_phase_from_record(none), std::invalid_argument);
}

TEST(TruePhase, UnbiasedOnQuarterLattice) {
    for (int k = 0; k < 8; ++k) {
        const double phi = k * kPi / 4;
        const auto d = outcome_distribution_exact(optimal_density(), phi, true);
        Complex z = 0.0;
        for (std::size_t o = 0; o < 4; ++o) z += d.probabilities[o] * std::polar(1.0, estimate_for_pattern(o, 2));
        EXPECT_NEAR(std::remainder(std::arg(z) - phi, 2 * kPi), 0.0, 1e-12);
    }
}

TEST(TruePhase, MillionShotsAtOneRadian) {
    // The arg-of-mean reconstruction is biased between lattice points; its
    // large-sample limit is arg sum_o P(o|phi) e^{i phi_est(o)}.
    const double phi = 1.0;
    const auto exact = outcome_distribution_exact(optimal_density(), phi, true);
    Complex z = 0.0;
    for (std::size_t o = 0; o < 4; ++o) z += exact.probabilities[o] * std::polar(1.0, estimate_for_pattern(o, 2));
    const double limit = wrap_phase(std::arg(z));
    EXPECT_NEAR(limit, 1.1445116636417574, 1e-9);

    const ShotSampler sampler(optimal_density(), phi, true);
    std::array<std::int64_t, 4> counts{};
    for (std::int64_t t = 0; t < 1000000; ++t) {
        CounterStream s(12, 0, static_cast<std::uint64_t>(t));
        ++counts[sampler.sample(s)];
    }
    EXPECT_NEAR(true_phase_from_record(counts), limit, 0.01);
}

TEST(Sweep, ExactHeisenbergSaturation) {
    const auto sweep = phase_sweep(optimal_density(), SweepOptions{});
    EXPECT_NEAR(sweep.unconditional_variance, kHL3, 1e-10);
    EXPECT_NEAR(unconditional_holevo(sweep), kHL3, 1e-10);
    EXPECT_NEAR(sweep.recombined_variance, sweep.unconditional_variance, 1e-9);
    for (double v : sweep.conditional_variance) EXPECT_GE(v, -1e-10);
}

TEST(Sweep, PhaseOffsetInvariance) {
    const std::vector<DensityMatrix> states = {optimal_density(),
                                               optimal_density().mixed_with(DensityMatrix::maximally_mixed(2), 0.4)};
    for (const auto& rho : states) {
        SweepOptions o;
        const double base = phase_sweep(rho, o).unconditional_variance;
        for (double delta : {0.1, 0.77, 2.0, -1.3}) {
            o.grid_offset = delta;
            EXPECT_NEAR(phase_sweep(rho, o).unconditional_variance, base, 1e-10);
        }
        o.grid_offset = 0.0;
        o.grid_size = 8;
        EXPECT_NEAR(phase_sweep(rho, o).unconditional_variance, base, 1e-10);
    }
}

TEST(Sweep, RejectsCoarseGrid) {
    SweepOptions o;
    o.grid_size = 7;
    EXPECT_THROW(phase_sweep(optimal_density(), o), std::invalid_argument);
}

TEST(Sweep, MaximallyMixedIsInfinite) {
    const auto sweep = phase_sweep(DensityMatrix::maximally_mixed(2), SweepOptions{});
    EXPECT_TRUE(is_infinite_variance(sweep.unconditional_variance));
}

TEST(Sweep, FeedforwardOffGolden) {
    SweepOptions o;
    o.feedforward = false;
    const auto sweep = phase_sweep(optimal_density(), o);
    EXPECT_GT(sweep.unconditional_variance, 0.5279);
    // Independent numpy evaluation of the same chain.
    EXPECT_NEAR(sweep.unconditional_variance, 5.044091050000153, 1e-9);
}

TEST(Sweep, Eq8RecombinationArbitraryStates) {
    const DensityMatrix rho =
        DensityMatrix::from_pure(PureState::normalized({Complex(0.3, 0.1), Complex(-0.2, 0.7), 0.4, Complex(0, -0.5)}));
    for (bool ff : {true, false}) {
        SweepOptions o;
        o.feedforward = ff;
        const auto sweep = phase_sweep(rho, o);
        EXPECT_NEAR(sweep.recombined_variance, sweep.unconditional_variance, 1e-9);
    }
}

TEST(Sweep, MonotoneDegradationUnderDepolarizing) {
    double previous = -1.0;
    for (int k = 0; k <= 10; ++k) {
        const double lambda = k / 10.0;
        const auto rho = optimal_density().mixed_with(DensityMatrix::maximally_mixed(2), lambda);
        const double v = phase_sweep(rho, SweepOptions{}).unconditional_variance;
        EXPECT_GE(v, previous);
        previous = v;
    }
    EXPECT_TRUE(is_infinite_variance(previous));
}

TEST(Sweep, MonteCarloAgreesWithExact) {
    SweepOptions o;
    o.grid_size = 16;
    o.mode = SweepMode::monte_carlo;
    o.trials_per_phase = 100000;
    o.seed = 2024;
    const auto mc = phase_sweep(optimal_density(), o);
    o.mode = SweepMode::exact;
    const auto exact = phase_sweep(optimal_density(), o);
    for (std::size_t i = 0; i < mc.phases.size(); ++i) {
        for (std::size_t k = 0; k < 4; ++k) {
            const double p = exact.probabilities[i][k];
            EXPECT_NEAR(mc.probabilities[i][k], p, five_sigma(p, 1e5));
        }
    }
    EXPECT_NEAR(mc.unconditional_variance, exact.unconditional_variance, 0.01);
    EXPECT_NEAR(mc.recombined_variance, mc.unconditional_variance, 1e-9);
}

TEST(Sweep, DeterministicAcrossWorkerCounts) {
    SweepOptions o;
    o.mode = SweepMode::monte_carlo;
    o.trials_per_phase = 2000;
    o.seed = 77;
    o.workers = 1;
    const auto a = phase_sweep(optimal_density(), o);
    for (int w : {2, 3, 8}) {
        o.workers = w;
        const auto b = phase_sweep(optimal_density(), o);
        EXPECT_EQ(a.counts, b.counts);
        EXPECT_EQ(a.unconditional_variance, b.unconditional_variance);
    }
    o.seed = 78;
    EXPECT_NE(phase_sweep(optimal_density(), o).counts, a.counts);
}

namespace {

std::vector<PhaseRecord> sampled_records(std::int64_t n, std::uint64_t seed) {
    SweepOptions o;
    o.grid_size = 8;
    o.mode = SweepMode::monte_carlo;
    o.trials_per_phase = n;
    o.seed = seed;
    const auto sweep = phase_sweep(optimal_density(), o);
    std::vector<PhaseRecord> records;
    for (std::size_t i = 0; i < sweep.phases.size(); ++i) records.push_back({sweep.phases[i], sweep.counts[i]});
    return records;
}

}  // namespace

TEST(Bootstrap, PointDistributionIsDegenerate) {
    std::vector<PhaseRecord> records;
    for (int k = 0; k < 4; ++k) {
        std::vector<std::int64_t> counts(4, 0);
        counts[static_cast<std::size_t>(k)] = 50;
        records.push_back({k * kPi / 2, counts});
    }
    const auto ci = bootstrap_variance_ci(records, 200, 1);
    EXPECT_NEAR(ci.low, 0.0, 1e-12);
    EXPECT_NEAR(ci.high, 0.0, 1e-12);
}

TEST(Bootstrap, DeterministicAndValidated) {
    const auto records = sampled_records(1000, 3);
    const auto a = bootstrap_variance_ci(records, 200, 9);
    const auto b = bootstrap_variance_ci(records, 200, 9);
    EXPECT_EQ(a.low, b.low);
    EXPECT_EQ(a.high, b.high);
    EXPECT_LE(a.low, a.point);
    EXPECT_GE(a.high, a.point);
    EXPECT_THROW(bootstrap_variance_ci(records, 99, 9), std::invalid_argument);
    std::vector<PhaseRecord> tiny{{0.0, {1, 0, 0, 0}}};
    EXPECT_THROW(bootstrap_variance_ci(tiny, 100, 9), std::invalid_argument);
}

TEST(Bootstrap, CoverageCalibration) {
    int covered = 0;
    for (std::uint64_t rep = 0; rep < 100; ++rep) {
        const auto ci = bootstrap_variance_ci(sampled_records(100000, 1000 + rep), 200, rep);
        if (ci.low <= kHL3 && kHL3 <= ci.high) ++covered;
    }
    EXPECT_GE(covered, 90);
}

TEST(Bootstrap, WidthScalesAsInverseRootN) {
    std::vector<double> widths;
    for (std::int64_t n : {1000, 10000, 100000}) {
        const auto ci = bootstrap_variance_ci(sampled_records(n, 55), 400, 5);
        widths.push_back(ci.high - ci.low);
    }
    for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
        const double ratio = widths[i] / widths[i + 1];
        EXPECT_GT(ratio, std::sqrt(10.0) / 2);
        EXPECT_LT(ratio, std::sqrt(10.0) * 2);
    }
}
