#include "hlphase/hlphase.h"

#include <cmath>
#include <cstring>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "hlphase/density_io.hpp"
#include "hlphase/error.hpp"
#include "hlphase/holevo.hpp"
#include "hlphase/hpea.hpp"
#include "hlphase/optics.hpp"
#include "hlphase/rng.hpp"
#include "hlphase/scheme.hpp"
#include "hlphase/snl.hpp"

struct hlp_density {
    hlphase::DensityMatrix rho;
};

struct hlp_sweep {
    bool monte_carlo = false;
    std::size_t outcomes = 0;
    std::vector<double> phases;
    std::vector<double> conditional_variance;
    std::vector<double> sharpness;
    std::vector<std::vector<double>> probabilities;
    std::vector<std::vector<std::int64_t>> counts;
    double unconditional = 0.0;
    double recombined = 0.0;
};

struct hlp_optimization {
    hlphase::scheme::OptimizationResult result;
};

struct hlp_table {
    std::vector<hlphase::scheme::TableRow> rows;
};

namespace {

thread_local std::string g_error;
thread_local std::string g_invariant;

void clear_error() {
    g_error.clear();
    g_invariant.clear();
}

hlp_status fail(hlp_status status, const std::string& message, const std::string& invariant = "") {
    g_error = message;
    g_invariant = invariant;
    return status;
}

template <class F>
hlp_status guarded(F&& f) {
    clear_error();
    try {
        return f();
    } catch (const hlphase::ValidationError& e) {
        return fail(HLP_ERR_VALIDATION, e.what(), e.invariant());
    } catch (const std::out_of_range& e) {
        return fail(HLP_ERR_RANGE, e.what());
    } catch (const std::invalid_argument& e) {
        return fail(HLP_ERR_VALIDATION, e.what(), "argument");
    } catch (const std::runtime_error& e) {
        return fail(HLP_ERR_IO, e.what());
    } catch (const std::exception& e) {
        return fail(HLP_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(HLP_ERR_INTERNAL, "unknown error");
    }
}

void require(const void* p, const char* what) {
    if (p == nullptr) throw std::invalid_argument(std::string(what) + " must not be null");
}

hlphase::scheme::StateClass to_class(hlp_state_class c) {
    switch (c) {
        case HLP_SEPARABLE: return hlphase::scheme::StateClass::separable;
        case HLP_SYMMETRIC: return hlphase::scheme::StateClass::symmetric;
        case HLP_GENERAL: return hlphase::scheme::StateClass::general;
    }
    throw std::invalid_argument("unknown state class");
}

hlphase::scheme::OptimizerOptions to_options(const hlp_optimizer_options* o) {
    const hlp_optimizer_options d = o ? *o : hlp_optimizer_default_options();
    hlphase::scheme::OptimizerOptions out;
    out.restarts = d.restarts;
    out.seed = d.seed;
    out.workers = d.workers;
    out.real_amplitudes = d.real_amplitudes != 0;
    out.max_evaluations = d.max_evaluations;
    return out;
}

hlphase::scheme::SchemeSpec to_spec(const int* passes, std::size_t photons, hlp_state_class c, int adaptive) {
    require(passes, "passes");
    return {std::vector<int>(passes, passes + photons), to_class(c), adaptive != 0};
}

hlp_status finish_optimization(hlphase::scheme::OptimizationResult r, hlp_optimization** out) {
    const bool converged = r.restarts_converged > 0;
    *out = new hlp_optimization{std::move(r)};
    if (!converged) return fail(HLP_ERR_NONCONVERGENCE, "no optimizer restart met the convergence criteria");
    return HLP_OK;
}

}  // namespace

extern "C" {

const char* hlp_version(void) { return HLPHASE_VERSION; }
const char* hlp_last_error(void) { return g_error.c_str(); }
const char* hlp_last_invariant(void) { return g_invariant.c_str(); }

int hlp_is_infinite(double variance) { return std::isinf(variance) ? 1 : 0; }

double hlp_heisenberg_limit(int resources) {
    try {
        return hlphase::hpea::heisenberg_limit(resources);
    } catch (...) {
        return std::nan("");
    }
}

hlp_status hlp_density_from_json(const char* text, hlp_density** out) {
    return guarded([&] {
        require(text, "text");
        require(out, "out");
        *out = new hlp_density{hlphase::parse_density_json(text)};
        return HLP_OK;
    });
}

hlp_status hlp_density_load(const char* path, hlp_density** out) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        *out = new hlp_density{hlphase::load_density_json(path)};
        return HLP_OK;
    });
}

hlp_status hlp_density_optimal(hlp_density** out) {
    return guarded([&] {
        require(out, "out");
        *out = new hlp_density{hlphase::hpea::optimal_density()};
        return HLP_OK;
    });
}

hlp_status hlp_density_maximally_mixed(int num_qubits, hlp_density** out) {
    return guarded([&] {
        require(out, "out");
        *out = new hlp_density{hlphase::DensityMatrix::maximally_mixed(num_qubits)};
        return HLP_OK;
    });
}

hlp_status hlp_density_from_entries(int num_qubits, const double* real, const double* imag, hlp_density** out) {
    return guarded([&] {
        require(real, "real");
        require(imag, "imag");
        require(out, "out");
        if (num_qubits < 1 || num_qubits > hlphase::kMaxQubits) {
            throw hlphase::ValidationError("dimension", "unsupported qubit count");
        }
        const Eigen::Index dim = Eigen::Index{1} << num_qubits;
        hlphase::CMatrix m(dim, dim);
        for (Eigen::Index r = 0; r < dim; ++r) {
            for (Eigen::Index c = 0; c < dim; ++c) m(r, c) = {real[r * dim + c], imag[r * dim + c]};
        }
        *out = new hlp_density{hlphase::DensityMatrix::from_matrix(std::move(m))};
        return HLP_OK;
    });
}

hlp_status hlp_density_mix(const hlp_density* rho, const hlp_density* other, double weight, hlp_density** out) {
    return guarded([&] {
        require(rho, "rho");
        require(other, "other");
        require(out, "out");
        *out = new hlp_density{rho->rho.mixed_with(other->rho, weight)};
        return HLP_OK;
    });
}

void hlp_density_free(hlp_density* rho) { delete rho; }

int hlp_density_num_qubits(const hlp_density* rho) { return rho ? rho->rho.num_qubits() : 0; }

hlp_status hlp_density_fidelity_optimal(const hlp_density* rho, double* out) {
    return guarded([&] {
        require(rho, "rho");
        require(out, "out");
        if (rho->rho.num_qubits() != 2) throw hlphase::ValidationError("dimension", "fidelity needs a two-qubit state");
        *out = hlphase::fidelity(rho->rho, hlphase::hpea::optimal_state());
        return HLP_OK;
    });
}

hlp_status hlp_density_purity(const hlp_density* rho, double* out) {
    return guarded([&] {
        require(rho, "rho");
        require(out, "out");
        *out = hlphase::purity(rho->rho);
        return HLP_OK;
    });
}

hlp_sweep_options hlp_sweep_default_options(void) {
    const hlphase::hpea::SweepOptions d;
    return {d.grid_size, d.grid_offset, d.feedforward ? 1 : 0, HLP_MODE_EXACT, d.trials_per_phase, d.seed, d.workers};
}

hlp_status hlp_hpea_sweep(const hlp_density* rho, const hlp_sweep_options* options, hlp_sweep** out) {
    return guarded([&] {
        require(rho, "rho");
        require(out, "out");
        if (rho->rho.num_qubits() != 2) throw hlphase::ValidationError("dimension", "the protocol needs a two-qubit state");
        const hlp_sweep_options o = options ? *options : hlp_sweep_default_options();
        hlphase::hpea::SweepOptions so;
        so.grid_size = o.grid_size;
        so.grid_offset = o.grid_offset;
        so.feedforward = o.feedforward != 0;
        so.mode = o.mode == HLP_MODE_MC ? hlphase::hpea::SweepMode::monte_carlo : hlphase::hpea::SweepMode::exact;
        so.trials_per_phase = o.trials_per_phase;
        so.seed = o.seed;
        so.workers = o.workers;
        auto r = hlphase::hpea::phase_sweep(rho->rho, so);
        auto s = std::make_unique<hlp_sweep>();
        s->monte_carlo = so.mode == hlphase::hpea::SweepMode::monte_carlo;
        s->outcomes = std::size_t{1} << r.num_photons;
        s->phases = std::move(r.phases);
        s->conditional_variance = std::move(r.conditional_variance);
        s->sharpness = std::move(r.sharpness);
        s->probabilities = std::move(r.probabilities);
        s->counts = std::move(r.counts);
        s->unconditional = r.unconditional_variance;
        s->recombined = r.recombined_variance;
        *out = s.release();
        return HLP_OK;
    });
}

void hlp_sweep_free(hlp_sweep* sweep) { delete sweep; }
size_t hlp_sweep_size(const hlp_sweep* s) { return s ? s->phases.size() : 0; }
size_t hlp_sweep_outcomes(const hlp_sweep* s) { return s ? s->outcomes : 0; }
double hlp_sweep_phase(const hlp_sweep* s, size_t i) { return s->phases.at(i); }
double hlp_sweep_conditional_variance(const hlp_sweep* s, size_t i) { return s->conditional_variance.at(i); }
double hlp_sweep_sharpness(const hlp_sweep* s, size_t i) { return s->sharpness.at(i); }

double hlp_sweep_probability(const hlp_sweep* s, size_t i, size_t outcome) {
    if (i >= s->probabilities.size() || outcome >= s->probabilities[i].size()) return std::nan("");
    return s->probabilities[i][outcome];
}

double hlp_sweep_unconditional_variance(const hlp_sweep* s) { return s->unconditional; }
double hlp_sweep_recombined_variance(const hlp_sweep* s) { return s->recombined; }

const char* hlp_outcome_label(size_t pattern) {
    static const char* const labels[] = {"dd", "ad", "da", "aa"};
    return pattern < 4 ? labels[pattern] : "";
}

double hlp_estimate_for_pattern(size_t pattern) { return hlphase::hpea::estimate_for_pattern(pattern, 2); }

hlp_status hlp_hpea_distribution(const hlp_density* rho, double phi, int feedforward, double out[4]) {
    return guarded([&] {
        require(rho, "rho");
        require(out, "out");
        const auto d = hlphase::hpea::outcome_distribution_exact(rho->rho, phi, feedforward != 0);
        if (d.probabilities.size() != 4) throw hlphase::ValidationError("dimension", "the protocol needs a two-qubit state");
        for (std::size_t k = 0; k < 4; ++k) out[k] = d.probabilities[k];
        return HLP_OK;
    });
}

hlp_status hlp_hpea_shots(const hlp_density* rho, double phi, int feedforward, int64_t shots, uint64_t seed,
                          int32_t* patterns) {
    return guarded([&] {
        require(rho, "rho");
        require(patterns, "patterns");
        if (shots < 1) throw std::invalid_argument("shots must be >= 1");
        const hlphase::hpea::ShotSampler sampler(rho->rho, phi, feedforward != 0);
        for (std::int64_t t = 0; t < shots; ++t) {
            hlphase::CounterStream stream(seed, 0, static_cast<std::uint64_t>(t));
            patterns[t] = static_cast<int32_t>(sampler.sample(stream));
        }
        return HLP_OK;
    });
}

hlp_status hlp_true_phase_from_counts(const int64_t counts[4], double* out) {
    return guarded([&] {
        require(counts, "counts");
        require(out, "out");
        *out = hlphase::hpea::true_phase_from_record(std::span<const std::int64_t>(counts, 4));
        return HLP_OK;
    });
}

hlp_status hlp_conditional_variance_from_counts(const int64_t counts[4], double true_phase, double* out) {
    return guarded([&] {
        require(counts, "counts");
        require(out, "out");
        *out = hlphase::hpea::conditional_holevo(std::span<const std::int64_t>(counts, 4), true_phase);
        return HLP_OK;
    });
}

hlp_status hlp_sweep_bootstrap(const hlp_sweep* sweep, int resamples, uint64_t seed, double level, double* low,
                               double* high, double* point) {
    return guarded([&] {
        require(sweep, "sweep");
        require(low, "low");
        require(high, "high");
        require(point, "point");
        if (!sweep->monte_carlo || sweep->counts.empty()) {
            throw std::invalid_argument("bootstrap needs a Monte-Carlo sweep");
        }
        std::vector<hlphase::hpea::PhaseRecord> records;
        for (std::size_t i = 0; i < sweep->phases.size(); ++i) records.push_back({sweep->phases[i], sweep->counts[i]});
        const auto ci = hlphase::hpea::bootstrap_variance_ci(records, resamples, seed, level);
        *low = ci.low;
        *high = ci.high;
        *point = ci.point;
        return HLP_OK;
    });
}

hlp_snl_options hlp_snl_default_options(void) {
    const hlphase::snl::SnlConfig d;
    return {d.probes, HLP_MODE_EXACT, d.trials, d.seed, d.grid_size, d.grid_offset, d.workers};
}

hlp_status hlp_snl_exact_variance(int probes, double* out) {
    return guarded([&] {
        require(out, "out");
        *out = hlphase::snl::exact_variance(probes);
        return HLP_OK;
    });
}

hlp_status hlp_snl_sweep(const hlp_snl_options* options, hlp_sweep** out) {
    return guarded([&] {
        require(out, "out");
        const hlp_snl_options o = options ? *options : hlp_snl_default_options();
        hlphase::snl::SnlConfig c;
        c.probes = o.probes;
        c.mode = o.mode == HLP_MODE_MC ? hlphase::hpea::SweepMode::monte_carlo : hlphase::hpea::SweepMode::exact;
        c.trials = o.trials;
        c.seed = o.seed;
        c.grid_size = o.grid_size;
        c.grid_offset = o.grid_offset;
        c.workers = o.workers;
        auto r = hlphase::snl::simulate(c);
        auto s = std::make_unique<hlp_sweep>();
        s->monte_carlo = c.mode == hlphase::hpea::SweepMode::monte_carlo;
        s->outcomes = r.outcome_count;
        s->phases = std::move(r.phases);
        s->conditional_variance = std::move(r.conditional_variance);
        s->sharpness = std::move(r.sharpness);
        s->unconditional = r.unconditional_variance;
        s->recombined = r.recombined_variance;
        *out = s.release();
        return HLP_OK;
    });
}

hlp_optimizer_options hlp_optimizer_default_options(void) {
    const hlphase::scheme::OptimizerOptions d;
    return {d.restarts, d.seed, d.workers, d.real_amplitudes ? 1 : 0, d.max_evaluations};
}

hlp_status hlp_optimize(const int* passes, size_t photons, hlp_state_class state_class, int adaptive,
                        const hlp_optimizer_options* options, hlp_optimization** out) {
    return guarded([&] {
        require(out, "out");
        const auto spec = to_spec(passes, photons, state_class, adaptive);
        return finish_optimization(hlphase::scheme::optimize_scheme(spec, to_options(options)), out);
    });
}

hlp_status hlp_optimize_allocations(hlp_state_class state_class, int adaptive, int resources,
                                    const hlp_optimizer_options* options, hlp_optimization** out) {
    return guarded([&] {
        require(out, "out");
        return finish_optimization(
            hlphase::scheme::optimize_over_allocations(to_class(state_class), adaptive != 0, resources, to_options(options)),
            out);
    });
}

hlp_status hlp_evaluate_scheme(const int* passes, size_t photons, hlp_state_class state_class, int adaptive,
                               const double* amps_real, const double* amps_imag, const double* thetas,
                               size_t theta_count, double* out) {
    return guarded([&] {
        require(amps_real, "amps_real");
        require(amps_imag, "amps_imag");
        require(out, "out");
        if (theta_count > 0) require(thetas, "thetas");
        const auto spec = to_spec(passes, photons, state_class, adaptive);
        hlphase::scheme::validate(spec);
        const std::size_t dim = std::size_t{1} << photons;
        std::vector<hlphase::Complex> amps(dim);
        for (std::size_t k = 0; k < dim; ++k) amps[k] = {amps_real[k], amps_imag[k]};
        *out = hlphase::scheme::evaluate_scheme(spec, amps, std::span<const double>(thetas, theta_count));
        return HLP_OK;
    });
}

void hlp_optimization_free(hlp_optimization* result) { delete result; }
double hlp_optimization_variance(const hlp_optimization* r) { return r->result.best_variance; }
size_t hlp_optimization_photons(const hlp_optimization* r) { return r->result.spec.passes.size(); }
int hlp_optimization_passes(const hlp_optimization* r, size_t photon) { return r->result.spec.passes.at(photon); }
int hlp_optimization_restarts(const hlp_optimization* r) { return r->result.restarts; }
int hlp_optimization_converged(const hlp_optimization* r) { return r->result.restarts_converged; }
int64_t hlp_optimization_evaluations(const hlp_optimization* r) { return r->result.evaluations; }
size_t hlp_optimization_amplitude_count(const hlp_optimization* r) { return r->result.best_params.amplitudes.size(); }

void hlp_optimization_amplitude(const hlp_optimization* r, size_t i, double* re, double* im) {
    const auto a = r->result.best_params.amplitudes.at(i);
    if (re) *re = a.real();
    if (im) *im = a.imag();
}

size_t hlp_optimization_theta_count(const hlp_optimization* r) { return r->result.best_params.theta.size(); }
double hlp_optimization_theta(const hlp_optimization* r, size_t i) { return r->result.best_params.theta.at(i); }

hlp_status hlp_table2(const hlp_optimizer_options* options, hlp_table** out) {
    return guarded([&] {
        require(out, "out");
        hlphase::scheme::TableOptions t;
        t.optimizer = to_options(options);
        *out = new hlp_table{hlphase::scheme::table2_report(t)};
        return HLP_OK;
    });
}

void hlp_table_free(hlp_table* table) { delete table; }
size_t hlp_table_rows(const hlp_table* t) { return t ? t->rows.size() : 0; }

int hlp_table_flags(const hlp_table* t, size_t row) {
    const auto& r = t->rows.at(row);
    return (r.symmetric_entanglement ? 1 : 0) | (r.multipass ? 2 : 0) | (r.adaptive ? 4 : 0) | (r.experimental ? 8 : 0);
}

const char* hlp_table_scheme(const hlp_table* t, size_t row) { return t->rows.at(row).scheme.c_str(); }

int hlp_table_computed(const hlp_table* t, size_t row, double* out) {
    const auto& r = t->rows.at(row);
    if (!r.computed) return 0;
    if (out) *out = *r.computed;
    return 1;
}

double hlp_table_reference(const hlp_table* t, size_t row) { return t->rows.at(row).reference; }

int hlp_table_precise_reference(const hlp_table* t, size_t row, double* out) {
    const auto& r = t->rows.at(row);
    if (!r.precise_reference) return 0;
    if (out) *out = *r.precise_reference;
    return 1;
}

hlp_status hlp_optics_calibration(int points, hlp_calibration_row* rows, size_t capacity) {
    return guarded([&] {
        require(rows, "rows");
        const auto table = hlphase::optics::calibration_table(points);
        if (capacity < table.size()) throw std::invalid_argument("calibration buffer too small");
        for (std::size_t i = 0; i < table.size(); ++i) {
            std::memset(rows[i].stage, 0, sizeof rows[i].stage);
            std::strncpy(rows[i].stage, table[i].stage.c_str(), sizeof rows[i].stage - 1);
            rows[i].logical_phase = table[i].logical_phase;
            rows[i].hwp_angle = table[i].hwp_angle;
            rows[i].extracted_phase = table[i].extracted_phase;
            rows[i].error = table[i].error;
        }
        return HLP_OK;
    });
}

hlp_status hlp_optics_equivalence(int phi_points, int theta_points, double* max_difference) {
    return guarded([&] {
        require(max_difference, "max_difference");
        if (phi_points < 1 || theta_points < 1) throw std::invalid_argument("grid sizes must be positive");
        double worst = 0.0;
        for (double phi : hlphase::uniform_phase_grid(phi_points)) {
            for (double theta : hlphase::uniform_phase_grid(theta_points)) {
                for (int passes = 1; passes <= 2; ++passes) {
                    const double d = std::abs(hlphase::optics::optics_probability_d(passes, phi, theta) -
                                              hlphase::optics::logical_probability_d(passes, phi, theta));
                    worst = std::max(worst, d);
                }
            }
        }
        *max_difference = worst;
        return HLP_OK;
    });
}

hlp_status hlp_optics_double_pass(double phi, double* relative_phase) {
    return guarded([&] {
        require(relative_phase, "relative_phase");
        *relative_phase = hlphase::optics::verify_double_pass(phi);
        return HLP_OK;
    });
}

}  // extern "C"
