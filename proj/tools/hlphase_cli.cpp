// Command-line front end. Talks to the library only through hlphase.h.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hlphase/hlphase.h"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitValidation = 2;
constexpr int kExitNonConvergence = 3;

const char* const kNotReproduced = "published value, not reproduced";

struct CliError : std::runtime_error {
    int code;
    CliError(int c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

int exit_code_for(hlp_status s) {
    switch (s) {
        case HLP_OK: return kExitOk;
        case HLP_ERR_NONCONVERGENCE: return kExitNonConvergence;
        case HLP_ERR_VALIDATION:
        case HLP_ERR_RANGE:
        case HLP_ERR_IO: return kExitValidation;
        default: return kExitInternal;
    }
}

void check(hlp_status s) {
    if (s == HLP_OK) return;
    std::string msg = hlp_last_error();
    const std::string inv = hlp_last_invariant();
    if (!inv.empty() && inv != "argument") msg = "invariant \"" + inv + "\" violated: " + msg;
    throw CliError(exit_code_for(s), msg);
}

std::string num(double x) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (std::isnan(x)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// JSON has no infinity; infinite variances are written as null.
ordered_json jnum(double x) { return std::isfinite(x) ? ordered_json(x) : ordered_json(nullptr); }

template <class T, void (*Free)(T*)>
struct Handle {
    T* p = nullptr;
    Handle() = default;
    Handle(const Handle&) = delete;
    Handle& operator=(const Handle&) = delete;
    ~Handle() { Free(p); }
    T** out() { return &p; }
};

using Density = Handle<hlp_density, hlp_density_free>;
using Sweep = Handle<hlp_sweep, hlp_sweep_free>;
using Optimization = Handle<hlp_optimization, hlp_optimization_free>;
using Table = Handle<hlp_table, hlp_table_free>;

std::uint64_t default_seed() {
    const char* env = std::getenv("HLPHASE_SEED");
    if (env == nullptr || *env == '\0') return 0;
    try {
        std::size_t used = 0;
        const auto v = std::stoull(env, &used);
        if (used != std::strlen(env)) throw std::invalid_argument(env);
        return v;
    } catch (const std::exception&) {
        throw CliError(kExitValidation, std::string("HLPHASE_SEED is not an unsigned integer: ") + env);
    }
}

struct Run {
    std::string command;
    std::vector<std::string> arguments;  // as given, without --output-dir
    fs::path out_dir = ".";
    std::uint64_t seed = 0;
    ordered_json parameters = ordered_json::object();
    std::vector<std::string> outputs;

    fs::path path_for(const std::string& suffix) const { return out_dir / (command + suffix); }

    void write(const std::string& suffix, const std::string& content) {
        fs::create_directories(out_dir);
        const fs::path p = path_for(suffix);
        std::ofstream f(p, std::ios::binary);
        if (!f) throw CliError(kExitValidation, "cannot write " + p.string());
        f << content;
        outputs.push_back(p.string());
    }

    void write_json(const std::string& suffix, const ordered_json& j) { write(suffix, j.dump(2) + "\n"); }

    void write_manifest() {
        ordered_json m;
        m["schema"] = "hlphase/manifest/v1";
        m["command"] = command;
        m["parameters"] = parameters;
        m["arguments"] = arguments;
        m["output_paths"] = outputs;
        m["seed"] = seed;
        m["tool_version"] = hlp_version();
        fs::create_directories(out_dir);
        std::ofstream f(path_for(".manifest.json"), std::ios::binary);
        f << m.dump(2) << "\n";
    }
};

void load_state(Density& rho, const std::string& path) {
    if (path.empty()) {
        check(hlp_density_optimal(rho.out()));
    } else {
        check(hlp_density_load(path.c_str(), rho.out()));
    }
}

hlp_mode parse_mode(const std::string& m) { return m == "mc" ? HLP_MODE_MC : HLP_MODE_EXACT; }

// ---- hpea-sweep ----

struct SweepArgs {
    int grid = 64;
    double offset = 0.0;
    std::string mode = "exact";
    std::int64_t trials = 100000;
    std::string state;
    bool no_feedforward = false;
    int bootstrap = 0;
    double level = 0.95;
};

void cmd_hpea_sweep(Run& run, const SweepArgs& a, int workers) {
    Density rho;
    load_state(rho, a.state);
    hlp_sweep_options o = hlp_sweep_default_options();
    o.grid_size = a.grid;
    o.grid_offset = a.offset;
    o.feedforward = a.no_feedforward ? 0 : 1;
    o.mode = parse_mode(a.mode);
    o.trials_per_phase = a.trials;
    o.seed = run.seed;
    o.workers = workers;
    Sweep sweep;
    check(hlp_hpea_sweep(rho.p, &o, sweep.out()));

    std::ostringstream csv;
    csv << "phi,V_cond,mu,P_dd,P_ad,P_da,P_aa\n";
    for (std::size_t i = 0; i < hlp_sweep_size(sweep.p); ++i) {
        csv << num(hlp_sweep_phase(sweep.p, i)) << ',' << num(hlp_sweep_conditional_variance(sweep.p, i)) << ','
            << num(hlp_sweep_sharpness(sweep.p, i));
        for (std::size_t k = 0; k < 4; ++k) csv << ',' << num(hlp_sweep_probability(sweep.p, i, k));
        csv << '\n';
    }
    run.write(".csv", csv.str());

    const double vh = hlp_sweep_unconditional_variance(sweep.p);
    const double vhl = hlp_heisenberg_limit(3);
    ordered_json s;
    s["schema"] = "hlphase/hpea-summary/v1";
    s["V_H"] = jnum(vh);
    s["V_H_infinite"] = hlp_is_infinite(vh) != 0;
    s["V_H_recombined"] = jnum(hlp_sweep_recombined_variance(sweep.p));
    s["V_HL"] = vhl;
    s["ratio"] = jnum(vh / vhl);
    s["N"] = 3;
    s["mode"] = a.mode;
    s["seed"] = run.seed;
    s["grid_size"] = a.grid;
    s["feedforward"] = !a.no_feedforward;
    if (o.mode == HLP_MODE_MC) s["trials_per_phase"] = a.trials;
    if (a.bootstrap > 0) {
        double lo = 0, hi = 0, pt = 0;
        check(hlp_sweep_bootstrap(sweep.p, a.bootstrap, run.seed, a.level, &lo, &hi, &pt));
        s["bootstrap"] = {{"resamples", a.bootstrap}, {"level", a.level}, {"low", jnum(lo)}, {"high", jnum(hi)}};
    }
    s["experimental_reference"] = {{"V_H", 0.5497}, {"uncertainty", 0.0007}, {"note", kNotReproduced}};
    run.write_json(".json", s);
    std::cout << s.dump(2) << "\n";
}

// ---- hpea-shot ----

struct ShotArgs {
    double phi = 0.0;
    std::int64_t shots = 1;
    std::string state;
    bool no_feedforward = false;
    bool records = false;
};

void cmd_hpea_shot(Run& run, const ShotArgs& a) {
    Density rho;
    load_state(rho, a.state);
    if (a.shots < 1) throw CliError(kExitValidation, "--shots must be >= 1");
    std::vector<std::int32_t> patterns(static_cast<std::size_t>(a.shots));
    check(hlp_hpea_shots(rho.p, a.phi, a.no_feedforward ? 0 : 1, a.shots, run.seed, patterns.data()));
    std::int64_t counts[4] = {0, 0, 0, 0};
    for (auto p : patterns) ++counts[p];
    double exact[4];
    check(hlp_hpea_distribution(rho.p, a.phi, a.no_feedforward ? 0 : 1, exact));

    if (a.records) {
        std::ostringstream csv;
        csv << "shot,outcome,phi0,phi1,estimate,true_phase\n";
        for (std::size_t t = 0; t < patterns.size(); ++t) {
            const auto p = static_cast<std::size_t>(patterns[t]);
            csv << t << ',' << hlp_outcome_label(p) << ',' << (p & 1U) << ',' << ((p >> 1) & 1U) << ','
                << num(hlp_estimate_for_pattern(p)) << ',' << num(a.phi) << '\n';
        }
        run.write(".csv", csv.str());
    }
    double phase_est = 0.0, v_cond = 0.0;
    check(hlp_true_phase_from_counts(counts, &phase_est));
    check(hlp_conditional_variance_from_counts(counts, a.phi, &v_cond));
    ordered_json s;
    s["schema"] = "hlphase/hpea-shot/v1";
    s["true_phase"] = a.phi;
    s["shots"] = a.shots;
    s["seed"] = run.seed;
    s["feedforward"] = !a.no_feedforward;
    ordered_json c = ordered_json::object(), e = ordered_json::object();
    for (std::size_t k = 0; k < 4; ++k) {
        c[hlp_outcome_label(k)] = counts[k];
        e[hlp_outcome_label(k)] = exact[k];
    }
    s["counts"] = c;
    s["exact_probabilities"] = e;
    s["reconstructed_phase"] = phase_est;
    s["V_cond"] = jnum(v_cond);
    run.write_json(".json", s);
    std::cout << s.dump(2) << "\n";
}

// ---- snl ----

struct SnlArgs {
    int probes = 3;
    std::string mode = "exact";
    std::int64_t trials = 100000;
    int grid = 64;
    double offset = 0.0;
};

void cmd_snl(Run& run, const SnlArgs& a, int workers) {
    hlp_snl_options o = hlp_snl_default_options();
    o.probes = a.probes;
    o.mode = parse_mode(a.mode);
    o.trials = a.trials;
    o.seed = run.seed;
    o.grid_size = a.grid;
    o.grid_offset = a.offset;
    o.workers = workers;
    Sweep sweep;
    check(hlp_snl_sweep(&o, sweep.out()));
    double exact = 0.0;
    check(hlp_snl_exact_variance(a.probes, &exact));

    std::ostringstream csv;
    csv << "phi,V_cond,mu\n";
    for (std::size_t i = 0; i < hlp_sweep_size(sweep.p); ++i) {
        csv << num(hlp_sweep_phase(sweep.p, i)) << ',' << num(hlp_sweep_conditional_variance(sweep.p, i)) << ','
            << num(hlp_sweep_sharpness(sweep.p, i)) << '\n';
    }
    run.write(".csv", csv.str());
    const double vh = hlp_sweep_unconditional_variance(sweep.p);
    ordered_json s;
    s["schema"] = "hlphase/snl-summary/v1";
    s["V_H"] = jnum(vh);
    s["V_H_infinite"] = hlp_is_infinite(vh) != 0;
    s["V_H_recombined"] = jnum(hlp_sweep_recombined_variance(sweep.p));
    s["V_SNL_exact"] = jnum(exact);
    s["N"] = a.probes;
    s["n_outcomes"] = hlp_sweep_outcomes(sweep.p);
    s["mode"] = a.mode;
    s["seed"] = run.seed;
    s["grid_size"] = a.grid;
    if (o.mode == HLP_MODE_MC) s["trials_per_phase"] = a.trials;
    if (a.probes == 3) s["experimental_reference"] = {{"V_H", 0.7870}, {"uncertainty", 0.0007}, {"note", kNotReproduced}};
    run.write_json(".json", s);
    std::cout << s.dump(2) << "\n";
}

// ---- optimize ----

struct OptimizeArgs {
    bool symmetric = false;
    bool general = false;
    bool separable = false;
    bool single_pass = false;
    bool multipass = false;
    std::vector<int> passes;
    bool adaptive = false;
    bool non_adaptive = false;
    int restarts = 200;
    int max_evaluations = 40000;
    bool real_amplitudes = false;
};

struct ReferenceKey {
    hlp_state_class state_class;
    std::string allocation;  // "best" or e.g. "1,1,1"
    bool adaptive;
    bool operator<(const ReferenceKey& o) const {
        return std::tie(state_class, allocation, adaptive) < std::tie(o.state_class, o.allocation, o.adaptive);
    }
};

std::optional<double> reference_value(hlp_state_class c, const std::string& allocation, bool adaptive) {
    const double hl = std::pow(std::tan(std::numbers::pi / 5), 2);
    static const std::map<ReferenceKey, double> table = {
        {{HLP_SYMMETRIC, "1,1,1", true}, 0.5569202271898053},
        {{HLP_SEPARABLE, "1,1,1", true}, 0.5609756097560981},
        {{HLP_SEPARABLE, "best", true}, 0.5609756097560981},
        {{HLP_SYMMETRIC, "1,1,1", false}, 0.6546809936433506},
        {{HLP_SYMMETRIC, "best", false}, 0.6546809936433506},
        {{HLP_GENERAL, "1,1,1", false}, 0.6054864794870138},
        {{HLP_GENERAL, "best", false}, 0.6054864794870138},
        {{HLP_SYMMETRIC, "2,1", false}, 2.0},
        {{HLP_GENERAL, "2,1", false}, 2.0},
    };
    if (auto it = table.find({c, allocation, adaptive}); it != table.end()) return it->second;
    if (adaptive && c != HLP_SEPARABLE && (allocation == "best" || allocation == "2,1")) return hl;
    return std::nullopt;
}

std::string join(const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

const char* class_name(hlp_state_class c) {
    switch (c) {
        case HLP_SEPARABLE: return "separable";
        case HLP_SYMMETRIC: return "symmetric";
        default: return "general";
    }
}

hlp_optimizer_options optimizer_options(std::uint64_t seed, int workers, int restarts, int max_evaluations,
                                        bool real_amplitudes) {
    hlp_optimizer_options o = hlp_optimizer_default_options();
    o.restarts = restarts;
    o.seed = seed;
    o.workers = workers;
    o.max_evaluations = max_evaluations;
    o.real_amplitudes = real_amplitudes ? 1 : 0;
    return o;
}

int cmd_optimize(Run& run, const OptimizeArgs& a, int workers) {
    if (a.symmetric + a.general + a.separable != 1) {
        throw CliError(kExitValidation, "choose exactly one of --symmetric, --general, --no-entanglement");
    }
    if (a.adaptive == a.non_adaptive) throw CliError(kExitValidation, "choose exactly one of --adaptive, --non-adaptive");
    if (a.single_pass + a.multipass + !a.passes.empty() != 1) {
        throw CliError(kExitValidation, "choose exactly one of --single-pass, --multipass, --passes");
    }
    const hlp_state_class c = a.symmetric ? HLP_SYMMETRIC : a.general ? HLP_GENERAL : HLP_SEPARABLE;
    std::vector<int> passes = a.single_pass ? std::vector<int>{1, 1, 1} : a.passes;
    const auto opts = optimizer_options(run.seed, workers, a.restarts, a.max_evaluations, a.real_amplitudes);

    Optimization result;
    hlp_status status;
    if (a.multipass) {
        status = hlp_optimize_allocations(c, a.adaptive ? 1 : 0, 3, &opts, result.out());
    } else {
        status = hlp_optimize(passes.data(), passes.size(), c, a.adaptive ? 1 : 0, &opts, result.out());
    }
    if (status != HLP_OK && status != HLP_ERR_NONCONVERGENCE) check(status);
    const std::string nonconvergence = status == HLP_ERR_NONCONVERGENCE ? hlp_last_error() : "";

    std::vector<int> chosen;
    for (std::size_t i = 0; i < hlp_optimization_photons(result.p); ++i) chosen.push_back(hlp_optimization_passes(result.p, i));
    const double v = hlp_optimization_variance(result.p);
    const auto ref = reference_value(c, a.multipass ? "best" : join(passes), a.adaptive);

    ordered_json s;
    s["schema"] = "hlphase/optimize/v1";
    s["spec"] = {{"state_class", class_name(c)},
                 {"allocation", a.multipass ? "best" : "fixed"},
                 {"passes", chosen},
                 {"adaptive", a.adaptive},
                 {"real_amplitudes", a.real_amplitudes}};
    s["best_variance"] = jnum(v);
    s["best_variance_infinite"] = hlp_is_infinite(v) != 0;
    s["reference"] = ref ? ordered_json(*ref) : ordered_json(nullptr);
    s["abs_error"] = ref && std::isfinite(v) ? ordered_json(std::abs(v - *ref)) : ordered_json(nullptr);
    s["restarts"] = hlp_optimization_restarts(result.p);
    s["restarts_converged"] = hlp_optimization_converged(result.p);
    s["evaluations"] = hlp_optimization_evaluations(result.p);
    s["seed"] = run.seed;
    ordered_json amps = ordered_json::array();
    for (std::size_t i = 0; i < hlp_optimization_amplitude_count(result.p); ++i) {
        double re = 0, im = 0;
        hlp_optimization_amplitude(result.p, i, &re, &im);
        amps.push_back({re, im});
    }
    s["amplitudes"] = amps;
    ordered_json th = ordered_json::array();
    for (std::size_t i = 0; i < hlp_optimization_theta_count(result.p); ++i) th.push_back(hlp_optimization_theta(result.p, i));
    s["theta"] = th;
    s["converged"] = nonconvergence.empty();
    run.write_json(".json", s);
    std::cout << s.dump(2) << "\n";
    if (!nonconvergence.empty()) {
        std::cerr << "error: " << nonconvergence << "\n";
        return kExitNonConvergence;
    }
    return kExitOk;
}

// ---- table2 ----

void cmd_table2(Run& run, int restarts, int workers) {
    const auto opts = optimizer_options(run.seed, workers, restarts, hlp_optimizer_default_options().max_evaluations, false);
    Table table;
    check(hlp_table2(&opts, table.out()));
    std::ostringstream csv;
    csv << "symmetric_entanglement,multipass,adaptive,scheme,computed,reference,precise_reference,abs_error,note\n";
    ordered_json rows = ordered_json::array();
    for (std::size_t r = 0; r < hlp_table_rows(table.p); ++r) {
        const int flags = hlp_table_flags(table.p, r);
        double computed = 0, precise = 0;
        const bool has_computed = hlp_table_computed(table.p, r, &computed) != 0;
        const bool has_precise = hlp_table_precise_reference(table.p, r, &precise) != 0;
        const double reference = hlp_table_reference(table.p, r);
        const bool experimental = (flags & 8) != 0;
        const std::string note = experimental ? kNotReproduced : "computed";
        const auto mark = [](bool b) { return b ? "yes" : "no"; };
        std::optional<double> err;
        if (has_computed) err = std::abs(computed - (has_precise ? precise : reference));
        csv << mark(flags & 1) << ',' << mark(flags & 2) << ',' << mark(flags & 4) << ",\""
            << hlp_table_scheme(table.p, r) << "\"," << (has_computed ? num(computed) : "") << ',' << num(reference)
            << ',' << (has_precise ? num(precise) : "") << ',' << (err ? num(*err) : "") << ",\"" << note << "\"\n";
        ordered_json row;
        row["symmetric_entanglement"] = (flags & 1) != 0;
        row["multipass"] = (flags & 2) != 0;
        row["adaptive"] = (flags & 4) != 0;
        row["scheme"] = hlp_table_scheme(table.p, r);
        row["computed"] = has_computed ? jnum(computed) : ordered_json(nullptr);
        row["reference"] = reference;
        row["precise_reference"] = has_precise ? ordered_json(precise) : ordered_json(nullptr);
        row["abs_error"] = err ? ordered_json(*err) : ordered_json(nullptr);
        row["note"] = note;
        rows.push_back(row);
    }
    run.write(".csv", csv.str());
    ordered_json s;
    s["schema"] = "hlphase/table2/v1";
    s["restarts"] = restarts;
    s["seed"] = run.seed;
    s["rows"] = rows;
    run.write_json(".json", s);
    std::cout << csv.str();
}

// ---- calibrate ----

void cmd_calibrate(Run& run, int points) {
    if (points < 1) throw CliError(kExitValidation, "--points must be >= 1");
    std::vector<hlp_calibration_row> rows(2 * static_cast<std::size_t>(points));
    check(hlp_optics_calibration(points, rows.data(), rows.size()));
    std::ostringstream csv;
    csv << "stage,logical_phase,hwp_angle,extracted_phase,error\n";
    double worst = 0.0;
    for (const auto& r : rows) {
        csv << r.stage << ',' << num(r.logical_phase) << ',' << num(r.hwp_angle) << ',' << num(r.extracted_phase) << ','
            << num(r.error) << '\n';
        worst = std::max(worst, std::abs(r.error));
    }
    run.write(".csv", csv.str());
    double equivalence = 0.0;
    check(hlp_optics_equivalence(64, 8, &equivalence));
    double double_pass_error = 0.0;
    for (int i = 0; i < 64; ++i) {
        const double phi = 2 * std::numbers::pi * i / 64;
        double rel = 0.0;
        check(hlp_optics_double_pass(phi, &rel));
        double d = std::remainder(rel - 2 * phi, 2 * std::numbers::pi);
        double_pass_error = std::max(double_pass_error, std::abs(d));
    }
    ordered_json s;
    s["schema"] = "hlphase/calibrate/v1";
    s["points"] = points;
    s["max_encoding_error"] = worst;
    s["equivalence_grid"] = {64, 8};
    s["equivalence_max_abs_diff"] = equivalence;
    s["double_pass_max_error"] = double_pass_error;
    s["units"] = "radians";
    run.write_json(".json", s);
    std::cout << csv.str();
}

// ---- fidelity ----

void cmd_fidelity(Run& run, const std::string& state) {
    Density rho;
    check(hlp_density_load(state.c_str(), rho.out()));
    double f = 0, p = 0;
    check(hlp_density_fidelity_optimal(rho.p, &f));
    check(hlp_density_purity(rho.p, &p));
    hlp_sweep_options o = hlp_sweep_default_options();
    o.seed = run.seed;
    Sweep sweep;
    check(hlp_hpea_sweep(rho.p, &o, sweep.out()));
    const double vh = hlp_sweep_unconditional_variance(sweep.p);
    ordered_json s;
    s["schema"] = "hlphase/fidelity/v1";
    s["state"] = state;
    s["fidelity"] = f;
    s["purity"] = p;
    s["V_H"] = jnum(vh);
    s["V_H_infinite"] = hlp_is_infinite(vh) != 0;
    s["V_HL"] = hlp_heisenberg_limit(3);
    s["experimental_reference"] = {{"fidelity", 0.980}, {"fidelity_uncertainty", 0.003}, {"purity", 0.965},
                                   {"purity_uncertainty", 0.006}, {"note", kNotReproduced}};
    run.write_json(".json", s);
    std::cout << s.dump(2) << "\n";
}

int run_cli(std::vector<std::string> args);

int cmd_replay(const std::string& manifest_path, const std::string& out_dir) {
    std::ifstream f(manifest_path);
    if (!f) throw CliError(kExitValidation, "cannot open manifest " + manifest_path);
    ordered_json m;
    try {
        m = ordered_json::parse(f);
    } catch (const std::exception& e) {
        throw CliError(kExitValidation, std::string("malformed manifest: ") + e.what());
    }
    if (!m.contains("arguments") || !m["arguments"].is_array() || !m.contains("seed")) {
        throw CliError(kExitValidation, "manifest lacks arguments or seed");
    }
    std::vector<std::string> args = m["arguments"].get<std::vector<std::string>>();
    // The stored arguments already carry the resolved seed.
    args.push_back("--output-dir");
    args.push_back(out_dir);
    return run_cli(args);
}

int run_cli(std::vector<std::string> args) {
    CLI::App app{"Heisenberg-limited phase estimation toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(hlp_version()));
    app.option_defaults()->always_capture_default();

    std::string out_dir = ".";
    int workers = 0;
    std::optional<std::uint64_t> seed;
    auto common = [&](CLI::App* sub, bool seeded) {
        sub->add_option("-o,--output-dir", out_dir, "directory for result files");
        sub->add_option("--workers", workers, "worker threads (0 = all cores)");
        if (seeded) sub->add_option("--seed", seed, "master seed (default: $HLPHASE_SEED or 0)");
    };

    SweepArgs sweep_args;
    auto* sweep = app.add_subcommand("hpea-sweep", "phase sweep of the two-photon protocol");
    common(sweep, true);
    sweep->add_option("--grid", sweep_args.grid, "phase grid size");
    sweep->add_option("--offset", sweep_args.offset, "phase grid offset (rad)");
    sweep->add_option("--mode", sweep_args.mode)->check(CLI::IsMember({"exact", "mc"}));
    sweep->add_option("--trials", sweep_args.trials, "shots per phase in mc mode");
    sweep->add_option("--state", sweep_args.state, "density-matrix JSON file (default: optimal probe)");
    sweep->add_flag("--no-feedforward", sweep_args.no_feedforward);
    sweep->add_option("--bootstrap", sweep_args.bootstrap, "bootstrap resamples (mc mode)");
    sweep->add_option("--level", sweep_args.level, "bootstrap confidence level");

    ShotArgs shot_args;
    auto* shot = app.add_subcommand("hpea-shot", "single shots at a fixed phase");
    common(shot, true);
    shot->add_option("--phi", shot_args.phi, "true phase (rad)");
    shot->add_option("--shots", shot_args.shots);
    shot->add_option("--state", shot_args.state);
    shot->add_flag("--no-feedforward", shot_args.no_feedforward);
    shot->add_flag("--records", shot_args.records, "write one CSV row per shot");

    SnlArgs snl_args;
    auto* snl = app.add_subcommand("snl", "shot-noise baseline");
    common(snl, true);
    snl->add_option("-N,--probes", snl_args.probes);
    snl->add_option("--mode", snl_args.mode)->check(CLI::IsMember({"exact", "mc"}));
    snl->add_option("--trials", snl_args.trials);
    snl->add_option("--grid", snl_args.grid);
    snl->add_option("--offset", snl_args.offset);

    OptimizeArgs opt_args;
    auto* opt = app.add_subcommand("optimize", "optimize a readout scheme");
    common(opt, true);
    opt->add_flag("--symmetric", opt_args.symmetric, "exchange-symmetric entangled probe");
    opt->add_flag("--general", opt_args.general, "unrestricted probe");
    opt->add_flag("--no-entanglement", opt_args.separable, "product probe");
    opt->add_flag("--single-pass", opt_args.single_pass, "three photons, one pass each");
    opt->add_flag("--multipass", opt_args.multipass, "best over all pass allocations of N = 3");
    opt->add_option("--passes", opt_args.passes, "explicit pass allocation, e.g. 2,1")->delimiter(',');
    opt->add_flag("--adaptive", opt_args.adaptive);
    opt->add_flag("--non-adaptive", opt_args.non_adaptive);
    opt->add_option("--restarts", opt_args.restarts);
    opt->add_option("--max-evaluations", opt_args.max_evaluations, "per restart");
    opt->add_flag("--real-amplitudes", opt_args.real_amplitudes);

    int table_restarts = 200;
    auto* table = app.add_subcommand("table2", "theoretical variances of all scheme classes");
    common(table, true);
    table->add_option("--restarts", table_restarts);

    int cal_points = 16;
    auto* cal = app.add_subcommand("calibrate", "waveplate angle to logical phase table");
    common(cal, false);
    cal->add_option("--points", cal_points);

    std::string fid_state;
    auto* fid = app.add_subcommand("fidelity", "fidelity, purity and predicted variance of a state file");
    common(fid, false);
    fid->add_option("--state", fid_state)->required();

    std::string manifest;
    auto* replay = app.add_subcommand("replay", "re-run a manifest");
    replay->add_option("manifest", manifest)->required();
    replay->add_option("-o,--output-dir", out_dir);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    }

    if (replay->parsed()) return cmd_replay(manifest, out_dir);

    Run run;
    run.out_dir = out_dir;
    run.seed = seed ? *seed : default_seed();
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "-o" || args[i] == "--output-dir") {
            ++i;
            continue;
        }
        if (args[i].rfind("--output-dir=", 0) == 0 || args[i].rfind("--seed", 0) == 0) {
            if (args[i] == "--seed") ++i;
            continue;
        }
        run.arguments.push_back(args[i]);
    }
    auto* sub = app.get_subcommands().front();
    run.command = sub->get_name();
    if (sub != cal && sub != fid) {
        run.arguments.push_back("--seed");
        run.arguments.push_back(std::to_string(run.seed));
    }
    for (const auto* o : sub->get_options()) {
        const std::string name = o->get_single_name();
        if (name == "help" || name == "output-dir" || name == "seed") continue;
        const auto res = o->results();
        if (o->get_expected_max() == 0) {
            run.parameters[name] = o->count() > 0;
        } else if (!res.empty()) {
            run.parameters[name] = res.size() == 1 ? ordered_json(res.front()) : ordered_json(res);
        } else {
            const std::string d = o->get_default_str();
            run.parameters[name] = d == "{}" ? "" : d;  // empty vector default
        }
    }
    if (sub != cal && sub != fid) run.parameters["seed"] = std::to_string(run.seed);

    int code = kExitOk;
    if (sub == sweep) cmd_hpea_sweep(run, sweep_args, workers);
    else if (sub == shot) cmd_hpea_shot(run, shot_args);
    else if (sub == snl) cmd_snl(run, snl_args, workers);
    else if (sub == opt) code = cmd_optimize(run, opt_args, workers);
    else if (sub == table) cmd_table2(run, table_restarts, workers);
    else if (sub == cal) cmd_calibrate(run, cal_points);
    else if (sub == fid) cmd_fidelity(run, fid_state);
    run.write_manifest();
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(std::vector<std::string>(argv + 1, argv + argc));
    } catch (const CliError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInternal;
    }
}
