#include "hlphase/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace hlphase {

namespace {

struct Round {
    std::vector<double> x;
    double value;
    int evaluations;
    bool converged;
};

Round simplex_round(const Objective& f, const std::vector<double>& start, double step, const NelderMeadOptions& opt,
                    int budget) {
    const std::size_t n = start.size();
    const double dn = static_cast<double>(n);
    // Gao & Han dimension-adapted coefficients.
    const double alpha = 1.0;
    const double beta = 1.0 + 2.0 / dn;
    const double gamma = 0.75 - 1.0 / (2.0 * dn);
    const double delta = 1.0 - 1.0 / dn;

    int evals = 0;
    auto eval = [&](const std::vector<double>& x) {
        ++evals;
        const double v = f(x);
        return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
    };

    std::vector<std::vector<double>> pts(n + 1, start);
    for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += step;
    std::vector<double> vals(n + 1);
    for (std::size_t i = 0; i <= n; ++i) vals[i] = eval(pts[i]);

    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n), xr(n), xe(n), xc(n);
    bool converged = false;

    while (true) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
        const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];

        double diameter = 0.0;
        for (std::size_t i = 0; i <= n; ++i) {
            for (std::size_t k = 0; k < n; ++k) diameter = std::max(diameter, std::abs(pts[i][k] - pts[best][k]));
        }
        if (diameter <= opt.x_tolerance && vals[worst] - vals[best] <= opt.f_tolerance) {
            converged = true;
            break;
        }
        if (evals >= budget) break;

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < n; ++k) centroid[k] += pts[order[i]][k];
        }
        for (auto& c : centroid) c /= dn;

        for (std::size_t k = 0; k < n; ++k) xr[k] = centroid[k] + alpha * (centroid[k] - pts[worst][k]);
        const double fr = eval(xr);

        if (fr < vals[best]) {
            for (std::size_t k = 0; k < n; ++k) xe[k] = centroid[k] + beta * (xr[k] - centroid[k]);
            const double fe = eval(xe);
            if (fe < fr) {
                pts[worst] = xe;
                vals[worst] = fe;
            } else {
                pts[worst] = xr;
                vals[worst] = fr;
            }
            continue;
        }
        if (fr < vals[second]) {
            pts[worst] = xr;
            vals[worst] = fr;
            continue;
        }
        bool accepted = false;
        if (fr < vals[worst]) {
            for (std::size_t k = 0; k < n; ++k) xc[k] = centroid[k] + gamma * (xr[k] - centroid[k]);
            const double fc = eval(xc);
            if (fc <= fr) {
                pts[worst] = xc;
                vals[worst] = fc;
                accepted = true;
            }
        } else {
            for (std::size_t k = 0; k < n; ++k) xc[k] = centroid[k] - gamma * (centroid[k] - pts[worst][k]);
            const double fc = eval(xc);
            if (fc < vals[worst]) {
                pts[worst] = xc;
                vals[worst] = fc;
                accepted = true;
            }
        }
        if (!accepted) {
            for (std::size_t i = 0; i <= n; ++i) {
                if (i == best) continue;
                for (std::size_t k = 0; k < n; ++k) pts[i][k] = pts[best][k] + delta * (pts[i][k] - pts[best][k]);
                vals[i] = eval(pts[i]);
            }
        }
    }

    const auto best_it = std::min_element(vals.begin(), vals.end());
    const auto idx = static_cast<std::size_t>(best_it - vals.begin());
    return {pts[idx], vals[idx], evals, converged};
}

}  // namespace

NelderMeadResult nelder_mead(const Objective& f, std::vector<double> start, const NelderMeadOptions& options) {
    if (start.empty()) throw std::invalid_argument("nelder_mead needs at least one parameter");
    NelderMeadResult result;
    result.x = std::move(start);
    result.value = f(result.x);
    result.evaluations = 1;

    double step = options.initial_step;
    for (int round = 0; round < options.max_rounds; ++round) {
        const int budget = options.max_evaluations - result.evaluations;
        if (budget <= 0) break;
        Round r = simplex_round(f, result.x, step, options, budget);
        result.evaluations += r.evaluations;
        const bool improved = r.value < result.value - options.f_tolerance;
        if (r.value <= result.value) {
            result.x = std::move(r.x);
            result.value = r.value;
        }
        result.converged = r.converged;
        if (!r.converged) break;
        if (!improved && round > 0) break;
        // Later rounds probe a smaller neighbourhood of the incumbent.
        step = std::max(1e-3, step * 0.1);
    }
    return result;
}

}  // namespace hlphase
