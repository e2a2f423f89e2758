#pragma once

#include <functional>
#include <span>
#include <vector>

namespace hlphase {

struct NelderMeadOptions {
    double initial_step = 0.5;
    double x_tolerance = 1e-12;  // max vertex distance (inf-norm) from the best vertex
    double f_tolerance = 1e-13;  // spread of objective values over the simplex
    int max_evaluations = 20000;
    int max_rounds = 6;  // fresh simplices rebuilt around the incumbent
};

struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
    int evaluations = 0;
    bool converged = false;
};

using Objective = std::function<double(std::span<const double>)>;

/// Minimizes `f` with the adaptive-coefficient simplex method. After each
/// converged round a new simplex is built around the best point; the search
/// stops once a round no longer improves the objective.
NelderMeadResult nelder_mead(const Objective& f, std::vector<double> start, const NelderMeadOptions& options = {});

}  // namespace hlphase
