#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <vector>

namespace hlphase {

/// Sharpness below this is treated as "no phase information".
inline constexpr double kMinSharpness = 1e-15;

/// Holevo variance mu^-2 - 1. Returns +infinity (the infinite-variance tag)
/// when mu < kMinSharpness instead of throwing.
inline double holevo_from_sharpness(double mu) {
    if (!(mu >= kMinSharpness)) return std::numeric_limits<double>::infinity();
    return 1.0 / (mu * mu) - 1.0;
}

inline bool is_infinite_variance(double v) { return std::isinf(v); }

/// Minimum grid size for exact averaging of degree-N trigonometric polynomials.
inline int minimum_grid_size(int resources) { return 2 * resources + 2; }

/// Throws std::invalid_argument when `size` is below 2N+2.
void require_grid(int size, int resources);

/// size points phi_m = offset + 2 pi m / size.
std::vector<double> uniform_phase_grid(int size, double offset = 0.0);

/// Wraps an angle into [0, 2 pi).
double wrap_phase(double angle);

}  // namespace hlphase
