#include "hlphase/holevo.hpp"

#include <numbers>
#include <stdexcept>
#include <string>

namespace hlphase {

void require_grid(int size, int resources) {
    if (size < minimum_grid_size(resources)) {
        throw std::invalid_argument("phase grid of " + std::to_string(size) + " points is too coarse; need at least " +
                                    std::to_string(minimum_grid_size(resources)) + " for N = " +
                                    std::to_string(resources));
    }
}

std::vector<double> uniform_phase_grid(int size, double offset) {
    if (size < 1) throw std::invalid_argument("phase grid needs at least one point");
    std::vector<double> grid(static_cast<std::size_t>(size));
    for (int m = 0; m < size; ++m) grid[static_cast<std::size_t>(m)] = offset + 2.0 * std::numbers::pi * m / size;
    return grid;
}

double wrap_phase(double angle) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double w = std::fmod(angle, two_pi);
    if (w < 0.0) w += two_pi;
    if (w >= two_pi) w -= two_pi;
    return w;
}

}  // namespace hlphase
