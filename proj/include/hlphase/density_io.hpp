#pragma once

// JSON density-matrix files:
//   { "num_qubits": n, "real": [[...]], "imag": [[...]] }
// rows are row-major, basis ordering as in quantum_core.hpp.

#include <string>

#include "hlphase/quantum_core.hpp"

namespace hlphase {

DensityMatrix parse_density_json(const std::string& text);
DensityMatrix load_density_json(const std::string& path);
std::string density_to_json(const DensityMatrix& rho);

}  // namespace hlphase
