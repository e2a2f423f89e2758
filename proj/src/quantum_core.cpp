#include "hlphase/quantum_core.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "hlphase/error.hpp"

namespace hlphase {

namespace {

int qubits_for_dimension(Eigen::Index dim, const char* what) {
    for (int n = 1; n <= kMaxQubits; ++n) {
        if (dim == (Eigen::Index{1} << n)) return n;
    }
    std::ostringstream msg;
    msg << what << " dimension " << dim << " is not 2^n for 1 <= n <= " << kMaxQubits;
    throw ValidationError("dimension", msg.str());
}

// Bit position (from the least significant end) of qubit `index`.
int bit_of(int index, int num_qubits) { return num_qubits - 1 - index; }

void check_index(int index, int num_qubits) {
    if (index < 0 || index >= num_qubits) {
        throw std::out_of_range("qubit index " + std::to_string(index) + " out of range for " +
                                std::to_string(num_qubits) + " qubits");
    }
}

void check_finite(double value, const char* name) {
    if (!std::isfinite(value)) throw std::invalid_argument(std::string(name) + " must be finite");
}

// Inserts bit `value` at position `bit` of `reduced`, shifting higher bits up.
std::size_t insert_bit(std::size_t reduced, int bit, std::size_t value) {
    const std::size_t low = reduced & ((std::size_t{1} << bit) - 1);
    const std::size_t high = reduced >> bit;
    return (high << (bit + 1)) | (value << bit) | low;
}

}  // namespace

PureState PureState::from_amplitudes(std::vector<Complex> amplitudes) {
    const auto dim = static_cast<Eigen::Index>(amplitudes.size());
    const int n = qubits_for_dimension(dim, "state");
    CVector v = Eigen::Map<CVector>(amplitudes.data(), dim);
    const double norm2 = v.squaredNorm();
    if (std::abs(norm2 - 1.0) > tolerance::kAlgebraic) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "state norm^2 is " << norm2 << ", expected 1";
        throw ValidationError("normalization", msg.str());
    }
    return PureState(std::move(v), n);
}

PureState PureState::normalized(std::vector<Complex> amplitudes) {
    const auto dim = static_cast<Eigen::Index>(amplitudes.size());
    const int n = qubits_for_dimension(dim, "state");
    CVector v = Eigen::Map<CVector>(amplitudes.data(), dim);
    const double norm = v.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) throw ValidationError("normalization", "zero-norm state");
    v /= norm;
    return PureState(std::move(v), n);
}

DensityMatrix DensityMatrix::from_matrix(CMatrix entries) {
    if (entries.rows() != entries.cols()) throw ValidationError("dimension", "density matrix is not square");
    const int n = qubits_for_dimension(entries.rows(), "density matrix");
    if (!entries.allFinite()) throw ValidationError("finite", "density matrix has non-finite entries");

    const double asym = (entries - entries.adjoint()).cwiseAbs().maxCoeff();
    if (asym > tolerance::kAlgebraic) {
        std::ostringstream msg;
        msg.precision(3);
        msg << "matrix is not Hermitian (max |rho - rho^dagger| = " << asym << ")";
        throw ValidationError("hermitian", msg.str());
    }
    const Complex tr = entries.trace();
    if (std::abs(tr - Complex(1.0, 0.0)) > tolerance::kAlgebraic) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "trace is " << tr.real() << (tr.imag() >= 0 ? "+" : "") << tr.imag() << "i, expected 1";
        throw ValidationError("trace", msg.str());
    }
    const CMatrix herm = 0.5 * (entries + entries.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(herm, Eigen::EigenvaluesOnly);
    const double min_eig = solver.eigenvalues().minCoeff();
    if (min_eig < -tolerance::kEigenvalue) {
        std::ostringstream msg;
        msg.precision(6);
        msg << "matrix is not positive semidefinite (smallest eigenvalue " << min_eig << ")";
        throw ValidationError("positivity", msg.str());
    }
    return DensityMatrix(std::move(entries), n);
}

DensityMatrix DensityMatrix::from_pure(const PureState& state) {
    CMatrix rho = state.amplitudes() * state.amplitudes().adjoint();
    return DensityMatrix(std::move(rho), state.num_qubits());
}

DensityMatrix DensityMatrix::maximally_mixed(int num_qubits) {
    if (num_qubits < 1 || num_qubits > kMaxQubits) throw ValidationError("dimension", "unsupported qubit count");
    const Eigen::Index dim = Eigen::Index{1} << num_qubits;
    CMatrix rho = CMatrix::Identity(dim, dim) / static_cast<double>(dim);
    return DensityMatrix(std::move(rho), num_qubits);
}

DensityMatrix DensityMatrix::unchecked(CMatrix entries) {
    const int n = qubits_for_dimension(entries.rows(), "density matrix");
    return DensityMatrix(std::move(entries), n);
}

DensityMatrix DensityMatrix::mixed_with(const DensityMatrix& other, double weight) const {
    if (other.num_qubits_ != num_qubits_) throw std::invalid_argument("mixing states of different size");
    if (!(weight >= 0.0 && weight <= 1.0)) throw std::invalid_argument("mixing weight must lie in [0, 1]");
    return DensityMatrix((1.0 - weight) * entries_ + weight * other.entries_, num_qubits_);
}

Unitary Unitary::from_matrix(CMatrix entries) {
    if (entries.rows() != entries.cols() || entries.rows() == 0) {
        throw ValidationError("dimension", "unitary must be square and non-empty");
    }
    const Eigen::Index dim = entries.rows();
    const double err = (entries * entries.adjoint() - CMatrix::Identity(dim, dim)).cwiseAbs().maxCoeff();
    if (!(err < tolerance::kAlgebraic)) throw ValidationError("unitarity", "matrix is not unitary");
    return Unitary(std::move(entries));
}

Unitary phase_gate(int passes, double phi) {
    if (passes < 1) throw std::invalid_argument("phase gate needs at least one pass");
    check_finite(phi, "phi");
    CMatrix m = CMatrix::Zero(2, 2);
    m(0, 0) = 1.0;
    m(1, 1) = std::polar(1.0, passes * phi);
    return Unitary::from_matrix(std::move(m));
}

Unitary reference_phase(double theta) {
    check_finite(theta, "theta");
    CMatrix m = CMatrix::Zero(2, 2);
    m(0, 0) = std::polar(1.0, theta);
    m(1, 1) = 1.0;
    return Unitary::from_matrix(std::move(m));
}

DensityMatrix apply_on_qubit(const Unitary& gate, int index, const DensityMatrix& state) {
    if (gate.dimension() != 2) throw std::invalid_argument("single-qubit gate must be 2x2");
    const int n = state.num_qubits();
    check_index(index, n);
    const int bit = bit_of(index, n);
    const auto dim = static_cast<Eigen::Index>(state.dimension());
    const CMatrix& g = gate.matrix();
    const Eigen::Index stride = Eigen::Index{1} << bit;

    // rho -> G rho, acting on row pairs.
    CMatrix out = state.matrix();
    for (Eigen::Index i0 = 0; i0 < dim; ++i0) {
        if (i0 & stride) continue;
        const Eigen::Index i1 = i0 | stride;
        for (Eigen::Index c = 0; c < dim; ++c) {
            const Complex a = out(i0, c), b = out(i1, c);
            out(i0, c) = g(0, 0) * a + g(0, 1) * b;
            out(i1, c) = g(1, 0) * a + g(1, 1) * b;
        }
    }
    // (G rho) G^dagger, acting on column pairs.
    for (Eigen::Index j0 = 0; j0 < dim; ++j0) {
        if (j0 & stride) continue;
        const Eigen::Index j1 = j0 | stride;
        for (Eigen::Index r = 0; r < dim; ++r) {
            const Complex a = out(r, j0), b = out(r, j1);
            out(r, j0) = a * std::conj(g(0, 0)) + b * std::conj(g(0, 1));
            out(r, j1) = a * std::conj(g(1, 0)) + b * std::conj(g(1, 1));
        }
    }
    return DensityMatrix::unchecked(std::move(out));
}

PureState apply_on_qubit(const Unitary& gate, int index, const PureState& state) {
    if (gate.dimension() != 2) throw std::invalid_argument("single-qubit gate must be 2x2");
    const int n = state.num_qubits();
    check_index(index, n);
    const std::size_t stride = std::size_t{1} << bit_of(index, n);
    std::vector<Complex> amps(state.amplitudes().data(), state.amplitudes().data() + state.dimension());
    const CMatrix& g = gate.matrix();
    for (std::size_t i0 = 0; i0 < amps.size(); ++i0) {
        if (i0 & stride) continue;
        const Complex a = amps[i0], b = amps[i0 | stride];
        amps[i0] = g(0, 0) * a + g(0, 1) * b;
        amps[i0 | stride] = g(1, 0) * a + g(1, 1) * b;
    }
    return PureState::normalized(std::move(amps));
}

PureState apply_cnot(const PureState& state, int control, int target) {
    const int n = state.num_qubits();
    check_index(control, n);
    check_index(target, n);
    if (control == target) throw std::invalid_argument("CNOT control and target must differ");
    const std::size_t cmask = std::size_t{1} << bit_of(control, n);
    const std::size_t tmask = std::size_t{1} << bit_of(target, n);
    std::vector<Complex> amps(state.dimension());
    for (std::size_t i = 0; i < amps.size(); ++i) {
        const std::size_t j = (i & cmask) ? (i ^ tmask) : i;
        amps[j] = state.amplitude(i);
    }
    return PureState::from_amplitudes(std::move(amps));
}

XBranch project_x(const DensityMatrix& state, int index, XOutcome result) {
    const int n = state.num_qubits();
    check_index(index, n);
    if (std::abs(state.trace() - 1.0) > tolerance::kAlgebraic) {
        throw ValidationError("trace", "measurement input is not normalized");
    }
    const int bit = bit_of(index, n);
    const double sign = result == XOutcome::d ? 1.0 : -1.0;
    const std::size_t rdim = state.dimension() / 2;

    // <r|_q rho |r>_q with |r> = (|0> + s|1>)/sqrt2.
    CMatrix reduced(static_cast<Eigen::Index>(rdim), static_cast<Eigen::Index>(rdim));
    for (std::size_t i = 0; i < rdim; ++i) {
        for (std::size_t j = 0; j < rdim; ++j) {
            Complex acc = 0.0;
            for (std::size_t x = 0; x < 2; ++x) {
                for (std::size_t y = 0; y < 2; ++y) {
                    const double w = (x ? sign : 1.0) * (y ? sign : 1.0);
                    acc += w * state(insert_bit(i, bit, x), insert_bit(j, bit, y));
                }
            }
            reduced(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 0.5 * acc;
        }
    }
    double p = reduced.trace().real();
    p = std::min(1.0, std::max(0.0, p));
    XBranch branch{p, std::nullopt};
    if (n > 1 && p > 0.0) branch.collapsed = DensityMatrix::unchecked(reduced / p);
    return branch;
}

MeasurementOutcome measure_x(const DensityMatrix& state, int index, double random_draw) {
    if (!(random_draw >= 0.0 && random_draw < 1.0)) throw std::invalid_argument("random draw must lie in [0, 1)");
    XBranch d = project_x(state, index, XOutcome::d);
    const double pd = d.probability;
    const double pa = 1.0 - pd;
    if (random_draw < pd) return {XOutcome::d, pd, pd, pa, std::move(d.collapsed)};
    XBranch a = project_x(state, index, XOutcome::a);
    return {XOutcome::a, pa, pd, pa, std::move(a.collapsed)};
}

double fidelity(const DensityMatrix& rho, const PureState& psi) {
    if (rho.dimension() != psi.dimension()) throw std::invalid_argument("fidelity: dimension mismatch");
    const Complex f = psi.amplitudes().dot(rho.matrix() * psi.amplitudes());
    return f.real();
}

double purity(const DensityMatrix& rho) { return rho.matrix().cwiseAbs2().sum(); }

}  // namespace hlphase
