#pragma once

// Dense linear algebra for few-qubit photonic states.
//
// Basis ordering is big-endian: qubit 0 is the most significant bit of a basis
// index and is the first photon measured (mode C, the multipassed photon).

#include <complex>
#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace hlphase {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

namespace tolerance {
inline constexpr double kAlgebraic = 1e-12;
inline constexpr double kEigenvalue = 1e-10;
}  // namespace tolerance

inline constexpr int kMaxQubits = 4;

class PureState {
public:
    /// Validates 2^n amplitudes (1 <= n <= 4) with unit norm.
    static PureState from_amplitudes(std::vector<Complex> amplitudes);
    /// Rescales to unit norm; zero vectors are still rejected.
    static PureState normalized(std::vector<Complex> amplitudes);

    int num_qubits() const noexcept { return num_qubits_; }
    std::size_t dimension() const noexcept { return static_cast<std::size_t>(amplitudes_.size()); }
    const CVector& amplitudes() const noexcept { return amplitudes_; }
    Complex amplitude(std::size_t index) const { return amplitudes_(static_cast<Eigen::Index>(index)); }

private:
    PureState(CVector amplitudes, int num_qubits) : amplitudes_(std::move(amplitudes)), num_qubits_(num_qubits) {}
    CVector amplitudes_;
    int num_qubits_;
};

class DensityMatrix {
public:
    /// Validates Hermiticity, unit trace and positivity; throws ValidationError
    /// naming the failed invariant.
    static DensityMatrix from_matrix(CMatrix entries);
    static DensityMatrix from_pure(const PureState& state);
    static DensityMatrix maximally_mixed(int num_qubits);

    int num_qubits() const noexcept { return num_qubits_; }
    std::size_t dimension() const noexcept { return static_cast<std::size_t>(entries_.rows()); }
    const CMatrix& matrix() const noexcept { return entries_; }
    Complex operator()(std::size_t row, std::size_t col) const {
        return entries_(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
    }
    double trace() const { return entries_.trace().real(); }

    /// (1 - weight) * this + weight * other.
    DensityMatrix mixed_with(const DensityMatrix& other, double weight) const;

    // Internal constructor for results of trace-preserving operations; skips
    // the eigenvalue check.
    static DensityMatrix unchecked(CMatrix entries);

private:
    DensityMatrix(CMatrix entries, int num_qubits) : entries_(std::move(entries)), num_qubits_(num_qubits) {}
    CMatrix entries_;
    int num_qubits_;
};

class Unitary {
public:
    /// Validates square shape and U U^dagger = I within 1e-12.
    static Unitary from_matrix(CMatrix entries);

    std::size_t dimension() const noexcept { return static_cast<std::size_t>(entries_.rows()); }
    const CMatrix& matrix() const noexcept { return entries_; }

private:
    explicit Unitary(CMatrix entries) : entries_(std::move(entries)) {}
    CMatrix entries_;
};

/// X-basis measurement result: d = (|0> + |1>)/sqrt2, a = (|0> - |1>)/sqrt2.
enum class XOutcome : int { d = 0, a = 1 };

inline char outcome_label(XOutcome r) { return r == XOutcome::d ? 'd' : 'a'; }

struct MeasurementOutcome {
    XOutcome result;
    double probability;    // of the returned branch
    double probability_d;
    double probability_a;
    // State of the remaining qubits; empty when the measured qubit was the last one.
    std::optional<DensityMatrix> collapsed;
};

/// diag(1, e^{i p phi}): p coherent passes through the unknown phase.
Unitary phase_gate(int passes, double phi);
/// diag(e^{i theta}, 1): controllable phase on the reference arm.
Unitary reference_phase(double theta);

DensityMatrix apply_on_qubit(const Unitary& gate, int index, const DensityMatrix& state);
PureState apply_on_qubit(const Unitary& gate, int index, const PureState& state);
PureState apply_cnot(const PureState& state, int control, int target);

struct XBranch {
    double probability;
    std::optional<DensityMatrix> collapsed;  // empty if probability is zero or no qubits remain
};

/// Projects qubit `index` onto |d> or |a> and traces it out.
XBranch project_x(const DensityMatrix& state, int index, XOutcome result);

/// Samples the X measurement: outcome d iff random_draw < P_d.
MeasurementOutcome measure_x(const DensityMatrix& state, int index, double random_draw);

double fidelity(const DensityMatrix& rho, const PureState& psi);
double purity(const DensityMatrix& rho);

}  // namespace hlphase
