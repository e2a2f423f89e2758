#pragma once

// Jones calculus for the waveplate phase encoding.
//
// A retarder at orientation gamma is R(-gamma) diag(1, e^{i delta}) R(gamma)
// with R(gamma) = [[cos, sin], [-sin, cos]]. No global phase is stripped from
// these matrices: with this choice QWP(pi/4) sends h to e^{i pi/4} r and v to
// e^{-i pi/4} l exactly. All comparisons between optical and logical
// operators are modulo one global phase.
//
// Circular basis: r = (h - i v)/sqrt2, l = (h + i v)/sqrt2.
//
// An encoding stage is QWP(pi/4) followed by a HWP, read back into the linear
// basis with B = |h><l| + |v><r|. The unknown-phase stage (HWP at -phi/4 + pi/8)
// is then diag(e^{i phi}, 1) and the feedforward stage (HWP at theta/4 + pi/8)
// is diag(1, e^{i theta}), so stages compose: two unknown-phase stages give
// 2 phi and an unknown-phase stage after a feedforward stage gives phi - theta.
// The h arm corresponds to logical |1>, the v arm to logical |0>.

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hlphase/quantum_core.hpp"

namespace hlphase::optics {

using Matrix2 = Eigen::Matrix2cd;
using Vector2 = Eigen::Vector2cd;

class JonesMatrix {
public:
    /// Throws ValidationError("unitarity") unless J J^dagger = I within 1e-12.
    static JonesMatrix from_matrix(const Matrix2& m);

    const Matrix2& matrix() const noexcept { return m_; }
    JonesMatrix operator*(const JonesMatrix& rhs) const { return JonesMatrix(m_ * rhs.m_); }
    Vector2 operator*(const Vector2& v) const { return m_ * v; }

private:
    explicit JonesMatrix(const Matrix2& m) : m_(m) {}
    Matrix2 m_;
};

enum class WaveplateKind { qwp, hwp };

struct WaveplateSetting {
    WaveplateKind kind;
    double angle;  // [0, pi); a waveplate is invariant under a half turn

    static WaveplateSetting make(WaveplateKind kind, double angle);
    JonesMatrix jones() const;
};

std::string to_string(WaveplateKind kind);

JonesMatrix retarder(double gamma, double retardance);
JonesMatrix qwp_matrix(double gamma);
JonesMatrix hwp_matrix(double gamma);

Vector2 horizontal();
Vector2 vertical();
Vector2 diagonal();      // (h + v)/sqrt2
Vector2 antidiagonal();  // (h - v)/sqrt2
Vector2 right_circular();
Vector2 left_circular();

/// Max elementwise distance between a and b after removing the best global phase.
double distance_up_to_phase(const Matrix2& a, const Matrix2& b);

/// HWP angles of the two stages.
double unknown_phase_hwp_angle(double phi);
double feedforward_hwp_angle(double theta);

/// arg(<l|M|h> / <r|M|v>) for M = HWP(-phi/4 + pi/8) QWP(pi/4), in [0, 2 pi).
double verify_unknown_phase_encoding(double phi);
/// arg(<r|M|v> / <l|M|h>) for M = HWP(theta/4 + pi/8) QWP(pi/4), in [0, 2 pi).
double verify_feedforward_encoding(double theta);

JonesMatrix unknown_phase_stage(double phi);
JonesMatrix feedforward_stage(double theta);

/// Relative phase arg(J_hh / J_vv) of a diagonal stage product, in [0, 2 pi).
double relative_phase(const JonesMatrix& j);
/// Two unknown-phase stages in sequence (the double-passed mode).
double verify_double_pass(double phi);
/// Feedforward stage followed by the unknown-phase stage.
double verify_combined_encoding(double phi, double theta);

/// Optical stages for `passes` unknown-phase passes and one feedforward
/// stage, rewritten in the logical basis (|0> = v, |1> = h).
CMatrix logical_operator(int passes, double phi, double theta);

/// P(d) after `passes` unknown-phase stages and a feedforward stage acting on
/// diagonal input light, from Jones matrices.
double optics_probability_d(int passes, double phi, double theta);
/// The same interferometer from phase_gate / reference_phase and measure_x.
double logical_probability_d(int passes, double phi, double theta);

struct CalibrationRow {
    std::string stage;  // "unknown" or "feedforward"
    double logical_phase;
    double hwp_angle;
    double extracted_phase;
    double error;  // wrapped into (-pi, pi]
};

/// Waveplate angle -> logical phase for `points` phases on [0, 2 pi).
std::vector<CalibrationRow> calibration_table(int points);

}  // namespace hlphase::optics
