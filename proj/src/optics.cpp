#include "hlphase/optics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "hlphase/error.hpp"
#include "hlphase/holevo.hpp"

namespace hlphase::optics {

namespace {

constexpr double kPi = std::numbers::pi;
const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

Matrix2 rotation(double gamma) {
    const double c = std::cos(gamma), s = std::sin(gamma);
    Matrix2 r;
    r << c, s, -s, c;
    return r;
}

// Reads an encoding stage back from the circular into the linear basis.
Matrix2 circular_readout() {
    return horizontal() * left_circular().adjoint() + vertical() * right_circular().adjoint();
}

Matrix2 encoder(double hwp_angle) { return (hwp_matrix(hwp_angle) * qwp_matrix(kPi / 4)).matrix(); }

double signed_wrap(double x) {
    const double w = wrap_phase(x);
    return w > kPi ? w - 2 * kPi : w;
}

}  // namespace

JonesMatrix JonesMatrix::from_matrix(const Matrix2& m) {
    const double err = (m * m.adjoint() - Matrix2::Identity()).cwiseAbs().maxCoeff();
    if (!(err <= tolerance::kAlgebraic)) throw ValidationError("unitarity", "Jones matrix is not unitary");
    return JonesMatrix(m);
}

WaveplateSetting WaveplateSetting::make(WaveplateKind kind, double angle) {
    if (!std::isfinite(angle)) throw ValidationError("finite", "waveplate angle must be finite");
    double a = std::fmod(angle, kPi);
    if (a < 0) a += kPi;
    if (a >= kPi) a = 0.0;
    return {kind, a};
}

JonesMatrix WaveplateSetting::jones() const {
    return kind == WaveplateKind::qwp ? qwp_matrix(angle) : hwp_matrix(angle);
}

std::string to_string(WaveplateKind kind) { return kind == WaveplateKind::qwp ? "QWP" : "HWP"; }

JonesMatrix retarder(double gamma, double retardance) {
    Matrix2 d = Matrix2::Zero();
    d(0, 0) = 1.0;
    d(1, 1) = std::polar(1.0, retardance);
    return JonesMatrix::from_matrix(rotation(-gamma) * d * rotation(gamma));
}

JonesMatrix qwp_matrix(double gamma) { return retarder(gamma, kPi / 2); }
JonesMatrix hwp_matrix(double gamma) { return retarder(gamma, kPi); }

Vector2 horizontal() { return Vector2(1.0, 0.0); }
Vector2 vertical() { return Vector2(0.0, 1.0); }
Vector2 diagonal() { return Vector2(kInvSqrt2, kInvSqrt2); }
Vector2 antidiagonal() { return Vector2(kInvSqrt2, -kInvSqrt2); }
Vector2 right_circular() { return Vector2(kInvSqrt2, Complex(0.0, -kInvSqrt2)); }
Vector2 left_circular() { return Vector2(kInvSqrt2, Complex(0.0, kInvSqrt2)); }

double distance_up_to_phase(const Matrix2& a, const Matrix2& b) {
    const Complex overlap = (b.adjoint() * a).trace();
    const Complex g = std::abs(overlap) > 0.0 ? overlap / std::abs(overlap) : Complex(1.0);
    return (a - g * b).cwiseAbs().maxCoeff();
}

double unknown_phase_hwp_angle(double phi) { return -phi / 4 + kPi / 8; }
double feedforward_hwp_angle(double theta) { return theta / 4 + kPi / 8; }

double verify_unknown_phase_encoding(double phi) {
    const Matrix2 m = encoder(unknown_phase_hwp_angle(phi));
    const Complex lh = left_circular().dot(m * horizontal());
    const Complex rv = right_circular().dot(m * vertical());
    return wrap_phase(std::arg(lh / rv));
}

double verify_feedforward_encoding(double theta) {
    const Matrix2 m = encoder(feedforward_hwp_angle(theta));
    const Complex lh = left_circular().dot(m * horizontal());
    const Complex rv = right_circular().dot(m * vertical());
    return wrap_phase(std::arg(rv / lh));
}

JonesMatrix unknown_phase_stage(double phi) {
    return JonesMatrix::from_matrix(circular_readout() * encoder(unknown_phase_hwp_angle(phi)));
}

JonesMatrix feedforward_stage(double theta) {
    return JonesMatrix::from_matrix(circular_readout() * encoder(feedforward_hwp_angle(theta)));
}

double relative_phase(const JonesMatrix& j) {
    const Matrix2& m = j.matrix();
    if (std::abs(m(0, 1)) > 1e-10 || std::abs(m(1, 0)) > 1e-10) {
        throw std::invalid_argument("relative_phase needs a diagonal Jones matrix");
    }
    return wrap_phase(std::arg(m(0, 0) / m(1, 1)));
}

double verify_double_pass(double phi) { return relative_phase(unknown_phase_stage(phi) * unknown_phase_stage(phi)); }

double verify_combined_encoding(double phi, double theta) {
    return relative_phase(unknown_phase_stage(phi) * feedforward_stage(theta));
}

CMatrix logical_operator(int passes, double phi, double theta) {
    if (passes < 1) throw std::invalid_argument("passes must be >= 1");
    JonesMatrix j = feedforward_stage(theta);
    for (int k = 0; k < passes; ++k) j = unknown_phase_stage(phi) * j;
    // Logical |0> is the v arm, |1> the h arm.
    Eigen::Matrix2cd swap;
    swap << 0, 1, 1, 0;
    return swap * j.matrix() * swap;
}

double optics_probability_d(int passes, double phi, double theta) {
    if (passes < 1) throw std::invalid_argument("passes must be >= 1");
    Vector2 light = feedforward_stage(theta) * diagonal();
    for (int k = 0; k < passes; ++k) light = unknown_phase_stage(phi) * light;
    return std::norm(diagonal().dot(light));
}

double logical_probability_d(int passes, double phi, double theta) {
    const auto plus = PureState::from_amplitudes({kInvSqrt2, kInvSqrt2});
    DensityMatrix rho = DensityMatrix::from_pure(plus);
    rho = apply_on_qubit(reference_phase(theta), 0, rho);
    rho = apply_on_qubit(phase_gate(passes, phi), 0, rho);
    return measure_x(rho, 0, 0.0).probability_d;
}

std::vector<CalibrationRow> calibration_table(int points) {
    if (points < 1) throw std::invalid_argument("calibration table needs at least one point");
    std::vector<CalibrationRow> rows;
    for (double phase : uniform_phase_grid(points)) {
        const double u = verify_unknown_phase_encoding(phase);
        rows.push_back({"unknown", phase, WaveplateSetting::make(WaveplateKind::hwp, unknown_phase_hwp_angle(phase)).angle,
                        u, signed_wrap(u - phase)});
    }
    for (double phase : uniform_phase_grid(points)) {
        const double f = verify_feedforward_encoding(phase);
        rows.push_back({"feedforward", phase,
                        WaveplateSetting::make(WaveplateKind::hwp, feedforward_hwp_angle(phase)).angle, f,
                        signed_wrap(f - phase)});
    }
    return rows;
}

}  // namespace hlphase::optics
