#pragma once

#include <complex>
#include <string>

#include <Eigen/Dense>

#include "nvspin/errors.hpp"
#include "nvspin/units.hpp"

// Domain types and Hamiltonian builders for a single NV ground-state spin
// driven by two orthogonal microwave wires plus an optional axial component.
//
// Conventions used throughout:
//   * three-level basis order (|-1>, |0>, |+1>), two-level basis (|0>, |-1>)
//   * Sz = diag(-1, 0, +1); the static part of the lab Hamiltonian is
//     D*Sz^2 + gamma*B_ext*Sz, so the |-1> slot sits at omega_minus =
//     D - gamma*B_ext, the transition addressed by the eps_minus drive
//     component.  This keeps the lab frame, the rotating frame and the
//     two-level reduction population-consistent.
//   * all builders are pure functions; no shared state.

namespace nvspin {

using cplx = std::complex<double>;
using Matrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;
using State = Eigen::Matrix<cplx, Eigen::Dynamic, 1, 0, 3, 1>;

inline constexpr cplx iu{0.0, 1.0};
inline const double sqrt2 = std::sqrt(2.0);

// Static NV physics. Angular frequencies in rad/us, field in gauss.
struct SystemParams {
    double D = angular_from_mhz(2870.0);      // zero-field splitting
    double gamma = angular_from_mhz(2.8);     // rad/us per gauss
    double B_ext = 0.0;                       // gauss

    double omega_minus() const { return D - gamma * B_ext; }  // |0> <-> |-1>
    double omega_plus() const { return D + gamma * B_ext; }   // |0> <-> |+1>

    void validate() const {
        if (!(D > 0.0)) throw invalid_input_error("SystemParams: D must be > 0");
        if (!(gamma > 0.0)) throw invalid_input_error("SystemParams: gamma must be > 0");
        if (!(B_ext >= 0.0)) throw invalid_input_error("SystemParams: B_ext must be >= 0");
    }

    // Build from the two transition frequencies instead of (D, B_ext).
    static SystemParams from_transitions(double omega_minus, double omega_plus,
                                         double gamma = angular_from_mhz(2.8)) {
        SystemParams p;
        p.D = 0.5 * (omega_plus + omega_minus);
        p.gamma = gamma;
        p.B_ext = 0.5 * (omega_plus - omega_minus) / gamma;
        p.validate();
        return p;
    }
};

// Microwave drive. omega_w is the per-wire amplitude gamma*B_wire.
struct DriveConfig {
    double omega_w = 0.0;   // per-wire Rabi amplitude, rad/us
    double carrier = 0.0;   // MW angular frequency, rad/us
    double phi = 0.0;       // relative phase between the wires, [0, 2pi)
    double phi_g = 0.0;     // global phase at the pulse edge, [0, 2pi)
    double omega_z = 0.0;   // axial amplitude, rad/us

    void normalize_phases() {
        phi = wrap_angle(phi);
        phi_g = wrap_angle(phi_g);
    }

    void validate() const {
        if (!(omega_w >= 0.0)) throw invalid_input_error("DriveConfig: omega_w must be >= 0");
        if (!(omega_z >= 0.0)) throw invalid_input_error("DriveConfig: omega_z must be >= 0");
        if (!(carrier > 0.0)) throw invalid_input_error("DriveConfig: carrier must be > 0");
    }
};

// Complex pair decomposing the drive into co-/counter-rotating components.
struct Polarization {
    cplx eps_minus;
    cplx eps_plus;
};

struct Detuning {
    double delta_minus = 0.0;  // omega_minus - carrier
    double delta_plus = 0.0;   // omega_plus - carrier

    static Detuning from(const SystemParams& p, double carrier) {
        return {p.omega_minus() - carrier, p.omega_plus() - carrier};
    }
};

// A Hermitian matrix evaluated at one instant. dim 3: (|-1>,|0>,|+1>);
// dim 2: (|0>,|-1>).
struct HamiltonianSnapshot {
    Matrix matrix;
    int dim() const { return static_cast<int>(matrix.rows()); }
};

inline bool is_hermitian(const Matrix& m, double rel_tol = 1e-13) {
    const double scale = std::max(1.0, m.norm());
    return (m - m.adjoint()).norm() <= rel_tol * scale;
}

// eps_-  = e^{+i phi_g} (1 - i e^{+i phi}) / 2
// eps_+  = e^{-i phi_g} (1 - i e^{-i phi}) / 2
// Satisfies |eps_-|^2 + |eps_+|^2 = 1 for all phases.
inline Polarization epsilon_components(double phi, double phi_g) {
    const cplx em = std::exp(iu * phi_g) * (1.0 - iu * std::exp(iu * phi)) * 0.5;
    const cplx ep = std::exp(-iu * phi_g) * (1.0 - iu * std::exp(-iu * phi)) * 0.5;
    return {em, ep};
}

namespace detail {

inline Matrix spin1_sz() {
    Matrix m(3, 3);
    m.setZero();
    m(0, 0) = -1.0;
    m(2, 2) = 1.0;
    return m;
}

} // namespace detail

// Full lab-frame S=1 Hamiltonian: diagonal (omega_-, 0, omega_+) plus the
// transverse drive written as the exact inverse frame image of the rotating
// builder below, i.e. H_lab = U^dag H_rot U + w diag(1,0,1) with
// U = e^{i w t diag(1,0,1)}. At t = 0 the transverse entries reduce to
// (Omega/sqrt2)(eps_- + eps_+), the cosine-drive value; defining the pair
// this way makes lab- and rotating-frame populations agree identically
// rather than only to leading order in Omega/w.
inline HamiltonianSnapshot lab_hamiltonian(double t, const SystemParams& p, const DriveConfig& d) {
    p.validate();
    d.validate();
    const auto [em, ep] = epsilon_components(d.phi, d.phi_g);
    const double g = d.omega_w / sqrt2;
    const cplx rot = std::exp(-2.0 * iu * d.carrier * t);
    Matrix h(3, 3);
    h.setZero();
    h(0, 0) = p.omega_minus();
    h(2, 2) = p.omega_plus();
    const cplx c01 = std::exp(-iu * d.carrier * t) * g * (em + ep * rot);
    const cplx c12 = std::exp(iu * d.carrier * t) * g * (ep + em * std::conj(rot));
    h(0, 1) = c01;
    h(1, 0) = std::conj(c01);
    h(1, 2) = c12;
    h(2, 1) = std::conj(c12);
    const double cz = d.omega_z * std::cos(d.carrier * t + d.phi_g);
    h += cz * detail::spin1_sz();
    return {h};
}

// Rotating-frame Hamiltonian: diag(delta_-, 0, delta_+) plus the co-rotating
// block (eps_-, eps_+) and, when with_counter_rotating, the counter-rotating
// block with e^{+-2 i w t} factors. The axial term commutes with the frame
// rotation and is carried over unchanged.
inline HamiltonianSnapshot rotating_frame_hamiltonian(double t, const SystemParams& p,
                                                      const DriveConfig& d,
                                                      bool with_counter_rotating = true) {
    p.validate();
    d.validate();
    const auto [em, ep] = epsilon_components(d.phi, d.phi_g);
    const Detuning det = Detuning::from(p, d.carrier);
    const double g = d.omega_w / sqrt2;

    Matrix h(3, 3);
    h.setZero();
    h(0, 0) = det.delta_minus;
    h(2, 2) = det.delta_plus;
    cplx c01 = g * em;
    cplx c12 = g * ep;
    if (with_counter_rotating) {
        const cplx rot = std::exp(-2.0 * iu * d.carrier * t);
        c01 += g * ep * rot;
        c12 += g * em * std::conj(rot);
    }
    h(0, 1) = c01;
    h(1, 0) = std::conj(c01);
    h(1, 2) = c12;
    h(2, 1) = std::conj(c12);
    if (d.omega_z != 0.0) {
        const double cz = d.omega_z * std::cos(d.carrier * t + d.phi_g);
        h(0, 0) -= cz;
        h(2, 2) += cz;
    }
    return {h};
}

// Time-independent RWA Hamiltonian (counter-rotating block dropped).
inline HamiltonianSnapshot rwa_hamiltonian(const SystemParams& p, const DriveConfig& d) {
    DriveConfig dd = d;
    dd.omega_z = 0.0;
    return rotating_frame_hamiltonian(0.0, p, dd, /*with_counter_rotating=*/false);
}

// Two-level reduction on (|0>, |-1>) for a drive resonant with omega_minus:
//   <-1|H|0>  = (Omega/sqrt(2)) (eps_- + eps_+ e^{-2 i w t})
//   diagonal  = Omega_z cos(w t + phi_g) diag(0, -1)
inline HamiltonianSnapshot tls_hamiltonian(double t, const SystemParams& p, const DriveConfig& d) {
    p.validate();
    d.validate();
    const double wl = p.omega_minus();
    if (std::abs(d.carrier - wl) > 1e-9 * std::max(1.0, std::abs(wl)))
        throw invalid_input_error("tls_hamiltonian: carrier must equal omega_minus");
    const auto [em, ep] = epsilon_components(d.phi, d.phi_g);
    const double g = d.omega_w / sqrt2;
    const cplx lower = g * (em + ep * std::exp(-2.0 * iu * wl * t));

    Matrix h(2, 2);
    h.setZero();
    h(1, 0) = lower;
    h(0, 1) = std::conj(lower);
    if (d.omega_z != 0.0) h(1, 1) = -d.omega_z * std::cos(wl * t + d.phi_g);
    return {h};
}

} // namespace nvspin
