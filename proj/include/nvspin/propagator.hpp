#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "nvspin/errors.hpp"
#include "nvspin/model.hpp"

// Unitary time evolution of 2- and 3-dimensional time-dependent Hamiltonians.
// Each substep applies an exact matrix exponential, so unitarity holds to
// machine precision independent of step size; accuracy of the time dependence
// is controlled by the substep rule below.

namespace nvspin {

enum class StepMethod {
    midpoint_exponential,        // 2nd-order Magnus, default
    fourth_order_commutator_free // two-exponential CF4 scheme
};

struct PropagationSettings {
    double dt_max = 1e-3;          // us
    int substeps_per_period = 200; // >= 50
    StepMethod method = StepMethod::midpoint_exponential;
    double omega_max = 0.0;        // largest angular frequency present, rad/us

    // effective step = min(dt_max, T_fast / substeps_per_period)
    double effective_step() const {
        if (substeps_per_period < 50)
            throw config_error("PropagationSettings: substeps_per_period must be >= 50");
        if (!(dt_max > 0.0)) throw config_error("PropagationSettings: dt_max must be > 0");
        double step = dt_max;
        if (omega_max > 0.0) step = std::min(step, two_pi / omega_max / substeps_per_period);
        return step;
    }
};

struct Trajectory {
    std::vector<double> times;                // us, strictly increasing, starts at 0
    std::vector<State> states;                // unit norm
    std::vector<std::vector<double>> populations;

    // Population of basis slot `level` at every stored time.
    std::vector<double> population(int level) const {
        std::vector<double> out(populations.size());
        for (std::size_t i = 0; i < populations.size(); ++i) out[i] = populations[i][level];
        return out;
    }
};

// exp(-i h dt): closed sigma-vector formula for 2x2, Hermitian
// eigendecomposition for 3x3.
inline Matrix step_unitary(const HamiltonianSnapshot& h, double dt) {
    if (!(dt > 0.0)) throw invalid_input_error("step_unitary: dt must be > 0");
    const Matrix& m = h.matrix;
    if (!is_hermitian(m, 1e-12))
        throw invalid_input_error("step_unitary: matrix is not Hermitian");

    if (h.dim() == 2) {
        const double d0 = 0.5 * std::real(m(0, 0) + m(1, 1));
        const double az = 0.5 * std::real(m(0, 0) - m(1, 1));
        const double ax = std::real(m(0, 1));
        const double ay = -std::imag(m(0, 1));
        const double r = std::sqrt(ax * ax + ay * ay + az * az);
        Matrix u(2, 2);
        const cplx phase = std::exp(-iu * d0 * dt);
        if (r < 1e-300) {
            u.setIdentity();
            u *= phase;
            return u;
        }
        const double c = std::cos(r * dt), s = std::sin(r * dt);
        const double nx = ax / r, ny = ay / r, nz = az / r;
        u(0, 0) = phase * (c - iu * s * nz);
        u(0, 1) = phase * (-iu * s * cplx(nx, -ny));
        u(1, 0) = phase * (-iu * s * cplx(nx, ny));
        u(1, 1) = phase * (c + iu * s * nz);
        return u;
    }

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3cd> es(m);
    Eigen::Vector3cd ph;
    for (int k = 0; k < 3; ++k) ph(k) = std::exp(-iu * es.eigenvalues()(k) * dt);
    Eigen::Matrix3cd u = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
    return u;
}

namespace detail {

inline void check_initial_state(const State& psi0) {
    if (std::abs(psi0.norm() - 1.0) > 1e-10)
        throw invalid_input_error("propagate: initial state must be normalized");
}

template <typename HFn>
State advance(HFn& h_fn, State psi, double t0, double t1, double step, StepMethod method) {
    const double span = t1 - t0;
    const int n = std::max(1, static_cast<int>(std::ceil(span / step)));
    const double h = span / n;
    // Gauss-Legendre nodes and CF4 weights
    static const double c1 = 0.5 - std::sqrt(3.0) / 6.0;
    static const double c2 = 0.5 + std::sqrt(3.0) / 6.0;
    static const double a1 = 0.25 - std::sqrt(3.0) / 6.0;
    static const double a2 = 0.25 + std::sqrt(3.0) / 6.0;
    for (int k = 0; k < n; ++k) {
        const double tk = t0 + k * h;
        if (method == StepMethod::midpoint_exponential) {
            psi = step_unitary(h_fn(tk + 0.5 * h), h) * psi;
        } else {
            const Matrix h1 = h_fn(tk + c1 * h).matrix;
            const Matrix h2 = h_fn(tk + c2 * h).matrix;
            const HamiltonianSnapshot first{a1 * h2 + a2 * h1};
            const HamiltonianSnapshot second{a1 * h1 + a2 * h2};
            psi = step_unitary(second, h) * (step_unitary(first, h) * psi);
        }
    }
    return psi;
}

} // namespace detail

// Piecewise evolution of psi0 under h_fn, states stored at the requested
// grid times. Deterministic for fixed inputs.
template <typename HFn>
Trajectory propagate(HFn&& h_fn, const State& psi0, const std::vector<double>& t_grid,
                     const PropagationSettings& settings) {
    detail::check_initial_state(psi0);
    if (t_grid.empty() || t_grid.front() != 0.0)
        throw invalid_input_error("propagate: time grid must start at 0");
    for (std::size_t i = 1; i < t_grid.size(); ++i)
        if (!(t_grid[i] > t_grid[i - 1]))
            throw invalid_input_error("propagate: time grid must be strictly increasing");
    const double step = settings.effective_step();
    if (step < 1e-9) throw config_error("propagate: required substep below 1e-9 us");

    Trajectory traj;
    traj.times = t_grid;
    traj.states.reserve(t_grid.size());
    traj.populations.reserve(t_grid.size());
    State psi = psi0;
    auto store = [&](const State& s) {
        traj.states.push_back(s);
        std::vector<double> pop(s.size());
        for (int k = 0; k < s.size(); ++k) pop[k] = std::norm(s(k));
        traj.populations.push_back(std::move(pop));
    };
    store(psi);
    for (std::size_t i = 1; i < t_grid.size(); ++i) {
        psi = detail::advance(h_fn, std::move(psi), t_grid[i - 1], t_grid[i], step,
                              settings.method);
        store(psi);
    }
    return traj;
}

} // namespace nvspin
