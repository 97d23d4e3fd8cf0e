#pragma once

#include <atomic>
#include <cmath>
#include <functional>
#include <random>
#include <thread>
#include <vector>

#include "nvspin/analysis.hpp"
#include "nvspin/model.hpp"
#include "nvspin/propagator.hpp"

// Pulse-sequence builders: phase-scanned Rabi maps, global-phase-averaged
// strong-driving traces, broadband Ramsey scans, pi-pulse sweeps and the
// large-axial-field scenario.
//
// Every (phase, global-phase, hyperfine-line) cell is an independent
// propagation; cells may run concurrently and are reduced in fixed index
// order, so results do not depend on the thread count.

namespace nvspin {

enum class ModelKind { two_level, three_level };
enum class PhaseSampling { uniform_grid, seeded_random };
enum class CalibrationMode { numeric, analytic };
enum class PolarizationMode { circular, linear };
enum class HyperfineMode { off, three_line };

struct PhaseAverageSpec {
    int n_phases = 300;
    PhaseSampling sampling = PhaseSampling::uniform_grid;
    std::uint64_t seed = 0;

    std::vector<double> phases() const {
        if (n_phases < 1) throw invalid_input_error("PhaseAverageSpec: n_phases must be >= 1");
        std::vector<double> out(static_cast<std::size_t>(n_phases));
        if (sampling == PhaseSampling::uniform_grid) {
            for (int k = 0; k < n_phases; ++k)
                out[k] = two_pi * static_cast<double>(k) / static_cast<double>(n_phases);
        } else {
            std::mt19937_64 rng(seed);
            std::uniform_real_distribution<double> dist(0.0, two_pi);
            for (auto& p : out) p = dist(rng);
        }
        return out;
    }
};

struct RamseySpec {
    std::vector<double> tau_grid;  // us, uniform
    HyperfineMode hyperfine = HyperfineMode::off;
    double splitting = angular_from_mhz(2.16);  // rad/us
};

namespace detail {

template <typename F>
void parallel_for(std::size_t n, int threads, F&& body) {
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
    };
    const int nt = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(threads), n));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nt));
    for (int t = 0; t < nt; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

inline PropagationSettings drive_settings(const SystemParams& p, const DriveConfig& d,
                                          const PropagationSettings& base,
                                          ModelKind model = ModelKind::two_level) {
    PropagationSettings s = base;
    s.omega_max = std::max({2.0 * d.carrier, sqrt2 * d.omega_w, d.omega_z});
    if (model == ModelKind::three_level) {
        // the detunings of both transitions are dynamical scales here
        const Detuning det = Detuning::from(p, d.carrier);
        s.omega_max =
            std::max({s.omega_max, std::abs(det.delta_minus), std::abs(det.delta_plus)});
    }
    return s;
}

inline State ground_state(int dim) {
    State psi(dim);
    psi.setZero();
    psi(dim == 2 ? 0 : 1) = 1.0;  // |0> slot
    return psi;
}

} // namespace detail

inline int level0_index(int dim) { return dim == 2 ? 0 : 1; }
inline int level_minus1_index(int dim) { return dim == 2 ? 1 : 0; }

struct RabiTrace {
    std::vector<double> times;
    int dim = 2;
    std::vector<std::vector<double>> mean_populations;  // [time][level]
    std::vector<std::vector<double>> realizations;      // [phase][time], P0, on demand

    std::vector<double> p0() const {
        std::vector<double> out(mean_populations.size());
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = mean_populations[i][level0_index(dim)];
        return out;
    }
};

struct PhaseScan {
    std::vector<double> phis;
    std::vector<RabiTrace> rows;
};

struct RamseyResult {
    std::vector<double> taus;
    std::vector<double> simulated;    // P0(tau)
    std::vector<double> closed_form;  // broadband Ramsey formula on the same grid
    double t_pi2 = 0.0;               // us
};

// Mean over phi_g samples of the driven populations, two- or three-level
// model. Per-realization P0 traces are retained when keep_realizations.
inline RabiTrace rabi_trace(const SystemParams& p, const DriveConfig& d,
                            const std::vector<double>& t_grid, const PhaseAverageSpec& avg,
                            ModelKind model = ModelKind::two_level,
                            bool keep_realizations = false, int threads = 1,
                            const PropagationSettings& base = {}) {
    const auto phases = avg.phases();
    const PropagationSettings settings = detail::drive_settings(p, d, base, model);
    const int dim = model == ModelKind::two_level ? 2 : 3;

    std::vector<std::vector<std::vector<double>>> pops(phases.size());
    detail::parallel_for(phases.size(), threads, [&](std::size_t i) {
        DriveConfig di = d;
        di.phi_g = phases[i];
        di.normalize_phases();
        auto h_fn = [&p, di, model](double t) {
            return model == ModelKind::two_level ? tls_hamiltonian(t, p, di)
                                                 : rotating_frame_hamiltonian(t, p, di);
        };
        pops[i] = propagate(h_fn, detail::ground_state(dim), t_grid, settings).populations;
    });

    RabiTrace out;
    out.times = t_grid;
    out.dim = dim;
    out.mean_populations.assign(t_grid.size(), std::vector<double>(dim, 0.0));
    for (std::size_t i = 0; i < phases.size(); ++i)
        for (std::size_t k = 0; k < t_grid.size(); ++k)
            for (int l = 0; l < dim; ++l)
                out.mean_populations[k][l] += pops[i][k][l] / static_cast<double>(phases.size());
    if (keep_realizations) {
        out.realizations.resize(phases.size());
        for (std::size_t i = 0; i < phases.size(); ++i) {
            out.realizations[i].resize(t_grid.size());
            for (std::size_t k = 0; k < t_grid.size(); ++k)
                out.realizations[i][k] = pops[i][k][level0_index(dim)];
        }
    }
    return out;
}

// Row per relative phase phi; each row is a rabi_trace.
inline PhaseScan phase_scan(const SystemParams& p, const DriveConfig& d_base,
                            const std::vector<double>& phi_grid,
                            const std::vector<double>& t_grid, const PhaseAverageSpec& avg,
                            ModelKind model = ModelKind::two_level, int threads = 1,
                            const PropagationSettings& base = {}) {
    PhaseScan scan;
    scan.phis = phi_grid;
    scan.rows.resize(phi_grid.size());
    for (std::size_t r = 0; r < phi_grid.size(); ++r) {
        DriveConfig d = d_base;
        d.phi = phi_grid[r];
        scan.rows[r] = rabi_trace(p, d, t_grid, avg, model, false, threads, base);
    }
    return scan;
}

// Earliest time at which P0 crosses 1/2 from |0> under the RWA drive
// (numeric mode), or the rotation-angle condition sqrt(2) Omega t = pi/2
// (analytic mode).
inline double pi2_calibrate(const SystemParams& p, const DriveConfig& d,
                            CalibrationMode mode = CalibrationMode::numeric) {
    if (!(d.omega_w > 0.0)) throw calibration_error("pi2_calibrate: drive amplitude is zero");
    if (mode == CalibrationMode::analytic) return std::numbers::pi / (2.0 * sqrt2 * d.omega_w);

    const HamiltonianSnapshot h = rwa_hamiltonian(p, d);
    const double nominal_period = two_pi / (sqrt2 * d.omega_w);
    const int steps_per_period = 512;
    const double dt = nominal_period / steps_per_period;
    const Matrix u = step_unitary(h, dt);
    State psi = detail::ground_state(3);
    double prev = 1.0;
    for (int k = 1; k <= 10 * steps_per_period; ++k) {
        psi = u * psi;
        const double p0 = std::norm(psi(1));
        if (p0 <= 0.5) {
            // linear interpolation of the crossing inside the last step
            const double frac = (prev - 0.5) / std::max(prev - p0, 1e-300);
            return (static_cast<double>(k - 1) + frac) * dt;
        }
        prev = p0;
    }
    throw calibration_error("pi2_calibrate: no P0 = 1/2 crossing within 10 nominal periods");
}

namespace detail {

inline double ramsey_closed_form(const Polarization& eps, double dm, double dp, double tau) {
    const double am = std::norm(eps.eps_minus);
    const double ap = std::norm(eps.eps_plus);
    return 0.5 * (1.0 - am * std::sin(dm * tau) - ap * std::sin(dp * tau) -
                  am * ap * (std::cos((dp - dm) * tau) - 1.0));
}

} // namespace detail

// pulse - wait(tau) - pulse in the rotating frame at fixed detunings,
// optionally averaged over three hyperfine detuning offsets, next to the
// broadband closed form evaluated on the same grid.
inline RamseyResult ramsey_scan(const SystemParams& p, const DriveConfig& d,
                                const RamseySpec& spec) {
    const auto& taus = spec.tau_grid;
    if (taus.size() < 2) throw invalid_input_error("ramsey_scan: tau grid too short");
    const double dtau = taus[1] - taus[0];
    for (std::size_t i = 1; i < taus.size(); ++i)
        if (std::abs((taus[i] - taus[i - 1]) - dtau) > 1e-6 * dtau)
            throw invalid_input_error("ramsey_scan: tau grid must be uniform");
    const Detuning det = Detuning::from(p, d.carrier);
    const double nyquist = 1.0 / (2.0 * dtau);  // MHz
    const double fmax = std::max({std::abs(det.delta_minus), std::abs(det.delta_plus),
                                  std::abs(det.delta_plus - det.delta_minus)}) /
                        two_pi;
    if (nyquist <= fmax)
        throw invalid_input_error("ramsey_scan: tau spacing violates the Nyquist limit");

    std::vector<double> offsets{0.0};
    if (spec.hyperfine == HyperfineMode::three_line)
        offsets = {-spec.splitting, 0.0, spec.splitting};

    RamseyResult res;
    res.taus = taus;
    res.t_pi2 = pi2_calibrate(p, d);
    res.simulated.assign(taus.size(), 0.0);
    res.closed_form.assign(taus.size(), 0.0);
    const Polarization eps = epsilon_components(d.phi, d.phi_g);
    const double weight = 1.0 / static_cast<double>(offsets.size());

    for (double a : offsets) {
        Matrix h = rwa_hamiltonian(p, d).matrix;
        h(0, 0) += a;
        h(2, 2) += a;
        const Matrix u_pulse = step_unitary({h}, res.t_pi2);
        const double dm = det.delta_minus + a;
        const double dp = det.delta_plus + a;
        for (std::size_t i = 0; i < taus.size(); ++i) {
            Matrix u_free(3, 3);
            u_free.setZero();
            u_free(0, 0) = std::exp(-iu * dm * taus[i]);
            u_free(1, 1) = 1.0;
            u_free(2, 2) = std::exp(-iu * dp * taus[i]);
            const State psi = u_pulse * (u_free * (u_pulse * detail::ground_state(3)));
            res.simulated[i] += weight * std::norm(psi(1));
            res.closed_form[i] += weight * detail::ramsey_closed_form(eps, dm, dp, taus[i]);
        }
    }
    return res;
}

struct SweepOptions {
    double axial_ratio = 0.0;          // Omega_z / Omega
    double horizon_rabi_periods = 2.5; // trace length in units of 2 pi / (sqrt2 Omega)
    std::size_t trace_points = 600;
    double min_prominence = 0.05;
    PhaseAverageSpec averaging{};
    PropagationSettings propagation{};
};

// lambda is the amplitude in calibrated units: the weak-drive Rabi frequency
// of the chosen polarization divided by omega_minus. The per-wire amplitude
// that realizes it is lambda * omega_minus / sqrt(2) for circular drive and
// lambda * omega_minus for linear drive, so that the ideal effective-Rabi
// line is Omega_eff = lambda * omega_minus for both. The axial ratio is
// Omega_z over the same calibrated amplitude. For each lambda: averaged
// trace, first minimum, fidelity and effective Rabi frequency. Detection
// failures are flagged and the sweep continues.
inline SweepResult pi_pulse_sweep(const SystemParams& p, PolarizationMode mode,
                                  const std::vector<double>& lambda_grid,
                                  const SweepOptions& opt = {}, int threads = 1) {
    for (double l : lambda_grid)
        if (!(l > 0.0)) throw invalid_input_error("pi_pulse_sweep: lambda must be > 0");
    const double wl = p.omega_minus();

    SweepResult sr;
    sr.omega_larmor = wl;
    sr.records.resize(lambda_grid.size());
    for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
        const double lambda = lambda_grid[i];
        const double omega_nominal = lambda * wl;
        DriveConfig d;
        d.omega_w = mode == PolarizationMode::circular ? omega_nominal / sqrt2 : omega_nominal;
        d.carrier = wl;
        d.phi = mode == PolarizationMode::circular ? std::numbers::pi / 2.0 : 0.0;
        d.omega_z = opt.axial_ratio * omega_nominal;

        const double rabi_period = two_pi / omega_nominal;
        std::vector<double> t_grid(opt.trace_points);
        for (std::size_t k = 0; k < opt.trace_points; ++k)
            t_grid[k] = opt.horizon_rabi_periods * rabi_period * static_cast<double>(k) /
                        static_cast<double>(opt.trace_points - 1);

        const RabiTrace tr = rabi_trace(p, d, t_grid, opt.averaging, ModelKind::two_level,
                                        false, threads, opt.propagation);
        SweepRecord& rec = sr.records[i];
        rec.lambda = lambda;
        rec.omega_w = d.omega_w;
        rec.omega_nominal = omega_nominal;
        try {
            const FirstMinimum fm = first_minimum(tr.times, tr.p0(), opt.min_prominence);
            rec.t_m = fm.t;
            rec.fidelity = 1.0 - fm.value;
            rec.omega_eff_mhz = 1.0 / (2.0 * fm.t);
            rec.n_minima = fm.count;
        } catch (const detection_error&) {
            rec.ok = false;
        }
    }
    return sr;
}

// Phase scan with the axial term enabled, single global-phase realization
// taken from d (no phi_g ensemble).
inline PhaseScan axial_scenario(const SystemParams& p, const DriveConfig& d,
                                const std::vector<double>& phi_grid,
                                const std::vector<double>& t_grid, int threads = 1,
                                const PropagationSettings& base = {}) {
    PhaseScan scan;
    scan.phis = phi_grid;
    scan.rows.resize(phi_grid.size());
    detail::parallel_for(phi_grid.size(), threads, [&](std::size_t r) {
        DriveConfig dr = d;
        dr.phi = phi_grid[r];
        dr.normalize_phases();
        const PropagationSettings settings = detail::drive_settings(p, dr, base);
        auto h_fn = [&p, dr](double t) { return tls_hamiltonian(t, p, dr); };
        const Trajectory traj = propagate(h_fn, detail::ground_state(2), t_grid, settings);
        RabiTrace& row = scan.rows[r];
        row.times = t_grid;
        row.dim = 2;
        row.mean_populations = traj.populations;
    });
    return scan;
}

} // namespace nvspin
