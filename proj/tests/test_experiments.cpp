#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>

#include "nvspin/experiments.hpp"

using namespace nvspin;

namespace {

SystemParams figure2_params() {
    return SystemParams::from_transitions(angular_from_mhz(30.0), angular_from_mhz(5710.0));
}

std::vector<double> linspace(double stop, std::size_t n) {
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i)
        g[i] = stop * static_cast<double>(i) / static_cast<double>(n - 1);
    return g;
}

DriveConfig drive_for_lambda(const SystemParams& p, double lambda, double phi) {
    DriveConfig d;
    d.carrier = p.omega_minus();
    d.omega_w = lambda * p.omega_minus() / sqrt2;
    d.phi = phi;
    return d;
}

} // namespace

TEST_CASE("circular strong driving is harmonic and phase-independent") {
    const SystemParams p = figure2_params();
    const DriveConfig d = drive_for_lambda(p, 1.4, std::numbers::pi / 2.0);
    const double omega_r = sqrt2 * d.omega_w;
    const auto t_grid = linspace(2.0 * two_pi / omega_r, 120);

    auto check_trace = [&](int n_phases) {
        PhaseAverageSpec avg;
        avg.n_phases = n_phases;
        const RabiTrace tr = rabi_trace(p, d, t_grid, avg);
        double worst = 0.0;
        for (std::size_t i = 0; i < t_grid.size(); ++i) {
            const double expected = std::pow(std::cos(omega_r * t_grid[i] / 2.0), 2);
            worst = std::max(worst, std::abs(tr.p0()[i] - expected));
        }
        return worst;
    };
    CHECK(check_trace(1) < 1e-6);
    CHECK(check_trace(7) < 1e-6);
    CHECK(check_trace(40) < 1e-6);
}

TEST_CASE("circular realizations coincide pointwise") {
    const SystemParams p = figure2_params();
    const DriveConfig d = drive_for_lambda(p, 1.0, std::numbers::pi / 2.0);
    const auto t_grid = linspace(0.05, 60);
    PhaseAverageSpec avg;
    avg.n_phases = 12;
    const RabiTrace tr = rabi_trace(p, d, t_grid, avg, ModelKind::two_level, true);
    REQUIRE(tr.realizations.size() == 12);
    for (const auto& re : tr.realizations)
        for (std::size_t i = 0; i < t_grid.size(); ++i)
            CHECK(std::abs(re[i] - tr.realizations[0][i]) < 1e-6);
}

TEST_CASE("weak linear driving stays close to the RWA envelope") {
    const SystemParams p = figure2_params();
    const DriveConfig d = drive_for_lambda(p, 0.1, 0.0);
    // linear drive splits across both circular components; the co-rotating
    // part has weight 1/2, so the envelope frequency is omega_r / 2
    const double omega_r = sqrt2 * d.omega_w;
    const auto t_grid = linspace(two_pi / omega_r, 150);
    PhaseAverageSpec avg;
    avg.n_phases = 64;
    const RabiTrace tr = rabi_trace(p, d, t_grid, avg);
    double worst = 0.0;
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        const double expected = std::pow(std::cos(omega_r * t_grid[i] / (2.0 * sqrt2)), 2);
        worst = std::max(worst, std::abs(tr.p0()[i] - expected));
    }
    CHECK(worst <= 0.02);
}

TEST_CASE("rabi_trace is deterministic across thread counts") {
    const SystemParams p = figure2_params();
    const DriveConfig d = drive_for_lambda(p, 1.4, 0.0);
    const auto t_grid = linspace(0.08, 50);
    PhaseAverageSpec avg;
    avg.n_phases = 24;
    const RabiTrace a = rabi_trace(p, d, t_grid, avg, ModelKind::two_level, false, 1);
    const RabiTrace b = rabi_trace(p, d, t_grid, avg, ModelKind::two_level, false, 8);
    for (std::size_t i = 0; i < t_grid.size(); ++i)
        for (int k = 0; k < 2; ++k)
            CHECK(a.mean_populations[i][k] == b.mean_populations[i][k]);
}

TEST_CASE("phase scan: selective dip at 3pi/2 and doubling at pi/2") {
    const SystemParams p = figure2_params();
    // counter-rotating transfer at phi = 3pi/2 scales as (lambda/4)^2
    DriveConfig d = drive_for_lambda(p, 0.1, 0.0);
    const double omega_r = sqrt2 * d.omega_w;
    const auto t_grid = linspace(2.0 * two_pi / omega_r, 160);
    PhaseAverageSpec avg;
    avg.n_phases = 48;
    const std::vector<double> phis{std::numbers::pi / 2.0, 3.0 * std::numbers::pi / 2.0,
                                   3.0 * std::numbers::pi / 2.0 + two_pi};
    const PhaseScan scan = phase_scan(p, d, phis, t_grid, avg);

    // phi = 3pi/2 drives only the detuned |+1> branch: P0 barely moves
    double depth = 0.0;
    for (double v : scan.rows[1].p0()) depth = std::max(depth, 1.0 - v);
    CHECK(depth <= 0.02);

    // 2pi periodicity in phi
    for (std::size_t i = 0; i < t_grid.size(); ++i)
        CHECK(std::abs(scan.rows[1].p0()[i] - scan.rows[2].p0()[i]) < 1e-9);

    // phi = pi/2 runs at twice the linear-drive envelope frequency: its first
    // return to P0 = 1 happens at half the linear period
    const auto p0 = scan.rows[0].p0();
    const double t_circ = two_pi / omega_r;
    std::size_t i_half = 0;
    double best = 1e9;
    for (std::size_t i = 1; i < t_grid.size(); ++i)
        if (std::abs(t_grid[i] - t_circ) < best) {
            best = std::abs(t_grid[i] - t_circ);
            i_half = i;
        }
    CHECK(p0[i_half] > 0.98);
}

TEST_CASE("pi/2 calibration") {
    const SystemParams p = figure2_params();
    DriveConfig d = drive_for_lambda(p, 0.01, std::numbers::pi / 2.0);
    const double analytic = pi2_calibrate(p, d, CalibrationMode::analytic);
    CHECK(analytic == doctest::Approx(std::numbers::pi / (2.0 * sqrt2 * d.omega_w)));
    // circular on-resonance RWA drive flops at sqrt(2) Omega; the P0 = 1/2
    // crossing is a quarter flop
    const double numeric = pi2_calibrate(p, d, CalibrationMode::numeric);
    CHECK(numeric == doctest::Approx(analytic).epsilon(1e-3));
    DriveConfig off;
    off.carrier = p.omega_minus();
    CHECK_THROWS_AS(pi2_calibrate(p, off), calibration_error);
}

TEST_CASE("ramsey scan matches its closed form for circular drive") {
    SystemParams p;
    p.B_ext = 4.6;
    DriveConfig d;
    d.omega_w = angular_from_mhz(114.0);
    d.carrier = p.omega_minus() - angular_from_mhz(5.0);
    d.phi = std::numbers::pi / 2.0;
    RamseySpec spec;
    spec.tau_grid = linspace(1.2, 256);
    spec.hyperfine = HyperfineMode::off;
    const RamseyResult res = ramsey_scan(p, d, spec);
    const double dm = angular_from_mhz(5.0);
    for (std::size_t i = 0; i < res.taus.size(); ++i) {
        const double expected = 0.5 * (1.0 - std::sin(dm * res.taus[i]));
        CHECK(std::abs(res.closed_form[i] - expected) < 1e-9);
    }
    // the simulated sequence uses the same pulse phase twice, so it matches
    // the closed form in spectral content rather than pointwise
    auto dominant = [](const Spectrum& s) {
        REQUIRE(!s.peaks.empty());
        return *std::max_element(s.peaks.begin(), s.peaks.end(),
                                 [](const auto& a, const auto& b) { return a.second < b.second; });
    };
    const auto ps = dominant(spectrum(res.taus, res.simulated, SpectrumWindow::hann));
    const auto pc = dominant(spectrum(res.taus, res.closed_form, SpectrumWindow::hann));
    CHECK(std::abs(ps.first - 5.0) < 1.0);
    CHECK(std::abs(ps.second - pc.second) <= 0.1 * pc.second);
}

TEST_CASE("ramsey spectral weights follow the drive polarization") {
    SystemParams p;
    p.B_ext = 4.6;
    DriveConfig d;
    d.omega_w = angular_from_mhz(114.0);
    d.carrier = p.omega_minus() - angular_from_mhz(5.0);
    d.phi = 2.2;
    RamseySpec spec;
    spec.tau_grid = linspace(1024 * 0.012, 1025);
    spec.tau_grid.resize(1024);
    spec.hyperfine = HyperfineMode::off;
    const RamseyResult res = ramsey_scan(p, d, spec);
    const Detuning det = Detuning::from(p, d.carrier);
    const auto [em, ep] = epsilon_components(d.phi, d.phi_g);

    const Spectrum s = spectrum(res.taus, res.simulated, SpectrumWindow::hann);
    const PolarizationEstimate e = infer_polarization(s, det);
    CHECK(std::abs(e.eps_minus_sq - std::norm(em)) < 0.05);

    const Spectrum sc = spectrum(res.taus, res.closed_form, SpectrumWindow::hann);
    const PolarizationEstimate ec = infer_polarization(sc, det);
    // simulated and closed-form component ratios agree to 10%
    CHECK(std::abs(e.eps_minus_sq - ec.eps_minus_sq) <= 0.1 * ec.eps_minus_sq);
}

TEST_CASE("ramsey validation") {
    SystemParams p;
    p.B_ext = 4.6;
    DriveConfig d;
    d.omega_w = angular_from_mhz(114.0);
    d.carrier = p.omega_minus() - angular_from_mhz(5.0);
    RamseySpec spec;
    spec.tau_grid = {0.0, 0.1, 0.25};
    CHECK_THROWS_AS(ramsey_scan(p, d, spec), invalid_input_error);
    spec.tau_grid = linspace(10.0, 11);  // dtau = 1 us -> Nyquist 0.5 MHz < 30.76 MHz
    CHECK_THROWS_AS(ramsey_scan(p, d, spec), invalid_input_error);
}

TEST_CASE("pi-pulse sweep: circular drive stays on the ideal line") {
    const SystemParams p = figure2_params();
    SweepOptions opt;
    opt.averaging.n_phases = 1;  // circular traces are phase independent
    const std::vector<double> lambdas{0.1, 0.5, 1.0, 1.5, 2.0};
    const SweepResult sr = pi_pulse_sweep(p, PolarizationMode::circular, lambdas, opt);
    for (const auto& r : sr.records) {
        REQUIRE(r.ok);
        CHECK(r.fidelity >= 0.999);
        const double ideal = mhz_from_angular(sqrt2 * r.omega_w);
        CHECK(std::abs(r.omega_eff_mhz - ideal) / ideal <= 1e-3);
    }
}

TEST_CASE("pi-pulse sweep: linear drive degrades with lambda") {
    const SystemParams p = figure2_params();
    SweepOptions opt;
    opt.averaging.n_phases = 60;
    const std::vector<double> lambdas{0.2, 1.4};
    const SweepResult sr = pi_pulse_sweep(p, PolarizationMode::linear, lambdas, opt, 4);
    REQUIRE(sr.records[0].ok);
    REQUIRE(sr.records[1].ok);
    CHECK(sr.records[0].fidelity > sr.records[1].fidelity);
    CHECK(sr.records[1].fidelity < 0.999);
    CHECK_THROWS_AS(pi_pulse_sweep(p, PolarizationMode::linear, {0.0}, opt),
                    invalid_input_error);
}

TEST_CASE("phase sampling specs") {
    PhaseAverageSpec g;
    g.n_phases = 4;
    const auto ph = g.phases();
    REQUIRE(ph.size() == 4);
    CHECK(ph[0] == 0.0);
    CHECK(ph[2] == doctest::Approx(std::numbers::pi));
    PhaseAverageSpec r;
    r.n_phases = 16;
    r.sampling = PhaseSampling::seeded_random;
    r.seed = 42;
    const auto a = r.phases();
    const auto b = r.phases();
    REQUIRE(a.size() == 16);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i] == b[i]);
        CHECK(a[i] >= 0.0);
        CHECK(a[i] < two_pi);
    }
}

TEST_CASE("axial scenario preserves the requested global phase") {
    const SystemParams p = figure2_params();
    DriveConfig d = drive_for_lambda(p, 1.4, 0.0);
    d.omega_z = 1.67 * d.omega_w;
    d.phi_g = 1.3;
    const auto t_grid = linspace(0.1, 40);
    const PhaseScan scan =
        axial_scenario(p, d, {std::numbers::pi, 3.0 * std::numbers::pi / 2.0}, t_grid, 2);
    REQUIRE(scan.rows.size() == 2);
    // the axial term enters through phi_g, so the two rows must differ from a
    // phi_g = 0 run
    DriveConfig d0 = d;
    d0.phi_g = 0.0;
    const PhaseScan ref = axial_scenario(p, d0, {std::numbers::pi}, t_grid, 1);
    double diff = 0.0;
    for (std::size_t i = 0; i < t_grid.size(); ++i)
        diff = std::max(diff, std::abs(scan.rows[0].p0()[i] - ref.rows[0].p0()[i]));
    CHECK(diff > 1e-3);
}
