#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "nvspin/errors.hpp"
#include "nvspin/model.hpp"

// Signal analysis: amplitude spectra of Ramsey traces, peak extraction,
// polarization inference, first-minimum detection and sweep-curve assembly.

namespace nvspin {

enum class SpectrumWindow { none, hann };

struct Spectrum {
    std::vector<double> freq_mhz;   // [0, Nyquist]
    std::vector<double> amplitude;  // one-sided, sine-amplitude normalized
    std::vector<std::pair<double, double>> peaks;  // (frequency, amplitude)

    double resolution_mhz() const { return freq_mhz.size() > 1 ? freq_mhz[1] : 0.0; }
    double noise_floor() const {
        if (amplitude.size() < 2) return 0.0;
        std::vector<double> a(amplitude.begin() + 1, amplitude.end());
        std::nth_element(a.begin(), a.begin() + a.size() / 2, a.end());
        return a[a.size() / 2];
    }
};

struct PolarizationEstimate {
    double eps_minus_sq = 0.0;  // in [0, 1]
    double uncertainty = 0.0;
    double residual = 0.0;      // product-peak consistency check
};

struct FirstMinimum {
    double t = 0.0;      // us, parabolic sub-sample refinement
    double value = 0.0;
    int count = 0;       // number of qualifying minima in the trace
};

// DFT of the mean-subtracted trace; one-sided amplitudes scaled so that a
// pure a*sin(2 pi f t) input yields peak amplitude a (window gain
// compensated). Time in us, frequency in MHz.
inline Spectrum spectrum(const std::vector<double>& times, const std::vector<double>& values,
                         SpectrumWindow window = SpectrumWindow::none) {
    const std::size_t n = values.size();
    if (n < 16 || times.size() != n)
        throw invalid_input_error("spectrum: need a trace of at least 16 samples");
    const double dt = times[1] - times[0];
    for (std::size_t i = 1; i < n; ++i)
        if (std::abs((times[i] - times[i - 1]) - dt) > 1e-6 * dt)
            throw invalid_input_error("spectrum: time grid must be uniform");

    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(n);

    std::vector<double> w(n, 1.0);
    if (window == SpectrumWindow::hann)
        for (std::size_t i = 0; i < n; ++i)
            w[i] = 0.5 * (1.0 - std::cos(two_pi * static_cast<double>(i) / static_cast<double>(n - 1)));
    double wsum = 0.0;
    for (double x : w) wsum += x;

    Spectrum s;
    const std::size_t nbins = n / 2 + 1;
    s.freq_mhz.resize(nbins);
    s.amplitude.resize(nbins);
    for (std::size_t k = 0; k < nbins; ++k) {
        cplx acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double arg = -two_pi * static_cast<double>(k) * static_cast<double>(i) /
                               static_cast<double>(n);
            acc += (values[i] - mean) * w[i] * std::exp(iu * arg);
        }
        s.freq_mhz[k] = static_cast<double>(k) / (static_cast<double>(n) * dt);
        const bool edge = (k == 0) || (2 * k == n);
        s.amplitude[k] = (edge ? 1.0 : 2.0) * std::abs(acc) / wsum;
    }

    const double floor = std::max(1e-12, 3.0 * s.noise_floor());
    for (std::size_t k = 1; k + 1 < nbins; ++k)
        if (s.amplitude[k] > s.amplitude[k - 1] && s.amplitude[k] >= s.amplitude[k + 1] &&
            s.amplitude[k] >= floor)
            s.peaks.emplace_back(s.freq_mhz[k], s.amplitude[k]);
    return s;
}

namespace detail {

// Largest bin inside the window, parabolically refined through its
// neighbors to undo the scalloping loss of off-bin lines.
inline std::optional<double> amplitude_near(const Spectrum& s, double freq_mhz,
                                            double half_window_mhz) {
    std::optional<std::size_t> best;
    for (std::size_t k = 0; k < s.freq_mhz.size(); ++k) {
        if (std::abs(s.freq_mhz[k] - freq_mhz) > half_window_mhz) continue;
        if (!best || s.amplitude[k] > s.amplitude[*best]) best = k;
    }
    if (!best) return std::nullopt;
    const std::size_t k = *best;
    if (k == 0 || k + 1 >= s.amplitude.size()) return s.amplitude[k];
    const double y0 = s.amplitude[k - 1], y1 = s.amplitude[k], y2 = s.amplitude[k + 1];
    const double denom = 2.0 * y1 - y0 - y2;
    if (!(denom > 0.0)) return y1;
    const double shift = std::clamp(0.5 * (y2 - y0) / denom, -0.5, 0.5);
    return y1 + 0.25 * (y2 - y0) * shift;
}

} // namespace detail

// |eps_-|^2 from the amplitudes of the Ramsey spectral components at the two
// detunings; the detuning-difference line provides a consistency check.
inline PolarizationEstimate infer_polarization(const Spectrum& s, const Detuning& det) {
    const double f_minus = std::abs(mhz_from_angular(det.delta_minus));
    const double f_plus = std::abs(mhz_from_angular(det.delta_plus));
    const double f_prod = std::abs(mhz_from_angular(det.delta_plus - det.delta_minus));
    const double half_window = f_prod / 4.0;
    if (s.resolution_mhz() > half_window)
        throw inference_error("infer_polarization: spectral resolution too coarse for the "
                              "detuning separation");

    // shrink each line's search window so it cannot capture a neighboring line
    auto window_for = [&](double f, double n1, double n2) {
        return std::min({half_window, std::abs(f - n1) / 2.0, std::abs(f - n2) / 2.0});
    };
    const auto a_minus = detail::amplitude_near(s, f_minus, window_for(f_minus, f_plus, f_prod));
    const auto a_plus = detail::amplitude_near(s, f_plus, window_for(f_plus, f_minus, f_prod));
    const auto a_prod = detail::amplitude_near(s, f_prod, window_for(f_prod, f_minus, f_plus));
    if (!a_minus) throw inference_error("infer_polarization: missing minus-detuning component");
    if (!a_plus) throw inference_error("infer_polarization: missing plus-detuning component");

    const double total = *a_minus + *a_plus;
    if (!(total > 0.0))
        throw inference_error("infer_polarization: both detuning components vanish");

    PolarizationEstimate e;
    e.eps_minus_sq = *a_minus / total;
    e.uncertainty = s.noise_floor() / total;
    if (a_prod) e.residual = std::abs(*a_prod - (*a_minus) * (*a_plus) / total);
    return e;
}

// Earliest local minimum with prominence >= min_prominence, where prominence
// is the rise to the lower of the two flanking maxima. Also counts all
// qualifying minima.
inline FirstMinimum first_minimum(const std::vector<double>& times,
                                  const std::vector<double>& values,
                                  double min_prominence = 0.05) {
    const std::size_t n = values.size();
    if (n < 5 || times.size() != n)
        throw invalid_input_error("first_minimum: trace must have at least 5 samples");

    FirstMinimum best;
    bool found = false;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (!(values[i] < values[i - 1] && values[i] <= values[i + 1])) continue;
        // flanking maxima: highest point reached before dropping back below
        // the candidate value on each side
        double left = values[i];
        for (std::size_t j = i; j-- > 0;) {
            left = std::max(left, values[j]);
            if (j > 0 && values[j] < values[i]) break;
        }
        double right = values[i];
        for (std::size_t j = i + 1; j < n; ++j) {
            right = std::max(right, values[j]);
            if (values[j] < values[i]) break;
        }
        if (std::min(left, right) - values[i] < min_prominence) continue;
        ++best.count;
        if (!found) {
            found = true;
            // parabolic refinement through the three points around the minimum
            const double y0 = values[i - 1], y1 = values[i], y2 = values[i + 1];
            const double denom = y0 - 2.0 * y1 + y2;
            double shift = 0.0;
            if (std::abs(denom) > 1e-300) shift = 0.5 * (y0 - y2) / denom;
            shift = std::clamp(shift, -0.5, 0.5);
            const double dt = times[i] - times[i - 1];
            best.t = times[i] + shift * dt;
            best.value = y1 - 0.25 * (y0 - y2) * shift;
        }
    }
    if (!found) throw detection_error("first_minimum: no qualifying local minimum");
    return best;
}

// Per-lambda record of a pi-pulse sweep.
struct SweepRecord {
    double lambda = 0.0;
    double omega_w = 0.0;        // per-wire amplitude, rad/us
    double omega_nominal = 0.0;  // weak-drive Rabi frequency lambda * omega_larmor, rad/us
    double t_m = 0.0;            // us
    double fidelity = 0.0;       // 1 - P0(t_m)
    double omega_eff_mhz = 0.0;  // 1 / (2 t_m), ordinary frequency
    int n_minima = 0;
    bool ok = true;              // false when minimum detection failed
};

struct SweepResult {
    double omega_larmor = 0.0;  // rad/us, defines the ideal line
    std::vector<SweepRecord> records;
};

struct SweepCurvePoint {
    double lambda = 0.0;
    double omega_eff_mhz = 0.0;
    double fidelity = 0.0;
    double ideal_omega_eff_mhz = 0.0;  // sqrt(2) Omega / 2 pi
};

// Aligned fidelity-vs-Omega_eff / Omega_eff-vs-amplitude table including the
// ideal harmonic reference line.
inline std::vector<SweepCurvePoint> sweep_curves(const SweepResult& sr) {
    std::vector<SweepCurvePoint> out;
    out.reserve(sr.records.size());
    for (const auto& r : sr.records) {
        if (!r.ok) continue;
        SweepCurvePoint p;
        p.lambda = r.lambda;
        p.omega_eff_mhz = r.omega_eff_mhz;
        p.fidelity = r.fidelity;
        p.ideal_omega_eff_mhz =
            mhz_from_angular(r.omega_nominal > 0.0 ? r.omega_nominal : sqrt2 * r.omega_w);
        out.push_back(p);
    }
    return out;
}

} // namespace nvspin
