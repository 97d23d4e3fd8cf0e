#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nvspin/experiments.hpp"

// Config ingestion, scenario orchestration and file export for the CLI.
// Unit conventions: configs carry MHz / gauss / us / rad; everything is
// converted to angular frequencies exactly once, here.

namespace nvspin {

using json = nlohmann::ordered_json;

inline constexpr const char* tool_version = "1.0.0";

enum class ScenarioKind { rabi, phase_scan, ramsey, pipulse_sweep, axial_demo };
enum class OutputFormat { csv, json };

namespace detail {

[[noreturn]] inline void cfg_fail(const std::string& where, const std::string& what) {
    throw config_error("config: " + where + ": " + what);
}

inline void require_keys(const json& obj, const std::string& where,
                         std::initializer_list<const char*> known) {
    if (!obj.is_object()) cfg_fail(where, "expected an object");
    for (const auto& [key, _] : obj.items()) {
        bool ok = false;
        for (const char* k : known)
            if (key == k) ok = true;
        if (!ok) cfg_fail(where, "unknown key '" + key + "'");
    }
}

inline double get_number(const json& obj, const std::string& where, const char* key) {
    if (!obj.contains(key)) cfg_fail(where, std::string("missing key '") + key + "'");
    if (!obj[key].is_number()) cfg_fail(where + "." + key, "expected a number");
    return obj[key].get<double>();
}

inline double get_number_or(const json& obj, const std::string& where, const char* key,
                            double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) cfg_fail(where + "." + key, "expected a number");
    return obj[key].get<double>();
}

inline std::string get_string_or(const json& obj, const std::string& where, const char* key,
                                 const std::string& fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_string()) cfg_fail(where + "." + key, "expected a string");
    return obj[key].get<std::string>();
}

// Grid: either an explicit array or {start, stop, count} with inclusive ends.
inline std::vector<double> parse_grid(const json& g, const std::string& where) {
    std::vector<double> out;
    if (g.is_array()) {
        for (const auto& v : g) {
            if (!v.is_number()) cfg_fail(where, "grid entries must be numbers");
            out.push_back(v.get<double>());
        }
    } else if (g.is_object()) {
        require_keys(g, where, {"start", "stop", "count"});
        const double start = get_number(g, where, "start");
        const double stop = get_number(g, where, "stop");
        if (!g.contains("count") || !g["count"].is_number_integer())
            cfg_fail(where, "'count' must be an integer");
        const long long count = g["count"].get<long long>();
        if (count < 2) cfg_fail(where, "'count' must be >= 2");
        out.resize(static_cast<std::size_t>(count));
        for (long long i = 0; i < count; ++i)
            out[static_cast<std::size_t>(i)] =
                start + (stop - start) * static_cast<double>(i) / static_cast<double>(count - 1);
    } else {
        cfg_fail(where, "expected an array or a {start, stop, count} object");
    }
    if (out.empty()) cfg_fail(where, "grid must be non-empty");
    return out;
}

inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.15g", v);
    return buf;
}

} // namespace detail

struct ScenarioConfig {
    ScenarioKind scenario = ScenarioKind::rabi;
    SystemParams system;
    DriveConfig drive;
    ModelKind model = ModelKind::two_level;
    PhaseAverageSpec averaging;
    PropagationSettings propagation;

    std::vector<double> time_grid;    // rabi / phase-scan / axial-demo
    std::vector<double> phi_grid;     // phase-scan / axial-demo
    std::vector<double> tau_grid;     // ramsey
    std::vector<double> lambda_grid;  // pipulse-sweep

    RamseySpec ramsey;                // ramsey
    PolarizationMode sweep_mode = PolarizationMode::linear;
    SweepOptions sweep;               // pipulse-sweep

    std::string out_dir = ".";
    OutputFormat format = OutputFormat::csv;

    json resolved;  // normalized config echoed into the manifest
};

namespace detail {

inline ScenarioKind parse_scenario_kind(const std::string& s) {
    if (s == "rabi") return ScenarioKind::rabi;
    if (s == "phase-scan") return ScenarioKind::phase_scan;
    if (s == "ramsey") return ScenarioKind::ramsey;
    if (s == "pipulse-sweep") return ScenarioKind::pipulse_sweep;
    if (s == "axial-demo") return ScenarioKind::axial_demo;
    cfg_fail("scenario", "unknown scenario '" + s + "'");
}

inline const char* scenario_name(ScenarioKind k) {
    switch (k) {
        case ScenarioKind::rabi: return "rabi";
        case ScenarioKind::phase_scan: return "phase-scan";
        case ScenarioKind::ramsey: return "ramsey";
        case ScenarioKind::pipulse_sweep: return "pipulse-sweep";
        case ScenarioKind::axial_demo: return "axial-demo";
    }
    return "";
}

inline SystemParams parse_system(const json& s) {
    require_keys(s, "system",
                 {"D_MHz", "gamma_MHz_per_G", "B_G", "omega_minus_MHz", "omega_plus_MHz"});
    const double gamma = get_number_or(s, "system", "gamma_MHz_per_G", 2.8);
    SystemParams p;
    if (s.contains("omega_minus_MHz") || s.contains("omega_plus_MHz")) {
        if (s.contains("D_MHz") || s.contains("B_G"))
            cfg_fail("system", "give either (D_MHz, B_G) or (omega_minus_MHz, omega_plus_MHz)");
        p = SystemParams::from_transitions(
            angular_from_mhz(get_number(s, "system", "omega_minus_MHz")),
            angular_from_mhz(get_number(s, "system", "omega_plus_MHz")),
            angular_from_mhz(gamma));
    } else {
        p.D = angular_from_mhz(get_number_or(s, "system", "D_MHz", 2870.0));
        p.gamma = angular_from_mhz(gamma);
        p.B_ext = get_number_or(s, "system", "B_G", 0.0);
    }
    p.validate();
    return p;
}

inline DriveConfig parse_drive(const json& d, const SystemParams& p) {
    require_keys(d, "drive",
                 {"omega_MHz", "lambda", "amplitude_convention", "carrier_MHz",
                  "detuning_minus_MHz", "phi_rad", "phi_g_rad", "omega_z_MHz", "axial_ratio"});
    DriveConfig out;

    if (d.contains("carrier_MHz") && d.contains("detuning_minus_MHz"))
        cfg_fail("drive", "give either carrier_MHz or detuning_minus_MHz");
    if (d.contains("detuning_minus_MHz"))
        out.carrier = p.omega_minus() -
                      angular_from_mhz(get_number(d, "drive", "detuning_minus_MHz"));
    else
        out.carrier = angular_from_mhz(
            get_number_or(d, "drive", "carrier_MHz", mhz_from_angular(p.omega_minus())));

    const std::string conv = get_string_or(d, "drive", "amplitude_convention", "per-wire");
    if (conv != "per-wire" && conv != "effective-circular")
        cfg_fail("drive.amplitude_convention", "expected 'per-wire' or 'effective-circular'");
    if (d.contains("omega_MHz") && d.contains("lambda"))
        cfg_fail("drive", "give either omega_MHz or lambda");
    double omega;
    if (d.contains("lambda")) {
        // lambda = Omega_R / omega_minus = sqrt(2) Omega / omega_minus
        omega = get_number(d, "drive", "lambda") * p.omega_minus() / sqrt2;
    } else {
        omega = angular_from_mhz(get_number_or(d, "drive", "omega_MHz", 0.0));
        if (conv == "effective-circular") omega /= sqrt2;  // Omega_R given, per-wire stored
    }
    out.omega_w = omega;

    out.phi = get_number_or(d, "drive", "phi_rad", 0.0);
    out.phi_g = get_number_or(d, "drive", "phi_g_rad", 0.0);
    if (d.contains("omega_z_MHz") && d.contains("axial_ratio"))
        cfg_fail("drive", "give either omega_z_MHz or axial_ratio");
    if (d.contains("axial_ratio"))
        out.omega_z = get_number(d, "drive", "axial_ratio") * out.omega_w;
    else
        out.omega_z = angular_from_mhz(get_number_or(d, "drive", "omega_z_MHz", 0.0));
    out.normalize_phases();
    out.validate();
    return out;
}

inline PhaseAverageSpec parse_averaging(const json& a) {
    require_keys(a, "averaging", {"n_phases", "sampling", "seed"});
    PhaseAverageSpec out;
    if (a.contains("n_phases")) {
        if (!a["n_phases"].is_number_integer()) cfg_fail("averaging.n_phases", "expected an integer");
        out.n_phases = a["n_phases"].get<int>();
        if (out.n_phases < 1) cfg_fail("averaging.n_phases", "must be >= 1");
    }
    const std::string s = get_string_or(a, "averaging", "sampling", "uniform-grid");
    if (s == "uniform-grid")
        out.sampling = PhaseSampling::uniform_grid;
    else if (s == "seeded-random")
        out.sampling = PhaseSampling::seeded_random;
    else
        cfg_fail("averaging.sampling", "expected 'uniform-grid' or 'seeded-random'");
    if (a.contains("seed")) {
        if (!a["seed"].is_number_integer()) cfg_fail("averaging.seed", "expected an integer");
        out.seed = a["seed"].get<std::uint64_t>();
    }
    return out;
}

inline PropagationSettings parse_propagation(const json& pr) {
    require_keys(pr, "propagation", {"dt_max_us", "substeps_per_period", "method"});
    PropagationSettings out;
    out.dt_max = get_number_or(pr, "propagation", "dt_max_us", out.dt_max);
    if (pr.contains("substeps_per_period")) {
        if (!pr["substeps_per_period"].is_number_integer())
            cfg_fail("propagation.substeps_per_period", "expected an integer");
        out.substeps_per_period = pr["substeps_per_period"].get<int>();
    }
    const std::string m =
        get_string_or(pr, "propagation", "method", "midpoint-exponential");
    if (m == "midpoint-exponential")
        out.method = StepMethod::midpoint_exponential;
    else if (m == "fourth-order-commutator-free")
        out.method = StepMethod::fourth_order_commutator_free;
    else
        cfg_fail("propagation.method",
                 "expected 'midpoint-exponential' or 'fourth-order-commutator-free'");
    out.effective_step();  // validates ranges
    return out;
}

} // namespace detail

// Parse + validate a config document. Throws config_error with a
// field-precise message on any problem.
inline ScenarioConfig parse_config(const json& doc) {
    using namespace detail;
    require_keys(doc, "(top level)",
                 {"scenario", "system", "drive", "model", "grids", "averaging", "propagation",
                  "ramsey", "sweep", "output", "tool_version", "summary", "outputs"});
    if (!doc.contains("scenario") || !doc["scenario"].is_string())
        cfg_fail("scenario", "missing or not a string");

    ScenarioConfig c;
    c.scenario = parse_scenario_kind(doc["scenario"].get<std::string>());
    c.system = parse_system(doc.value("system", json::object()));
    c.drive = parse_drive(doc.value("drive", json::object()), c.system);

    const std::string model = get_string_or(doc, "(top level)", "model", "two-level");
    if (model == "two-level")
        c.model = ModelKind::two_level;
    else if (model == "three-level")
        c.model = ModelKind::three_level;
    else
        cfg_fail("model", "expected 'two-level' or 'three-level'");

    c.averaging = parse_averaging(doc.value("averaging", json::object()));
    c.propagation = parse_propagation(doc.value("propagation", json::object()));

    const json grids = doc.value("grids", json::object());
    require_keys(grids, "grids", {"time_us", "phi_rad", "tau_us", "lambda"});
    auto need = [&](const char* key) {
        if (!grids.contains(key))
            cfg_fail("grids", std::string("scenario requires grid '") + key + "'");
        return parse_grid(grids[key], std::string("grids.") + key);
    };
    switch (c.scenario) {
        case ScenarioKind::rabi:
            c.time_grid = need("time_us");
            break;
        case ScenarioKind::phase_scan:
        case ScenarioKind::axial_demo:
            c.time_grid = need("time_us");
            c.phi_grid = need("phi_rad");
            break;
        case ScenarioKind::ramsey:
            c.tau_grid = need("tau_us");
            break;
        case ScenarioKind::pipulse_sweep:
            c.lambda_grid = need("lambda");
            break;
    }

    const json rj = doc.value("ramsey", json::object());
    require_keys(rj, "ramsey", {"hyperfine", "splitting_MHz"});
    const std::string hf = get_string_or(rj, "ramsey", "hyperfine", "three-line");
    if (hf == "off")
        c.ramsey.hyperfine = HyperfineMode::off;
    else if (hf == "three-line")
        c.ramsey.hyperfine = HyperfineMode::three_line;
    else
        cfg_fail("ramsey.hyperfine", "expected 'off' or 'three-line'");
    c.ramsey.splitting = angular_from_mhz(get_number_or(rj, "ramsey", "splitting_MHz", 2.16));
    c.ramsey.tau_grid = c.tau_grid;

    const json sj = doc.value("sweep", json::object());
    require_keys(sj, "sweep",
                 {"polarization", "axial_ratio", "horizon_rabi_periods", "trace_points",
                  "min_prominence"});
    const std::string pol = get_string_or(sj, "sweep", "polarization", "linear");
    if (pol == "circular")
        c.sweep_mode = PolarizationMode::circular;
    else if (pol == "linear")
        c.sweep_mode = PolarizationMode::linear;
    else
        cfg_fail("sweep.polarization", "expected 'circular' or 'linear'");
    c.sweep.axial_ratio = get_number_or(sj, "sweep", "axial_ratio", 0.0);
    c.sweep.horizon_rabi_periods =
        get_number_or(sj, "sweep", "horizon_rabi_periods", c.sweep.horizon_rabi_periods);
    if (sj.contains("trace_points")) {
        if (!sj["trace_points"].is_number_integer() || sj["trace_points"].get<long long>() < 16)
            cfg_fail("sweep.trace_points", "expected an integer >= 16");
        c.sweep.trace_points = sj["trace_points"].get<std::size_t>();
    }
    c.sweep.min_prominence = get_number_or(sj, "sweep", "min_prominence", c.sweep.min_prominence);
    c.sweep.averaging = c.averaging;
    c.sweep.propagation = c.propagation;

    const json oj = doc.value("output", json::object());
    require_keys(oj, "output", {"directory", "format"});
    c.out_dir = get_string_or(oj, "output", "directory", ".");
    const std::string fmt = get_string_or(oj, "output", "format", "csv");
    if (fmt == "csv")
        c.format = OutputFormat::csv;
    else if (fmt == "json")
        c.format = OutputFormat::json;
    else
        cfg_fail("output.format", "expected 'csv' or 'json'");

    // normalized echo: original document with every default made explicit
    json r = doc;
    r["scenario"] = detail::scenario_name(c.scenario);
    r["tool_version"] = tool_version;
    if (!r.contains("system")) r["system"] = json::object();
    if (!r["system"].contains("omega_minus_MHz") && !r["system"].contains("D_MHz"))
        r["system"]["D_MHz"] = mhz_from_angular(c.system.D);
    r["system"]["gamma_MHz_per_G"] = mhz_from_angular(c.system.gamma);
    if (!r["system"].contains("omega_minus_MHz")) r["system"]["B_G"] = c.system.B_ext;
    if (!r.contains("drive")) r["drive"] = json::object();
    if (!r["drive"].contains("lambda"))
        r["drive"]["omega_MHz"] = mhz_from_angular(c.drive.omega_w);
    if (!r["drive"].contains("detuning_minus_MHz"))
        r["drive"]["carrier_MHz"] = mhz_from_angular(c.drive.carrier);
    if (!r["drive"].contains("lambda")) r["drive"]["amplitude_convention"] = "per-wire";
    r["drive"]["phi_rad"] = c.drive.phi;
    r["drive"]["phi_g_rad"] = c.drive.phi_g;
    if (!r["drive"].contains("axial_ratio"))
        r["drive"]["omega_z_MHz"] = mhz_from_angular(c.drive.omega_z);
    r["model"] = model;
    r["averaging"] = {{"n_phases", c.averaging.n_phases},
                      {"sampling", c.averaging.sampling == PhaseSampling::uniform_grid
                                       ? "uniform-grid"
                                       : "seeded-random"},
                      {"seed", c.averaging.seed}};
    r["propagation"] = {{"dt_max_us", c.propagation.dt_max},
                        {"substeps_per_period", c.propagation.substeps_per_period},
                        {"method", c.propagation.method == StepMethod::midpoint_exponential
                                       ? "midpoint-exponential"
                                       : "fourth-order-commutator-free"}};
    if (c.scenario == ScenarioKind::ramsey)
        r["ramsey"] = {{"hyperfine", hf}, {"splitting_MHz", mhz_from_angular(c.ramsey.splitting)}};
    if (c.scenario == ScenarioKind::pipulse_sweep)
        r["sweep"] = {{"polarization", pol},
                      {"axial_ratio", c.sweep.axial_ratio},
                      {"horizon_rabi_periods", c.sweep.horizon_rabi_periods},
                      {"trace_points", c.sweep.trace_points},
                      {"min_prominence", c.sweep.min_prominence}};
    r["output"] = {{"directory", c.out_dir},
                   {"format", c.format == OutputFormat::csv ? "csv" : "json"}};
    c.resolved = std::move(r);
    return c;
}

// Dotted-path override, e.g. "drive.phi_rad=1.5708". Values parse as JSON
// when possible, else as strings.
inline void apply_override(json& doc, const std::string& spec) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0)
        detail::cfg_fail("--override", "expected key=value, got '" + spec + "'");
    const std::string path = spec.substr(0, eq);
    const std::string raw = spec.substr(eq + 1);
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;

    json* node = &doc;
    std::size_t pos = 0;
    while (true) {
        const auto dot = path.find('.', pos);
        const std::string key = path.substr(pos, dot - pos);
        if (key.empty()) detail::cfg_fail("--override", "empty path segment in '" + path + "'");
        if (dot == std::string::npos) {
            (*node)[key] = value;
            return;
        }
        if (!node->contains(key)) (*node)[key] = json::object();
        node = &(*node)[key];
        if (!node->is_object()) detail::cfg_fail("--override", "'" + key + "' is not an object");
        pos = dot + 1;
    }
}

// ---- output tables ---------------------------------------------------------

struct ResultTable {
    std::string name;  // file stem
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

struct ScenarioResult {
    std::vector<ResultTable> tables;
    json summary;  // scenario-specific scalar findings, merged into the manifest
};

namespace detail {

inline void append_trace(ResultTable& t, const RabiTrace& tr,
                         std::optional<double> phi = std::nullopt) {
    const int i0 = level0_index(tr.dim);
    const int im = level_minus1_index(tr.dim);
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
        std::vector<double> row;
        if (phi) row.push_back(*phi);
        row.push_back(tr.times[i]);
        row.push_back(tr.mean_populations[i][i0]);
        row.push_back(tr.mean_populations[i][im]);
        row.push_back(tr.dim == 3 ? tr.mean_populations[i][2] : 0.0);
        t.rows.push_back(std::move(row));
    }
}

} // namespace detail

inline ScenarioResult run_scenario(const ScenarioConfig& c, int threads) {
    ScenarioResult res;
    switch (c.scenario) {
        case ScenarioKind::rabi: {
            const RabiTrace tr = rabi_trace(c.system, c.drive, c.time_grid, c.averaging,
                                            c.model, false, threads, c.propagation);
            ResultTable t{"trace", {"t_us", "p0", "p_minus1", "p_plus1"}, {}};
            detail::append_trace(t, tr);
            res.tables.push_back(std::move(t));
            break;
        }
        case ScenarioKind::phase_scan: {
            const PhaseScan scan = phase_scan(c.system, c.drive, c.phi_grid, c.time_grid,
                                              c.averaging, c.model, threads, c.propagation);
            ResultTable t{"map", {"phi_rad", "t_us", "p0", "p_minus1", "p_plus1"}, {}};
            for (std::size_t r = 0; r < scan.rows.size(); ++r)
                detail::append_trace(t, scan.rows[r], scan.phis[r]);
            res.tables.push_back(std::move(t));
            break;
        }
        case ScenarioKind::ramsey: {
            RamseySpec spec = c.ramsey;
            spec.tau_grid = c.tau_grid;
            const RamseyResult rr = ramsey_scan(c.system, c.drive, spec);
            ResultTable t{"ramsey", {"tau_us", "p0_simulated", "p0_closed_form"}, {}};
            for (std::size_t i = 0; i < rr.taus.size(); ++i)
                t.rows.push_back({rr.taus[i], rr.simulated[i], rr.closed_form[i]});
            res.tables.push_back(std::move(t));

            const Spectrum s = spectrum(rr.taus, rr.simulated, SpectrumWindow::hann);
            ResultTable st{"spectrum", {"freq_MHz", "amplitude"}, {}};
            for (std::size_t k = 0; k < s.freq_mhz.size(); ++k)
                st.rows.push_back({s.freq_mhz[k], s.amplitude[k]});
            res.tables.push_back(std::move(st));

            const Detuning det = Detuning::from(c.system, c.drive.carrier);
            const PolarizationEstimate e = infer_polarization(s, det);
            res.summary["t_pi2_us"] = rr.t_pi2;
            res.summary["eps_minus_sq"] = e.eps_minus_sq;
            res.summary["eps_minus_sq_uncertainty"] = e.uncertainty;
            res.summary["consistency_residual"] = e.residual;
            break;
        }
        case ScenarioKind::pipulse_sweep: {
            const SweepResult sr =
                pi_pulse_sweep(c.system, c.sweep_mode, c.lambda_grid, c.sweep, threads);
            ResultTable t{"sweep", {"lambda", "t_m_us", "fidelity", "omega_eff_MHz"}, {}};
            ResultTable ideal{"ideal_line", {"lambda", "ideal_omega_eff_MHz"}, {}};
            int failures = 0;
            for (const auto& r : sr.records) {
                if (r.ok)
                    t.rows.push_back({r.lambda, r.t_m, r.fidelity, r.omega_eff_mhz});
                else
                    ++failures;
                ideal.rows.push_back({r.lambda, mhz_from_angular(r.omega_nominal)});
            }
            res.tables.push_back(std::move(t));
            res.tables.push_back(std::move(ideal));
            res.summary["detection_failures"] = failures;
            break;
        }
        case ScenarioKind::axial_demo: {
            const PhaseScan scan = axial_scenario(c.system, c.drive, c.phi_grid, c.time_grid,
                                                  threads, c.propagation);
            ResultTable t{"map", {"phi_rad", "t_us", "p0", "p_minus1", "p_plus1"}, {}};
            ResultTable freq{"dominant_frequency", {"phi_rad", "freq_MHz", "amplitude"}, {}};
            for (std::size_t r = 0; r < scan.rows.size(); ++r) {
                detail::append_trace(t, scan.rows[r], scan.phis[r]);
                const Spectrum s =
                    spectrum(scan.rows[r].times, scan.rows[r].p0(), SpectrumWindow::hann);
                double f = 0.0, a = 0.0;
                for (const auto& [pf, pa] : s.peaks)
                    if (pa > a) {
                        a = pa;
                        f = pf;
                    }
                freq.rows.push_back({scan.phis[r], f, a});
            }
            res.tables.push_back(std::move(t));
            res.tables.push_back(std::move(freq));
            break;
        }
    }
    return res;
}

// ---- serialization ---------------------------------------------------------

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open '" + path.string() + "' for writing");
    out << body;
    out.flush();
    if (!out) throw io_error("write failed for '" + path.string() + "'");
}

inline std::string render_csv(const ResultTable& t) {
    std::string body = "# manifest: manifest.json\n";
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
        if (c) body += ',';
        body += t.columns[c];
    }
    body += '\n';
    for (const auto& row : t.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) body += ',';
            body += format_number(row[c]);
        }
        body += '\n';
    }
    return body;
}

inline std::string render_json(const ResultTable& t) {
    // hand-rendered so numbers share the CSV formatting exactly
    std::string body = "{\n  \"manifest\": \"manifest.json\",\n  \"columns\": [";
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
        if (c) body += ", ";
        body += '"' + t.columns[c] + '"';
    }
    body += "],\n  \"rows\": [\n";
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        body += "    [";
        for (std::size_t c = 0; c < t.rows[i].size(); ++c) {
            if (c) body += ", ";
            body += format_number(t.rows[i][c]);
        }
        body += i + 1 < t.rows.size() ? "],\n" : "]\n";
    }
    body += "  ]\n}\n";
    return body;
}

} // namespace detail

// Writes every result table plus manifest.json into c.out_dir. The manifest
// is itself a valid config: re-running it reproduces the outputs byte for
// byte.
inline std::vector<std::string> write_outputs(const ScenarioConfig& c, const ScenarioResult& res) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(c.out_dir, ec);
    if (ec) throw io_error("cannot create output directory '" + c.out_dir + "'");

    std::vector<std::string> written;
    for (const auto& t : res.tables) {
        const std::string filename =
            t.name + (c.format == OutputFormat::csv ? ".csv" : ".json");
        detail::write_file(fs::path(c.out_dir) / filename,
                           c.format == OutputFormat::csv ? detail::render_csv(t)
                                                         : detail::render_json(t));
        written.push_back(filename);
    }

    json manifest = c.resolved;
    if (!res.summary.is_null()) manifest["summary"] = res.summary;
    manifest["outputs"] = written;
    detail::write_file(fs::path(c.out_dir) / "manifest.json", manifest.dump(2) + "\n");
    written.push_back("manifest.json");
    return written;
}

} // namespace nvspin
