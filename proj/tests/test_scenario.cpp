#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nvspin/scenario.hpp"

// End-to-end tests of the nvsim executable: flag handling, exit codes,
// output layout, determinism and manifest round-tripping.

namespace fs = std::filesystem;
using njson = nlohmann::ordered_json;

namespace {

const std::string binary = NVSIM_BINARY;
const std::string config_dir = NVSIM_CONFIG_DIR;

struct RunResult {
    int exit_code = -1;
    std::string stderr_text;
};

fs::path fresh_dir(const std::string& tag) {
    const fs::path p = fs::temp_directory_path() / ("nvsim_test_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

RunResult run_tool(const std::string& args, const fs::path& cwd) {
    const fs::path err_file = cwd / "_stderr.txt";
    const std::string cmd = "cd '" + cwd.string() + "' && '" + binary + "' " + args +
                            " > /dev/null 2> '" + err_file.string() + "'";
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(err_file);
    std::stringstream ss;
    ss << in.rdbuf();
    r.stderr_text = ss.str();
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Csv {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

Csv read_csv(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    std::string line;
    REQUIRE(std::getline(in, line));
    REQUIRE(line.rfind("# manifest: ", 0) == 0);
    Csv out;
    REQUIRE(std::getline(in, line));
    std::stringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) out.columns.push_back(cell);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream rs(line);
        while (std::getline(rs, cell, ',')) row.push_back(std::stod(cell));
        REQUIRE(row.size() == out.columns.size());
        out.rows.push_back(std::move(row));
    }
    return out;
}

std::string config(const std::string& name) {
    return "--config '" + config_dir + "/" + name + "'";
}

} // namespace

TEST_CASE("help and version exit cleanly") {
    const fs::path dir = fresh_dir("help");
    CHECK(run_tool("--help", dir).exit_code == 0);
    CHECK(run_tool("--version", dir).exit_code == 0);
}

TEST_CASE("bad invocations exit with the config code and JSON stderr") {
    const fs::path dir = fresh_dir("badargs");
    const RunResult missing = run_tool("", dir);
    CHECK(missing.exit_code == 2);
    CHECK_FALSE(njson::parse(missing.stderr_text, nullptr, false).is_discarded());

    const RunResult badflag = run_tool(config("fig1c.config") + " --frobnicate", dir);
    CHECK(badflag.exit_code == 2);
}

TEST_CASE("missing config file is an I/O failure") {
    const fs::path dir = fresh_dir("noconfig");
    const RunResult r = run_tool("--config /nonexistent/nowhere.config", dir);
    CHECK(r.exit_code == 4);
    const njson err = njson::parse(r.stderr_text, nullptr, false);
    REQUIRE_FALSE(err.is_discarded());
    CHECK(err["error"] == "io");
}

TEST_CASE("malformed JSON and unknown keys are config errors") {
    const fs::path dir = fresh_dir("badcfg");
    {
        std::ofstream out(dir / "broken.config");
        out << "{ not json";
    }
    CHECK(run_tool("--config broken.config", dir).exit_code == 2);

    {
        std::ofstream out(dir / "unknown.config");
        out << R"({"scenario": "rabi", "turbo": true,
                   "grids": {"time_us": [0.0, 0.1]}, "drive": {"omega_MHz": 5.0}})";
    }
    const RunResult r = run_tool("--config unknown.config --out o", dir);
    CHECK(r.exit_code == 2);
    CHECK(r.stderr_text.find("turbo") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "o" / "manifest.json"));
}

TEST_CASE("invalid physics values exit 2 and write nothing") {
    const fs::path dir = fresh_dir("negomega");
    const RunResult r = run_tool(
        config("fig2a.config") + " --out neg --override drive.lambda=-0.3", dir);
    CHECK(r.exit_code == 2);
    CHECK_FALSE(fs::exists(dir / "neg"));
}

TEST_CASE("unknown override key is rejected before any work") {
    const fs::path dir = fresh_dir("badoverride");
    const RunResult r = run_tool(
        config("fig2a.config") + " --out o --override drive.wibble_MHz=3", dir);
    CHECK(r.exit_code == 2);
    CHECK_FALSE(fs::exists(dir / "o"));
}

TEST_CASE("overrides land in the manifest and the physics") {
    const fs::path dir = fresh_dir("override");
    const std::string shrink =
        " --override averaging.n_phases=4 --override grids.time_us.count=21";
    const RunResult r = run_tool(config("fig2a.config") + " --out o --threads 2" + shrink +
                                     " --override drive.lambda=0.25",
                                 dir);
    REQUIRE(r.exit_code == 0);
    const njson manifest = njson::parse(slurp(dir / "o" / "manifest.json"));
    CHECK(manifest["drive"]["lambda"].get<double>() == 0.25);
    CHECK(manifest["averaging"]["n_phases"].get<int>() == 4);
    CHECK(manifest["grids"]["time_us"]["count"].get<int>() == 21);
    CHECK(manifest["tool_version"] == nvspin::tool_version);
}

TEST_CASE("thread count never changes the bytes") {
    const fs::path dir = fresh_dir("threads");
    const std::string shrink =
        " --override averaging.n_phases=16 --override grids.time_us.count=41"
        " --override grids.phi_rad.count=5";
    REQUIRE(run_tool(config("fig2a.config") + " --out t1 --threads 1" + shrink, dir).exit_code ==
            0);
    REQUIRE(run_tool(config("fig2a.config") + " --out t8 --threads 8" + shrink, dir).exit_code ==
            0);
    CHECK(slurp(dir / "t1" / "map.csv") == slurp(dir / "t8" / "map.csv"));
}

TEST_CASE("csv and json formats hold the same numbers") {
    const fs::path dir = fresh_dir("formats");
    const std::string shrink =
        " --override averaging.n_phases=4 --override grids.time_us.count=21"
        " --override grids.phi_rad.count=3";
    REQUIRE(run_tool(config("fig2a.config") + " --out c --format csv" + shrink, dir).exit_code ==
            0);
    REQUIRE(run_tool(config("fig2a.config") + " --out j --format json" + shrink, dir).exit_code ==
            0);
    const Csv csv = read_csv(dir / "c" / "map.csv");
    const njson js = njson::parse(slurp(dir / "j" / "map.json"));
    REQUIRE(js["rows"].size() == csv.rows.size());
    REQUIRE(js["columns"].size() == csv.columns.size());
    for (std::size_t i = 0; i < csv.rows.size(); ++i)
        for (std::size_t c = 0; c < csv.columns.size(); ++c)
            CHECK(js["rows"][i][c].get<double>() == csv.rows[i][c]);
}

TEST_CASE("manifest re-run reproduces every output byte for byte") {
    const fs::path dir = fresh_dir("roundtrip");
    const std::string shrink =
        " --override averaging.n_phases=8 --override grids.time_us.count=31"
        " --override grids.phi_rad.count=3 --override output.directory=first";
    REQUIRE(run_tool(config("fig2a.config") + shrink, dir).exit_code == 0);
    const fs::path second = dir / "second";
    fs::create_directories(second);
    fs::copy_file(dir / "first" / "manifest.json", dir / "first_manifest.json");
    REQUIRE(run_tool("--config ../first_manifest.json", second).exit_code == 0);
    for (const char* f : {"map.csv", "manifest.json"})
        CHECK(slurp(dir / "first" / f) == slurp(second / "first" / f));
}

TEST_CASE("circular row of the strong-driving map is an ideal Rabi oscillation") {
    const fs::path dir = fresh_dir("fig2b");
    REQUIRE(run_tool(config("fig2b.config") + " --out o --threads 8"
                     " --override averaging.n_phases=8",
                     dir)
                .exit_code == 0);
    const Csv map = read_csv(dir / "o" / "map.csv");
    const njson manifest = njson::parse(slurp(dir / "o" / "manifest.json"));
    const double lambda = manifest["drive"]["lambda"].get<double>();
    const double omega_minus =
        nvspin::angular_from_mhz(manifest["system"]["omega_minus_MHz"].get<double>());
    const double omega_rabi = lambda * omega_minus;  // sqrt(2) * per-wire amplitude

    const double half_pi = 2.0 * std::asin(1.0) / 2.0;
    double worst = 0.0;
    std::size_t n = 0;
    for (const auto& row : map.rows) {
        if (std::abs(row[0] - half_pi) > 1e-12) continue;
        const double expected = std::pow(std::cos(0.5 * omega_rabi * row[1]), 2);
        worst = std::max(worst, std::abs(row[2] - expected));
        ++n;
    }
    REQUIRE(n > 100);
    CHECK(worst <= 1e-4);
}

TEST_CASE("linear-drive interferometry reports an equal polarization split") {
    const fs::path dir = fresh_dir("fig1e");
    REQUIRE(run_tool(config("fig1e.config") + " --out o", dir).exit_code == 0);
    const njson manifest = njson::parse(slurp(dir / "o" / "manifest.json"));
    const double w = manifest["summary"]["eps_minus_sq"].get<double>();
    CHECK(std::abs(w - 0.5) <= 0.05);
    const Csv spec = read_csv(dir / "o" / "spectrum.csv");
    CHECK(spec.columns == std::vector<std::string>{"freq_MHz", "amplitude"});
    CHECK(spec.rows.size() > 100);
}

TEST_CASE("every bundled config parses and passes validation") {
    for (const char* name : {"fig1c.config", "fig1d.config", "fig1e.config", "fig2a.config",
                             "fig2b.config", "fig3de.config", "fig4b.config"}) {
        const njson doc = njson::parse(slurp(fs::path(config_dir) / name));
        CHECK_NOTHROW(nvspin::parse_config(doc));
    }
}
