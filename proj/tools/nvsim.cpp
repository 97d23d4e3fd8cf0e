// nvsim: spin-dynamics scenario runner.
//
// Exit codes: 0 success, 2 configuration error, 3 computation error,
// 4 I/O error. Errors go to stderr as a single JSON object.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "nvspin/scenario.hpp"

namespace {

int fail(const char* category, const std::string& message, int code) {
    nvspin::json err{{"error", category}, {"message", message}};
    std::cerr << err.dump() << "\n";
    return code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"nvsim: NV-center spin dynamics scenarios"};
    app.set_version_flag("--version", nvspin::tool_version);

    std::string config_path;
    std::string out_dir;
    std::string format;
    int threads = 0;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> overrides;

    app.add_option("--config", config_path, "Scenario config file (JSON)")->required();
    app.add_option("--out", out_dir, "Output directory (overrides config)");
    app.add_option("--threads", threads, "Worker threads, 0 = auto")->check(CLI::NonNegativeNumber);
    app.add_option("--format", format, "Output format (overrides config)")
        ->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--seed", seed, "Global-phase sampling seed (overrides config)");
    app.add_option("--override", overrides,
                   "Config override as dotted.path=value, may repeat");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
        return fail("config", e.what(), 2);
    }

    try {
        std::ifstream in(config_path, std::ios::binary);
        if (!in) return fail("io", "cannot open config file '" + config_path + "'", 4);
        nvspin::json doc = nvspin::json::parse(in, nullptr, false);
        if (doc.is_discarded())
            return fail("config", "config file '" + config_path + "' is not valid JSON", 2);

        // CLI overrides land in the document before validation, so the
        // manifest reflects exactly what ran.
        for (const std::string& o : overrides) nvspin::apply_override(doc, o);
        if (!out_dir.empty()) doc["output"]["directory"] = out_dir;
        if (!format.empty()) doc["output"]["format"] = format;
        if (seed) doc["averaging"]["seed"] = *seed;

        const nvspin::ScenarioConfig cfg = nvspin::parse_config(doc);
        const int n_threads =
            threads > 0 ? threads
                        : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
        const nvspin::ScenarioResult result = nvspin::run_scenario(cfg, n_threads);
        const std::vector<std::string> files = nvspin::write_outputs(cfg, result);
        for (const std::string& f : files) std::cout << f << "\n";
        return 0;
    } catch (const nvspin::io_error& e) {
        return fail("io", e.what(), 4);
    } catch (const nvspin::config_error& e) {
        return fail("config", e.what(), 2);
    } catch (const nvspin::invalid_input_error& e) {
        return fail("config", e.what(), 2);
    } catch (const nvspin::error& e) {
        return fail("computation", e.what(), 3);
    } catch (const std::exception& e) {
        return fail("computation", e.what(), 3);
    }
}
