#include "rough_llg/experiments.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <optional>

int main(int argc, char** argv) {
    CLI::App app{"Rough LLG experiment runner"};
    std::string experiment, config_path, out_dir = "out";
    std::optional<std::uint64_t> seed;
    app.add_option("experiment", experiment, "driver-check | simulate | wongzakai | remainder | smallnoise | skeleton")
        ->required();
    app.add_option("--config", config_path, "JSON run configuration")->required();
    app.add_option("--seed", seed, "override the configured seed");
    app.add_option("--out", out_dir, "output directory");
    app.set_version_flag("--version", rllg::kVersion);
    CLI11_PARSE(app, argc, argv);

    rllg::RunConfig cfg;
    try {
        nlohmann::json j;
        {
            std::ifstream in(config_path);
            if (!in) throw rllg::ConfigError("--config", "cannot open '" + config_path + "'");
            try {
                j = nlohmann::json::parse(in);
            } catch (const nlohmann::json::parse_error& e) {
                throw rllg::ConfigError("--config", std::string("malformed JSON: ") + e.what());
            }
        }
        if (!j.is_object()) throw rllg::ConfigError("<root>", "must be an object");
        if (j.contains("experiment") && j["experiment"] != experiment)
            throw rllg::ConfigError("experiment", "config says '" + j["experiment"].dump() + "' but '" + experiment +
                                                      "' was requested");
        j["experiment"] = experiment;
        if (seed) j["seed"] = *seed;
        cfg = rllg::parse_config(j);
    } catch (const rllg::ConfigError& e) {
        std::cerr << "invalid config: " << e.what() << "\n";
        return 2;
    }

    try {
        const rllg::RunResult r = rllg::run_experiment(cfg, out_dir);
        for (const auto& c : r.checks)
            std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << " = " << c.value << " (" << c.relation << ")\n";
        std::cout << (r.passed() ? "all checks passed" : "some checks failed") << "; artifacts in " << out_dir << "\n";
        return r.passed() ? 0 : 1;
    } catch (const rllg::NumericalAbort& e) {
        std::cerr << "numerical abort at node " << e.node() << ", grid point " << e.point() << ": " << e.what() << "\n";
        return 3;
    } catch (const rllg::ConfigError& e) {
        std::cerr << "invalid config: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
}
