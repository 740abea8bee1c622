#include <CLI11.hpp>

#include <exception>
#include <iostream>
#include <optional>

#include "contagion/errors.hpp"
#include "contagion_cli/config.hpp"
#include "contagion_cli/runner.hpp"

int main(int argc, char** argv) {
    using namespace contagion;
    CLI::App app{"Simulate and analyse default contagion in liability networks"};
    app.set_version_flag("--version", cli::kVersion);

    std::string mode, config_path, out_dir = "out";
    std::optional<std::uint64_t> seed;
    app.add_option("mode", mode, "Scenario mode")->required()->check(CLI::IsMember(cli::known_modes()));
    app.add_option("--config", config_path, "JSON configuration file (optional for reproduce-* modes)");
    app.add_option("--out", out_dir, "Output directory");
    app.add_option("--seed", seed, "Override the primary seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : static_cast<int>(ExitCode::Validation);
    }

    try {
        nlohmann::json document = nlohmann::json::object();
        if (!config_path.empty()) {
            document = cli::load_json_file(config_path);
        } else if (mode.rfind("reproduce-", 0) != 0) {
            throw ValidationError("mode '" + mode + "' requires --config");
        }
        const cli::ScenarioConfig config = cli::parse_config(mode, document, seed);
        const cli::RunSummary summary = cli::run(config, out_dir);
        std::cout << mode << ": " << summary.headline << " (" << out_dir << ")\n";
        return 0;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::Numerical);
    }
}
