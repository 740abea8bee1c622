#ifdef CONTAGION_HAVE_CLI

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "contagion/errors.hpp"
#include "contagion_cli/config.hpp"
#include "contagion_cli/io.hpp"
#include "contagion_cli/runner.hpp"

using namespace contagion;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("contagion_unit_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

std::string validation_message(const std::string& mode, const json& doc) {
    try {
        cli::parse_config(mode, doc);
    } catch (const ValidationError& e) {
        return e.what();
    }
    return "";
}

json two_bank() {
    return {{"network", {{"rates", {{0, 1}, {1, 0}}}, {"societal", 1.0}}},
            {"banks", {{"x0_ratio", 2.0}, {"sigma", 0.3}}}};
}

}  // namespace

TEST_CASE("minimal reproduce config fills the default time step") {
    const auto cfg = cli::parse_config("reproduce-3bank", json::object());
    CHECK(cfg.sim.dt == doctest::Approx(1.0 / 2000.0));
    CHECK(cfg.network->size() == 3);
    CHECK(cfg.banks[0].x0 == doctest::Approx(2.0 * std::exp(-1.0)));
    CHECK(cfg.normalized["simulation"]["dt"].get<double>() == doctest::Approx(0.0005));
}

TEST_CASE("missing seeds default to zero") {
    const auto cfg = cli::parse_config("simulate-finite", two_bank());
    CHECK(cfg.seed == 0);
    CHECK(cfg.common_seed == 0);
    CHECK(cfg.normalized["seeds"]["seed"] == 0);
}

TEST_CASE("seed override is recorded") {
    const auto cfg = cli::parse_config("simulate-finite", two_bank(), 17);
    CHECK(cfg.seed == 17);
    CHECK(cfg.normalized["seeds"]["seed"] == 17);
}

TEST_CASE("validation errors name the offending field") {
    auto doc = two_bank();
    doc["simulation"] = {{"recovery", -0.1}};
    CHECK(validation_message("simulate-finite", doc).find("simulation.recovery") != std::string::npos);

    doc = two_bank();
    doc["banks"]["colour"] = "red";
    CHECK(validation_message("simulate-finite", doc).find("banks.colour") != std::string::npos);

    doc = two_bank();
    doc["network"]["rates"] = {{0, 1}, {1}};
    CHECK_FALSE(validation_message("simulate-finite", doc).empty());

    CHECK(validation_message("simulate-finite", json::object()).find("network") != std::string::npos);
    CHECK_FALSE(validation_message("simulate-finite", {{"mode", "picard"}}).empty());
}

TEST_CASE("picard mode requires zero common noise") {
    const json doc = {{"mixture",
                       {{"types", {{{"initial", {{"kind", "gaussian"}, {"mean", 0.5}, {"sd", 0.1}}}}}},
                        {"rho", 0.2}}}};
    CHECK(validation_message("picard", doc).find("rho") != std::string::npos);
}

TEST_CASE("every example config parses") {
    const fs::path dir = CONTAGION_CONFIG_DIR;
    for (const auto& [mode, file] : std::vector<std::pair<std::string, std::string>>{
             {"simulate-finite", "simulate_finite.json"},
             {"solve-mf", "solve_mf.json"},
             {"picard", "picard.json"},
             {"scaling-study", "scaling_study.json"},
             {"full-vs-reduced", "full_vs_reduced.json"},
             {"cascade-test", "cascade_test.json"}}) {
        CAPTURE(file);
        CHECK_NOTHROW(cli::parse_config(mode, cli::load_json_file(dir / file)));
    }
    for (const auto& mode : {"reproduce-3bank", "reproduce-coreperiphery", "reproduce-heatplots"})
        CHECK_NOTHROW(cli::parse_config(mode, json::object()));
}

TEST_CASE("missing config file is an I/O error") {
    CHECK_THROWS_AS(cli::load_json_file("/nonexistent/contagion.json"), IoError);
}

TEST_CASE("floats are written with 17 significant digits") {
    CHECK(cli::format_double(0.1) == "0.10000000000000001");
    CHECK(cli::format_double(1.0 / 0.0) == "inf");
    CHECK(cli::dump_json(json{{"x", 0.1}}) == "{\n  \"x\": 0.10000000000000001\n}");
    CHECK(cli::dump_json(json::array({std::nan("")})) == "[\n  null\n]");
}

TEST_CASE("SHA-256 of a known file") {
    const fs::path dir = scratch("sha");
    fs::create_directories(dir);
    std::ofstream(dir / "abc.txt", std::ios::binary) << "abc";
    CHECK(cli::sha256_hex(dir / "abc.txt") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    fs::remove_all(dir);
}

TEST_CASE("manifest lists every emitted file") {
    const fs::path dir = scratch("manifest");
    const auto cfg = cli::parse_config("reproduce-3bank", json::object());
    const auto summary = cli::run(cfg, dir);
    const json manifest = json::parse(slurp(dir / "manifest.json"));
    CHECK(manifest["files"].size() == summary.files);
    for (const auto& entry : manifest["files"]) {
        const fs::path p = dir / entry["path"].get<std::string>();
        REQUIRE(fs::exists(p));
        CHECK(entry["sha256"] == cli::sha256_hex(p));
        CHECK(entry["bytes"] == fs::file_size(p));
    }
    CHECK(manifest["mode"] == "reproduce-3bank");
    CHECK(manifest["seeds"]["seed"] == cfg.seed);
    CHECK(fs::exists(dir / "trajectories.csv"));
    CHECK(slurp(dir / "defaults.csv").rfind("bank,tau,cascade_round\n", 0) == 0);
    fs::remove_all(dir);
}

TEST_CASE("re-running a scenario overwrites identically") {
    const fs::path dir = scratch("rerun");
    const auto cfg = cli::parse_config("cascade-test", {{"cascade_test", {{"trials", 200}}}});
    cli::run(cfg, dir);
    const std::string first = slurp(dir / "cascade_test.csv");
    const std::string manifest = slurp(dir / "manifest.json");
    cli::run(cfg, dir);
    CHECK(slurp(dir / "cascade_test.csv") == first);
    CHECK(slurp(dir / "manifest.json") == manifest);
    fs::remove_all(dir);
}

#endif
