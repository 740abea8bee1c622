#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "contagion/convergence.hpp"
#include "contagion/finite_sim.hpp"
#include "contagion/mean_field.hpp"
#include "contagion/network.hpp"

namespace contagion::cli {

using nlohmann::json;

// Path-tracking view of one JSON object. Every read is mirrored into a
// normalized document with defaults filled; finish() rejects unread keys.
class Node {
public:
    Node(const json& value, std::string path, json* normalized);

    const std::string& path() const { return path_; }
    json* normalized() const { return normalized_; }
    std::string path_of(const std::string& key) const;
    bool has(const std::string& key) const;

    double number(const std::string& key) const;
    double number(const std::string& key, double fallback) const;
    std::uint64_t u64(const std::string& key, std::uint64_t fallback) const;
    std::size_t count(const std::string& key) const;
    std::size_t count(const std::string& key, std::size_t fallback) const;
    bool boolean(const std::string& key, bool fallback) const;
    std::string string(const std::string& key) const;
    std::string string(const std::string& key, const std::string& fallback) const;
    std::vector<double> numbers(const std::string& key) const;
    std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback) const;
    std::vector<std::size_t> counts(const std::string& key) const;
    Eigen::MatrixXd matrix(const std::string& key) const;
    PiecewiseConstant piecewise(const std::string& key, double fallback) const;

    Node child(const std::string& key) const;
    // Missing key reads as an empty object.
    Node child_or_empty(const std::string& key) const;
    std::vector<Node> elements(const std::string& key) const;
    bool is_array(const std::string& key) const;

    void finish() const;
    [[noreturn]] void fail(const std::string& key, const std::string& message) const;

private:
    const json& raw(const std::string& key) const;
    void mark(const std::string& key) const;

    const json* value_;
    std::string path_;
    json* normalized_;
    mutable std::set<std::string> used_;
};

struct CascadeTestConfig {
    std::size_t trials = 10000;
    std::size_t n_min = 2;
    std::size_t n_max = 8;
};

struct ScenarioConfig {
    std::string mode;
    std::uint64_t seed = 0;
    std::uint64_t common_seed = 0;
    std::size_t seed_count = 100;

    // Finite-system scenarios.
    std::optional<LiabilityNetwork> network;
    std::optional<LiabilityNetwork> reduced;
    std::vector<BankParams> banks;
    MarketParams market;
    SimConfig sim;
    double rank_tol = 1e-9;

    // Mean-field scenarios.
    std::optional<MixtureSpec> mixture;
    MFConfig mf;

    std::optional<ScalingBase> scaling;
    ScalingConfig scaling_config;

    CascadeTestConfig cascade_test;

    json normalized;  // full effective configuration
};

const std::vector<std::string>& known_modes();

// Built-in configuration of a reproduce-* mode; empty object for other modes.
json builtin_config(const std::string& mode);

// Validates a configuration document for `mode`. Reproduce modes merge the
// document over their built-in configuration first.
ScenarioConfig parse_config(const std::string& mode, const json& document,
                            std::optional<std::uint64_t> seed_override = std::nullopt);

json load_json_file(const std::filesystem::path& path);

}  // namespace contagion::cli
