#include "contagion_cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "contagion/errors.hpp"

namespace contagion::cli {

namespace {

std::string describe(const json& v) {
    std::string s = v.dump();
    return s.size() > 40 ? s.substr(0, 37) + "..." : s;
}

}  // namespace

Node::Node(const json& value, std::string path, json* normalized)
    : value_(&value), path_(std::move(path)), normalized_(normalized) {
    if (!value.is_object()) {
        throw ValidationError((path_.empty() ? std::string("configuration") : path_) + ": expected an object");
    }
    if (normalized_ && !normalized_->is_object()) *normalized_ = json::object();
}

std::string Node::path_of(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

bool Node::has(const std::string& key) const { return value_->contains(key); }

void Node::fail(const std::string& key, const std::string& message) const {
    throw ValidationError((key.empty() ? path_ : path_of(key)) + ": " + message);
}

const json& Node::raw(const std::string& key) const {
    if (!has(key)) fail(key, "required field is missing");
    mark(key);
    return (*value_)[key];
}

void Node::mark(const std::string& key) const { used_.insert(key); }

double Node::number(const std::string& key) const {
    const json& v = raw(key);
    if (!v.is_number()) fail(key, "expected a number, got " + describe(v));
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(key, "must be finite");
    if (normalized_) (*normalized_)[key] = x;
    return x;
}

double Node::number(const std::string& key, double fallback) const {
    if (!has(key)) {
        if (normalized_) (*normalized_)[key] = fallback;
        return fallback;
    }
    return number(key);
}

std::uint64_t Node::u64(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) {
        if (normalized_) (*normalized_)[key] = fallback;
        return fallback;
    }
    const json& v = raw(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
        fail(key, "expected a nonnegative integer, got " + describe(v));
    }
    const auto x = v.get<std::uint64_t>();
    if (normalized_) (*normalized_)[key] = x;
    return x;
}

std::size_t Node::count(const std::string& key) const {
    if (!has(key)) fail(key, "required field is missing");
    return static_cast<std::size_t>(u64(key, 0));
}

std::size_t Node::count(const std::string& key, std::size_t fallback) const {
    return static_cast<std::size_t>(u64(key, fallback));
}

bool Node::boolean(const std::string& key, bool fallback) const {
    if (!has(key)) {
        if (normalized_) (*normalized_)[key] = fallback;
        return fallback;
    }
    const json& v = raw(key);
    if (!v.is_boolean()) fail(key, "expected true or false, got " + describe(v));
    if (normalized_) (*normalized_)[key] = v;
    return v.get<bool>();
}

std::string Node::string(const std::string& key) const {
    const json& v = raw(key);
    if (!v.is_string()) fail(key, "expected a string, got " + describe(v));
    if (normalized_) (*normalized_)[key] = v;
    return v.get<std::string>();
}

std::string Node::string(const std::string& key, const std::string& fallback) const {
    if (!has(key)) {
        if (normalized_) (*normalized_)[key] = fallback;
        return fallback;
    }
    return string(key);
}

std::vector<double> Node::numbers(const std::string& key) const {
    const json& v = raw(key);
    if (!v.is_array()) fail(key, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number() || !std::isfinite(v[i].get<double>())) {
            fail(key + "[" + std::to_string(i) + "]", "expected a finite number, got " + describe(v[i]));
        }
        out.push_back(v[i].get<double>());
    }
    if (normalized_) (*normalized_)[key] = out;
    return out;
}

std::vector<double> Node::numbers(const std::string& key, const std::vector<double>& fallback) const {
    if (!has(key)) {
        if (normalized_) (*normalized_)[key] = fallback;
        return fallback;
    }
    return numbers(key);
}

std::vector<std::size_t> Node::counts(const std::string& key) const {
    const json& v = raw(key);
    if (!v.is_array()) fail(key, "expected an array of integers");
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number_unsigned() && !(v[i].is_number_integer() && v[i].get<std::int64_t>() >= 0)) {
            fail(key + "[" + std::to_string(i) + "]", "expected a nonnegative integer, got " + describe(v[i]));
        }
        out.push_back(v[i].get<std::size_t>());
    }
    if (normalized_) (*normalized_)[key] = out;
    return out;
}

Eigen::MatrixXd Node::matrix(const std::string& key) const {
    const json& v = raw(key);
    if (!v.is_array()) fail(key, "expected an array of rows");
    const std::size_t rows = v.size();
    const std::size_t cols = rows ? (v[0].is_array() ? v[0].size() : 0) : 0;
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows; ++i) {
        const std::string row_key = key + "[" + std::to_string(i) + "]";
        if (!v[i].is_array() || v[i].size() != cols) fail(row_key, "rows must be arrays of equal length");
        for (std::size_t j = 0; j < cols; ++j) {
            if (!v[i][j].is_number() || !std::isfinite(v[i][j].get<double>())) {
                fail(row_key + "[" + std::to_string(j) + "]", "expected a finite number");
            }
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v[i][j].get<double>();
        }
    }
    if (normalized_) (*normalized_)[key] = v;
    return m;
}

PiecewiseConstant Node::piecewise(const std::string& key, double fallback) const {
    if (!has(key)) {
        if (normalized_) (*normalized_)[key] = fallback;
        return PiecewiseConstant(fallback);
    }
    if (raw(key).is_number()) return PiecewiseConstant(number(key));
    const Node c = child(key);
    auto breaks = c.numbers("breaks");
    auto values = c.numbers("values");
    c.finish();
    if (values.size() != breaks.size() + 1) fail(key, "needs exactly one more value than breaks");
    for (std::size_t k = 0; k < breaks.size(); ++k) {
        if (!(breaks[k] > (k ? breaks[k - 1] : 0.0))) fail(key + ".breaks", "must be positive and increasing");
    }
    return PiecewiseConstant(std::move(breaks), std::move(values));
}

Node Node::child(const std::string& key) const {
    const json& v = raw(key);
    if (!v.is_object()) fail(key, "expected an object, got " + describe(v));
    json* sub = nullptr;
    if (normalized_) {
        (*normalized_)[key] = json::object();
        sub = &(*normalized_)[key];
    }
    return Node(v, path_of(key), sub);
}

Node Node::child_or_empty(const std::string& key) const {
    if (has(key)) return child(key);
    static const json empty = json::object();
    json* sub = nullptr;
    if (normalized_) {
        (*normalized_)[key] = json::object();
        sub = &(*normalized_)[key];
    }
    return Node(empty, path_of(key), sub);
}

bool Node::is_array(const std::string& key) const { return has(key) && (*value_)[key].is_array(); }

std::vector<Node> Node::elements(const std::string& key) const {
    const json& v = raw(key);
    if (!v.is_array()) fail(key, "expected an array");
    json* arr = nullptr;
    if (normalized_) {
        (*normalized_)[key] = json::array();
        arr = &(*normalized_)[key];
        for (std::size_t i = 0; i < v.size(); ++i) arr->push_back(json::object());
    }
    std::vector<Node> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out.emplace_back(v[i], path_of(key) + "[" + std::to_string(i) + "]", arr ? &(*arr)[i] : nullptr);
    }
    return out;
}

void Node::finish() const {
    for (const auto& item : value_->items()) {
        if (!used_.count(item.key())) fail(item.key(), "unknown key");
    }
}

namespace {

// Rethrows library validation failures under the section's path.
template <typename F>
auto within(const Node& node, F&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const ValidationError& e) {
        throw ValidationError((node.path().empty() ? std::string("configuration") : node.path()) + ": " + e.what());
    }
}

LiabilityNetwork parse_network(const Node& node) {
    LiabilityNetwork net;
    net.horizon = node.number("T", 1.0);
    if (!(net.horizon > 0.0)) node.fail("T", "must be positive");
    net.rates = node.matrix("rates");
    if (net.rates.rows() != net.rates.cols()) node.fail("rates", "must be square");
    const std::size_t n = static_cast<std::size_t>(net.rates.rows());
    if (node.has("n") && node.count("n") != n) node.fail("n", "does not match the rate matrix");
    if (node.is_array("societal")) {
        net.societal = node.numbers("societal");
        if (net.societal.size() != n) node.fail("societal", "needs one entry per bank");
    } else {
        net.societal.assign(n, node.number("societal", 0.0));
    }
    node.finish();
    within(node, [&] { net.validate(); });
    return net;
}

BlockSpec parse_block_spec(const Node& node) {
    BlockSpec spec;
    spec.core = node.matrix("core");
    for (auto& g : node.elements("groups")) {
        PeripheryGroup group;
        group.size = g.count("size");
        group.core_to_group = g.numbers("core_to_group");
        group.group_to_core = g.numbers("group_to_core");
        g.finish();
        spec.groups.push_back(std::move(group));
    }
    spec.societal_rate = node.number("societal_rate", 0.0);
    within(node, [&] { spec.validate(); });
    return spec;
}

NoiseSpec parse_noise(const Node& node, std::uint64_t seed) {
    const std::string kind = node.string("kind", "dirac_zero");
    if (kind == "dirac_zero") return NoiseSpec::dirac_zero();
    if (kind == "uniform") {
        const double a = node.number("half_width");
        return within(node, [&] { return NoiseSpec::uniform(a, seed); });
    }
    if (kind != "discrete") node.fail("kind", "expected dirac_zero, uniform or discrete");
    auto points = node.numbers("points");
    auto weights = node.numbers("weights");
    return within(node, [&] {
        NoiseSpec noise = NoiseSpec::discrete(std::move(points), std::move(weights), seed);
        noise.validate();
        return noise;
    });
}

// A network given directly or generated from a block specification.
LiabilityNetwork parse_network_source(const Node& root, const std::string& key, std::uint64_t seed) {
    if (root.has(key)) return parse_network(root.child(key));
    const std::string block_key = key == "network" ? "block_spec" : key + "_block_spec";
    if (!root.has(block_key)) root.fail(key, "required field is missing");
    const Node node = root.child(block_key);
    BlockSpec spec = parse_block_spec(node);
    const double T = node.number("horizon", 1.0);
    const std::size_t m = node.count("scale", 1);
    if (m == 0) node.fail("scale", "must be at least 1");
    const Node noise_node = node.child_or_empty("noise");
    NoiseSpec noise = parse_noise(noise_node, seed);
    noise_node.finish();
    node.finish();
    return within(node, [&] {
        LiabilityNetwork base = build_block_matrix(spec, T);
        LiabilityNetwork scaled = scale_network(base, m, spec.core_count());
        return apply_noise(scaled, noise).network;
    });
}

std::vector<BankParams> parse_banks(const Node& root, const LiabilityNetwork& net) {
    const std::size_t n = net.size();
    std::vector<BankParams> banks;
    if (root.is_array("banks")) {
        for (auto& b : root.elements("banks")) {
            BankParams p;
            p.x0 = b.number("x0");
            p.mu = b.piecewise("mu", 0.0);
            p.sigma = b.piecewise("sigma", 0.0);
            b.finish();
            banks.push_back(std::move(p));
        }
        if (banks.size() != n) root.fail("banks", "needs one entry per bank");
    } else {
        const Node b = root.child("banks");
        BankParams p;
        p.mu = b.piecewise("mu", 0.0);
        p.sigma = b.piecewise("sigma", 0.0);
        const std::vector<double> lbar = net_liabilities(net);
        if (b.has("x0")) {
            p.x0 = b.number("x0");
            banks.assign(n, p);
        } else {
            const double ratio = b.number("x0_ratio");
            if (!(ratio > 1.0)) b.fail("x0_ratio", "must exceed 1 so that no bank starts in default");
            const double fallback = b.number("x0_nonpositive", 1.0);
            const double discount = std::exp(-p.mu.integral(0.0, net.horizon));
            for (std::size_t i = 0; i < n; ++i) {
                BankParams q = p;
                q.x0 = lbar[i] > 0.0 ? ratio * lbar[i] * discount : fallback;
                banks.push_back(q);
            }
        }
        b.finish();
    }
    for (std::size_t i = 0; i < banks.size(); ++i) {
        if (!(banks[i].x0 > 0.0)) root.fail("banks", "bank " + std::to_string(i) + " needs x0 > 0");
        if (banks[i].sigma.min_value() < 0.0) root.fail("banks", "volatility must be nonnegative");
    }
    return banks;
}

void parse_simulation(const Node& node, ScenarioConfig& cfg, double horizon) {
    cfg.market.rho = node.number("rho", 0.0);
    if (!(cfg.market.rho > -1.0 && cfg.market.rho < 1.0)) node.fail("rho", "must lie in (-1,1)");
    cfg.market.recovery = node.number("recovery", 0.0);
    if (!(cfg.market.recovery >= 0.0 && cfg.market.recovery <= 1.0)) node.fail("recovery", "must lie in [0,1]");
    cfg.sim.dt = node.number("dt", horizon / 2000.0);
    if (!(cfg.sim.dt > 0.0)) node.fail("dt", "must be positive");
    within(node, [&] { step_count(horizon, cfg.sim.dt); });
    cfg.sim.record_paths = node.boolean("record_paths", true);
    cfg.rank_tol = node.number("rank_tol", 1e-9);
    if (!(cfg.rank_tol > 0.0 && cfg.rank_tol < 1.0)) node.fail("rank_tol", "must lie in (0,1)");
    node.finish();
}

FeedbackMap parse_feedback(const Node& node) {
    const std::string kind = node.string("kind", "linear");
    FeedbackMap map = FeedbackMap::linear(0.0);
    if (kind == "linear") {
        const double alpha = node.number("alpha", 0.0);
        if (!(alpha >= 0.0)) node.fail("alpha", "must be nonnegative");
        map = FeedbackMap::linear(alpha);
    } else if (kind == "log1p") {
        const double c = node.number("c");
        if (!(c >= 0.0)) node.fail("c", "must be nonnegative");
        map = FeedbackMap::log1p_scaled(c);
    } else if (kind == "eisenberg_noe") {
        const double lambda = node.number("lambda");
        if (!(lambda > 0.0)) node.fail("lambda", "must be positive");
        const double recovery = node.number("recovery");
        if (!(recovery >= 0.0 && recovery <= 1.0)) node.fail("recovery", "must lie in [0,1]");
        map = FeedbackMap::log1p_scaled((1.0 - recovery) / lambda);
    } else {
        node.fail("kind", "expected linear, log1p or eisenberg_noe");
    }
    node.finish();
    return map;
}

DecayFn parse_decay(const Node& node, double horizon) {
    const std::string kind = node.string("kind", "linear");
    DecayFn decay = DecayFn::constant(1.0);
    if (kind == "linear") {
        decay = DecayFn::linear_decay(horizon);
    } else if (kind == "constant") {
        const double c = node.number("value", 1.0);
        if (!(c >= 0.0)) node.fail("value", "must be nonnegative");
        decay = DecayFn::constant(c);
    } else {
        node.fail("kind", "expected linear or constant");
    }
    node.finish();
    return decay;
}

InitialProfile parse_initial(const Node& node) {
    const std::string kind = node.string("kind");
    InitialProfile profile;
    if (kind == "gaussian") {
        const double mean = node.number("mean"), sd = node.number("sd");
        profile = within(node, [&] { return InitialProfile::gaussian(mean, sd); });
    } else if (kind == "uniform") {
        const double lo = node.number("lo"), hi = node.number("hi");
        profile = within(node, [&] { return InitialProfile::uniform(lo, hi); });
    } else if (kind == "samples") {
        const double dx = node.number("dx");
        auto values = node.numbers("values");
        profile = within(node, [&] { return InitialProfile::from_samples(dx, std::move(values)); });
    } else if (kind == "asset") {
        const Node d = node.child("density");
        const std::string dk = d.string("kind");
        AssetDensity asset;
        if (dk == "lognormal") {
            const double shift = d.number("shift"), mean = d.number("log_mean"), sd = d.number("log_sd");
            asset = within(d, [&] { return AssetDensity::shifted_lognormal(shift, mean, sd); });
        } else if (dk == "uniform") {
            const double lo = d.number("lo"), hi = d.number("hi");
            asset = within(d, [&] { return AssetDensity::uniform(lo, hi); });
        } else {
            d.fail("kind", "expected lognormal or uniform");
        }
        d.finish();
        const double lambda = node.number("lambda");
        if (!(lambda > 0.0)) node.fail("lambda", "must be positive");
        const double mu_integral = node.number("mu_integral", 0.0);
        const double horizon = node.number("horizon", 1.0);
        profile = within(node, [&] { return InitialProfile::from_assets(asset, lambda, mu_integral, horizon); });
    } else {
        node.fail("kind", "expected gaussian, uniform, samples or asset");
    }
    node.finish();
    return profile;
}

ThetaQuadrature parse_theta(const Node& node, std::size_t* nodes_out = nullptr, NoiseSpec* law_out = nullptr) {
    NoiseSpec law = parse_noise(node, 0);
    const std::size_t nodes = node.count("nodes", law.kind == NoiseSpec::Kind::Uniform ? 3 : 1);
    if (nodes == 0) node.fail("nodes", "must be at least 1");
    node.finish();
    if (nodes_out) *nodes_out = nodes;
    if (law_out) *law_out = law;
    return within(node, [&] { return ThetaQuadrature::from_noise(law, nodes); });
}

MixtureSpec parse_mixture(const Node& node) {
    MixtureSpec spec;
    spec.horizon = node.number("horizon", 1.0);
    if (!(spec.horizon > 0.0)) node.fail("horizon", "must be positive");
    const auto types = node.elements("types");
    for (auto& t : types) {
        MixtureType type;
        type.name = t.string("name", "type " + std::to_string(spec.types.size() + 1));
        type.weight = t.number("weight", 1.0 / static_cast<double>(std::max<std::size_t>(types.size(), 1)));
        type.drift = t.piecewise("drift", 0.0);
        type.vol = t.piecewise("vol", 1.0);
        type.feedback = parse_feedback(t.child_or_empty("feedback"));
        type.initial = parse_initial(t.child("initial"));
        t.finish();
        spec.types.push_back(std::move(type));
    }
    const std::size_t L = spec.types.size();
    if (node.has("exposures")) {
        spec.exposures = node.matrix("exposures");
        if (static_cast<std::size_t>(spec.exposures.rows()) != L || static_cast<std::size_t>(spec.exposures.cols()) != L) {
            node.fail("exposures", "must be num_types x num_types");
        }
    } else {
        spec.exposures = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(L), static_cast<Eigen::Index>(L));
        if (node.normalized()) (*node.normalized())["exposures"] = json::array();
    }
    spec.decay = parse_decay(node.child_or_empty("decay"), spec.horizon);
    spec.theta = parse_theta(node.child_or_empty("theta"));
    spec.rho = node.number("rho", 0.0);
    if (!(spec.rho > -1.0 && spec.rho < 1.0)) node.fail("rho", "must lie in (-1,1)");
    node.finish();
    within(node, [&] { spec.validate(); });
    return spec;
}

MFConfig parse_mf_config(const Node& node) {
    MFConfig c;
    c.dx = node.number("dx", c.dx);
    c.dt = node.number("dt", c.dt);
    c.x_max = node.number("x_max", c.x_max);
    c.eps0 = node.number("eps0", c.eps0);
    c.eps_decay = node.number("eps_decay", c.eps_decay);
    c.eps_min = node.number("eps_min", c.eps_min);
    c.inner_tol = node.number("inner_tol", c.inner_tol);
    c.inner_cap = node.count("inner_cap", c.inner_cap);
    c.cascade_tol = node.number("cascade_tol", c.cascade_tol);
    c.cascade_cap = node.count("cascade_cap", c.cascade_cap);
    c.mass_tol = node.number("mass_tol", c.mass_tol);
    c.explosion_threshold = node.number("explosion_threshold", c.explosion_threshold);
    c.tail_tol = node.number("tail_tol", c.tail_tol);
    c.no_jump_window = node.count("no_jump_window", c.no_jump_window);
    c.picard_tol = node.number("picard_tol", c.picard_tol);
    c.picard_cap = node.count("picard_cap", c.picard_cap);
    c.snapshot_every = node.count("snapshot_every", c.snapshot_every);
    c.snapshot_times = node.numbers("snapshot_times", c.snapshot_times);
    node.finish();
    within(node, [&] { c.validate(); });
    return c;
}

ScalingBase parse_scaling(const Node& node, ScalingConfig& sc) {
    ScalingBase base;
    base.blocks = parse_block_spec(node.child("block_spec"));
    base.horizon = node.number("horizon", 1.0);
    if (!(base.horizon > 0.0)) node.fail("horizon", "must be positive");
    for (auto& t : node.elements("types")) {
        TypeDynamics type;
        type.name = t.string("name", "type " + std::to_string(base.types.size() + 1));
        type.drift = t.piecewise("drift", 0.0);
        type.vol = t.piecewise("vol", 1.0);
        type.feedback = parse_feedback(t.child_or_empty("feedback"));
        type.initial = parse_initial(t.child("initial"));
        t.finish();
        base.types.push_back(std::move(type));
    }
    base.decay = parse_decay(node.child_or_empty("decay"), base.horizon);
    parse_theta(node.child_or_empty("theta"), &base.theta_nodes, &base.theta_noise);
    base.rho = node.number("rho", 0.0);
    if (!(base.rho > -1.0 && base.rho < 1.0)) node.fail("rho", "must lie in (-1,1)");
    base.finite_stride = node.count("finite_stride", 1);
    if (base.finite_stride == 0) node.fail("finite_stride", "must be at least 1");
    sc.m_list = node.counts("m_list");
    if (sc.m_list.empty()) node.fail("m_list", "needs at least one multiplier");
    for (std::size_t m : sc.m_list)
        if (m == 0) node.fail("m_list", "multipliers must be positive");
    sc.seeds_per_m = node.count("seeds_per_m", 20);
    if (sc.seeds_per_m == 0) node.fail("seeds_per_m", "must be at least 1");
    node.finish();
    within(node, [&] {
        if (base.types.size() != base.atlas().num_types()) {
            throw ValidationError("types: need one entry per type of the block specification (" +
                                  std::to_string(base.atlas().num_types()) + ")");
        }
    });
    return base;
}

}  // namespace

const std::vector<std::string>& known_modes() {
    static const std::vector<std::string> modes = {
        "simulate-finite", "solve-mf",       "picard", "cascade-test", "scaling-study", "full-vs-reduced",
        "reproduce-3bank", "reproduce-coreperiphery", "reproduce-heatplots"};
    return modes;
}

namespace {

json core_periphery_rates() {
    return json::array({{0, 15.01, 0, 0, 0, 0, 3.43, 2.87, 2.87, 2.80},
                        {45.35, 0, 3.08, 2.36, 2.78, 2.80, 1.13, 0.94, 0.94, 0.92},
                        {4.54, 2.23, 0, 0.04, 0, 0.05, 0.06, 0.05, 0.05, 0},
                        {5.90, 2.90, 0, 0, 0, 0.06, 0.07, 0, 0, 0},
                        {4.67, 2.29, 0.05, 0.04, 0, 0, 0, 0.05, 0, 0.05},
                        {4.40, 2.16, 0.05, 0.04, 0, 0, 0.05, 0.05, 0.05, 0},
                        {3.64, 4.47, 0, 0.04, 0, 0.05, 0, 0, 0, 0.05},
                        {3.41, 4.18, 0, 0.04, 0.04, 0.04, 0.05, 0, 0, 0.04},
                        {3.25, 3.99, 0, 0, 0, 0, 0.05, 0.04, 0, 0},
                        {4.31, 5.29, 0, 0.05, 0, 0, 0, 0, 0, 0}});
}

json core_periphery_reduced_rates() {
    json m = core_periphery_rates();
    for (std::size_t i = 2; i < 10; ++i)
        for (std::size_t j = 2; j < 10; ++j) m[i][j] = 0;
    return m;
}

json heat_type(const std::string& name, double weight, double drift, double mean, double lambda) {
    return {{"name", name},
            {"weight", weight},
            {"drift", drift},
            {"vol", 0.4},
            {"feedback", {{"kind", "eisenberg_noe"}, {"lambda", lambda}, {"recovery", 0.1}}},
            {"initial", {{"kind", "gaussian"}, {"mean", mean}, {"sd", 0.15}}}};
}

}  // namespace

json builtin_config(const std::string& mode) {
    if (mode == "reproduce-3bank") {
        return {{"seeds", {{"seed", 841}, {"common_seed", 841}}},
                {"network", {{"T", 1.0}, {"rates", {{0, 2, 2}, {2, 0, 2}, {2, 2, 0}}}, {"societal", 1.0}}},
                {"banks", {{"x0_ratio", 2.0}, {"mu", 1.0}, {"sigma", 0.5}}},
                {"simulation", {{"rho", std::sqrt(0.5)}, {"recovery", 0.1}}}};
    }
    if (mode == "reproduce-coreperiphery") {
        return {{"seeds", {{"seed", 0}, {"count", 100}}},
                {"network", {{"T", 1.0}, {"rates", core_periphery_rates()}, {"societal", 1.0}}},
                {"reduced", {{"T", 1.0}, {"rates", core_periphery_reduced_rates()}, {"societal", 1.0}}},
                {"banks", {{"x0_ratio", 1.25}, {"x0_nonpositive", 20.0}, {"mu", 0.0}, {"sigma", 0.5}}},
                {"simulation", {{"rho", std::sqrt(0.5)}, {"recovery", 0.1}}}};
    }
    if (mode == "reproduce-heatplots") {
        json times = json::array();
        for (int k = 0; k <= 100; ++k) times.push_back(k / 100.0);
        return {{"seeds", {{"common_seed", 1}}},
                {"mixture",
                 {{"types",
                   {heat_type("Core 1", 0.1, -0.5, 0.6, 1.0), heat_type("Core 2", 0.1, 0.3, 2.0, 40.0),
                    heat_type("Periphery 1", 0.4, 0.3, 1.2, 1.0), heat_type("Periphery 2", 0.4, -0.5, 0.6, 1.0)}},
                  {"exposures", {{0, 15, 0, 12}, {45, 0, 12, 4}, {20, 8, 0, 0}, {16, 12, 0, 0}}},
                  {"decay", {{"kind", "linear"}}},
                  {"rho", 0.3},
                  {"horizon", 1.0}}},
                {"mean_field", {{"dx", 0.01}, {"snapshot_times", times}}}};
    }
    return json::object();
}

ScenarioConfig parse_config(const std::string& mode, const json& document, std::optional<std::uint64_t> seed_override) {
    if (std::find(known_modes().begin(), known_modes().end(), mode) == known_modes().end()) {
        throw ValidationError("unknown mode '" + mode + "'");
    }
    if (!document.is_object()) throw ValidationError("configuration: expected a JSON object");
    json merged = builtin_config(mode);
    merged.merge_patch(document);

    ScenarioConfig cfg;
    cfg.mode = mode;
    cfg.normalized = json::object();
    const Node root(merged, "", &cfg.normalized);
    if (root.has("mode") && root.string("mode") != mode) root.fail("mode", "does not match the requested mode");
    cfg.normalized["mode"] = mode;

    const bool finite = mode == "simulate-finite" || mode == "reproduce-3bank";
    const bool comparison = mode == "full-vs-reduced" || mode == "reproduce-coreperiphery";
    const bool mean_field = mode == "solve-mf" || mode == "picard" || mode == "reproduce-heatplots";

    {
        const Node seeds = root.child_or_empty("seeds");
        cfg.seed = seeds.u64("seed", 0);
        if (!comparison && mode != "cascade-test") cfg.common_seed = seeds.u64("common_seed", 0);
        if (comparison) cfg.seed_count = seeds.count("count", 100);
        if (seed_override) {
            cfg.seed = *seed_override;
            (*seeds.normalized())["seed"] = cfg.seed;
        }
        seeds.finish();
    }
    if (comparison || mode == "cascade-test") cfg.common_seed = cfg.seed;
    cfg.sim.seed = cfg.seed;
    cfg.sim.common_seed = cfg.common_seed;

    if (finite || comparison) {
        cfg.network = parse_network_source(root, "network", cfg.seed);
        if (comparison) {
            cfg.reduced = parse_network_source(root, "reduced", cfg.seed);
            if (cfg.reduced->size() != cfg.network->size()) root.fail("reduced", "must have the same size as network");
            if (std::abs(cfg.reduced->horizon - cfg.network->horizon) > 0.0) root.fail("reduced.T", "must equal network.T");
        }
        cfg.banks = parse_banks(root, *cfg.network);
        parse_simulation(root.child_or_empty("simulation"), cfg, cfg.network->horizon);
        if (comparison) cfg.sim.record_paths = true;
    } else if (mean_field) {
        cfg.mixture = parse_mixture(root.child("mixture"));
        if (mode == "picard" && cfg.mixture->rho != 0.0) root.fail("mixture.rho", "the picard mode requires rho = 0");
        cfg.mf = parse_mf_config(root.child_or_empty("mean_field"));
    } else if (mode == "scaling-study") {
        cfg.scaling = parse_scaling(root.child("scaling"), cfg.scaling_config);
        cfg.scaling->mf = parse_mf_config(root.child_or_empty("mean_field"));
        cfg.scaling_config.seed = cfg.seed;
        cfg.scaling_config.common_seed = cfg.common_seed;
    } else if (mode == "cascade-test") {
        const Node c = root.child_or_empty("cascade_test");
        cfg.cascade_test.trials = c.count("trials", 10000);
        cfg.cascade_test.n_min = c.count("n_min", 2);
        cfg.cascade_test.n_max = c.count("n_max", 8);
        if (cfg.cascade_test.n_min < 1 || cfg.cascade_test.n_max < cfg.cascade_test.n_min) {
            c.fail("n_max", "needs 1 <= n_min <= n_max");
        }
        if (cfg.cascade_test.n_max > 20) c.fail("n_max", "the clearing oracle supports at most 20 banks");
        c.finish();
    }
    root.finish();
    return cfg;
}

json load_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open configuration file " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError(path.string() + ": malformed JSON: " + e.what());
    }
}

}  // namespace contagion::cli
