#include "contagion/mean_field.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "contagion/errors.hpp"

namespace contagion {

namespace {

std::vector<std::pair<double, double>> gauss_legendre(std::size_t count) {
    std::vector<std::pair<double, double>> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(count) + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (std::size_t k = 2; k <= count; ++k) {
                const double kk = static_cast<double>(k);
                const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
                p0 = p1;
                p1 = p2;
            }
            if (count == 1) {
                p1 = x;
                p0 = 1.0;
            }
            dp = static_cast<double>(count) * (x * p1 - p0) / (x * x - 1.0);
            const double step = p1 / dp;
            x -= step;
            if (std::abs(step) < 1e-15) break;
        }
        out[i] = {x, 2.0 / ((1.0 - x * x) * dp * dp)};
    }
    std::sort(out.begin(), out.end());
    return out;
}

double normal_upper_quantile(double tail) {
    // Coarse bound is enough for a support estimate.
    return std::sqrt(-2.0 * std::log(tail));
}

}  // namespace

ThetaQuadrature ThetaQuadrature::dirac_zero() { return ThetaQuadrature{}; }

ThetaQuadrature ThetaQuadrature::uniform(double half_width, std::size_t count) {
    if (!(half_width >= 0.0 && half_width <= 1.0)) throw ValidationError("theta half-width must lie in [0,1]");
    if (count == 0) throw ValidationError("theta quadrature needs at least one node");
    ThetaQuadrature q;
    q.nodes.clear();
    q.weights.clear();
    if (count == 1) {
        q.nodes = {0.0};
        q.weights = {1.0};
        return q;
    }
    for (const auto& [x, w] : gauss_legendre(count)) {
        q.nodes.push_back(half_width * x);
        q.weights.push_back(0.5 * w);
    }
    return q;
}

ThetaQuadrature ThetaQuadrature::from_noise(const NoiseSpec& noise, std::size_t count) {
    switch (noise.kind) {
        case NoiseSpec::Kind::DiracZero: return dirac_zero();
        case NoiseSpec::Kind::Uniform: return uniform(noise.half_width, count);
        case NoiseSpec::Kind::Discrete: {
            ThetaQuadrature q;
            q.nodes = noise.points;
            q.weights = noise.weights;
            q.validate();
            return q;
        }
    }
    return dirac_zero();
}

double ThetaQuadrature::max_scale() const {
    double m = 0.0;
    for (double t : nodes) m = std::max(m, 1.0 + t);
    return m;
}

void ThetaQuadrature::validate() const {
    if (nodes.empty() || nodes.size() != weights.size()) throw ValidationError("theta quadrature needs matching nodes and weights");
    double total = 0.0;
    for (std::size_t q = 0; q < nodes.size(); ++q) {
        if (!(nodes[q] >= -1.0 && nodes[q] <= 1.0)) throw ValidationError("theta nodes must lie in [-1,1]");
        if (!(weights[q] >= 0.0)) throw ValidationError("theta weights must be nonnegative");
        total += weights[q];
    }
    if (std::abs(total - 1.0) > 1e-12) throw ValidationError("theta weights must sum to 1");
}

AssetDensity AssetDensity::shifted_lognormal(double shift, double log_mean, double log_sd) {
    if (!(log_sd > 0.0)) throw ValidationError("lognormal log-sd must be positive");
    return AssetDensity{Kind::ShiftedLognormal, shift, log_mean, log_sd};
}

AssetDensity AssetDensity::uniform(double lo, double hi) {
    if (!(hi > lo)) throw ValidationError("uniform asset density needs hi > lo");
    return AssetDensity{Kind::Uniform, lo, hi, 0.0};
}

double AssetDensity::pdf(double y) const {
    if (kind == Kind::Uniform) return (y > a && y < b) ? 1.0 / (b - a) : 0.0;
    if (y <= a) return 0.0;
    const double z = (std::log(y - a) - b) / c;
    return std::exp(-0.5 * z * z) / ((y - a) * c * std::sqrt(2.0 * std::numbers::pi));
}

double AssetDensity::support_min() const { return a; }

double AssetDensity::quantile_upper(double tail) const {
    if (kind == Kind::Uniform) return b;
    return a + std::exp(b + c * normal_upper_quantile(tail));
}

InitialProfile InitialProfile::gaussian(double mean, double sd) {
    if (!(sd > 0.0)) throw ValidationError("gaussian initial density needs sd > 0");
    InitialProfile p;
    p.kind = Kind::Gaussian;
    p.p1 = mean;
    p.p2 = sd;
    return p;
}

InitialProfile InitialProfile::uniform(double lo, double hi) {
    if (!(lo >= 0.0 && hi > lo)) throw ValidationError("uniform initial density needs 0 <= lo < hi");
    InitialProfile p;
    p.kind = Kind::Uniform;
    p.p1 = lo;
    p.p2 = hi;
    return p;
}

InitialProfile InitialProfile::from_samples(double dx, std::vector<double> values) {
    if (!(dx > 0.0) || values.size() < 2) throw ValidationError("sampled initial density needs dx > 0 and two samples");
    for (double v : values)
        if (!(v >= 0.0)) throw ValidationError("sampled initial density must be nonnegative");
    InitialProfile p;
    p.kind = Kind::Samples;
    p.sample_dx = dx;
    p.samples = std::move(values);
    return p;
}

InitialProfile InitialProfile::from_assets(const AssetDensity& asset, double lambda, double mu_integral, double horizon) {
    InitialProfile p;
    p.kind = Kind::Asset;
    p.asset = asset;
    p.lambda = lambda;
    p.mu_integral = mu_integral;
    p.horizon = horizon;
    return p;
}

double InitialProfile::support_max() const {
    switch (kind) {
        case Kind::Gaussian: return p1 + 8.0 * p2;
        case Kind::Uniform: return p2;
        case Kind::Samples: return sample_dx * static_cast<double>(samples.size() - 1);
        case Kind::Asset: {
            const double c = lambda * horizon * std::exp(-mu_integral);
            return std::log(asset.quantile_upper(1e-12) / c);
        }
    }
    return 0.0;
}

std::vector<double> init_density(const AssetDensity& asset, double lambda, const PiecewiseConstant& mu,
                                 double horizon, double dx, std::size_t nodes) {
    if (!(lambda > 0.0)) throw ValidationError("initial density transform needs Lambda > 0");
    const double c = lambda * horizon * std::exp(-mu.integral(0.0, horizon));
    if (asset.support_min() < c * (1.0 - 1e-12)) {
        std::ostringstream os;
        os << "asset density puts mass at or below the default boundary " << c;
        throw ValidationError(os.str());
    }
    std::vector<double> out(nodes);
    for (std::size_t j = 0; j < nodes; ++j) {
        const double y = c * std::exp(static_cast<double>(j) * dx);
        out[j] = asset.pdf(y) * y;
    }
    return out;
}

std::vector<double> InitialProfile::discretize(double dx, std::size_t nodes) const {
    std::vector<double> out(nodes, 0.0);
    switch (kind) {
        case Kind::Gaussian:
            for (std::size_t j = 1; j < nodes; ++j) {
                const double z = (static_cast<double>(j) * dx - p1) / p2;
                out[j] = std::exp(-0.5 * z * z);
            }
            break;
        case Kind::Uniform:
            for (std::size_t j = 1; j < nodes; ++j) {
                const double x = static_cast<double>(j) * dx;
                if (x >= p1 && x <= p2) out[j] = 1.0 / (p2 - p1);
            }
            break;
        case Kind::Samples:
            for (std::size_t j = 0; j < nodes; ++j) {
                const double pos = static_cast<double>(j) * dx / sample_dx;
                const auto k = static_cast<std::size_t>(std::floor(pos));
                if (k + 1 >= samples.size()) {
                    if (k + 1 == samples.size() && pos - static_cast<double>(k) < 1e-12) out[j] = samples.back();
                    continue;
                }
                const double a = pos - static_cast<double>(k);
                out[j] = (1.0 - a) * samples[k] + a * samples[k + 1];
            }
            break;
        case Kind::Asset: {
            PiecewiseConstant mu(mu_integral / horizon);
            out = init_density(asset, lambda, mu, horizon, dx, nodes);
            break;
        }
    }
    return out;
}

void MixtureSpec::validate() const {
    const std::size_t L = num_types();
    if (L == 0) throw ValidationError("mixture needs at least one type");
    double total = 0.0;
    for (const auto& t : types) {
        if (!(t.weight >= 0.0)) throw ValidationError("type weights must be nonnegative");
        if (t.vol.min_value() < 0.0) throw ValidationError("type volatility must be nonnegative");
        total += t.weight;
    }
    if (std::abs(total - 1.0) > 1e-9) throw ValidationError("type weights must sum to 1");
    if (static_cast<std::size_t>(exposures.rows()) != L || static_cast<std::size_t>(exposures.cols()) != L) {
        throw ValidationError("exposure matrix must be num_types x num_types");
    }
    for (Eigen::Index i = 0; i < exposures.size(); ++i)
        if (!(exposures.data()[i] >= 0.0) || !std::isfinite(exposures.data()[i]))
            throw ValidationError("exposures must be finite and >= 0");
    theta.validate();
    if (!(rho > -1.0 && rho < 1.0)) throw ValidationError("rho must lie in (-1,1)");
    if (!(horizon > 0.0)) throw ValidationError("horizon must be positive");
}

void MFConfig::validate() const {
    if (!(dx > 0.0)) throw ValidationError("mf.dx must be positive");
    if (!(dt >= 0.0)) throw ValidationError("mf.dt must be >= 0");
    if (!(x_max >= 0.0)) throw ValidationError("mf.x_max must be >= 0");
    if (!(eps0 >= eps_min && eps_min > 0.0)) throw ValidationError("mf.eps schedule needs eps0 >= eps_min > 0");
    if (!(eps_decay > 0.0 && eps_decay < 1.0)) throw ValidationError("mf.eps_decay must lie in (0,1)");
    if (!(inner_tol > 0.0 && cascade_tol > 0.0 && mass_tol > 0.0 && tail_tol > 0.0 && picard_tol > 0.0)) {
        throw ValidationError("mf tolerances must be positive");
    }
    if (inner_cap == 0 || cascade_cap == 0 || picard_cap == 0) throw ValidationError("mf iteration caps must be positive");
    if (!(explosion_threshold >= 0.0)) throw ValidationError("mf.explosion_threshold must be >= 0");
}

DecayFit check_initial_decay(const std::vector<double>& V0, double dx, double beta, double x_star) {
    if (!(beta > 0.0 && beta <= 1.0)) throw ValidationError("decay exponent beta must lie in (0,1]");
    DecayFit fit;
    fit.beta = beta;
    if (V0.size() < 3) return fit;
    if (!(x_star > 0.0)) {
        const auto peak = std::max_element(V0.begin(), V0.end()) - V0.begin();
        x_star = std::max<double>(1.0, static_cast<double>(peak)) * dx;
    }
    fit.x_star = x_star;
    for (std::size_t j = 1; j < V0.size(); ++j) {
        const double x = static_cast<double>(j) * dx;
        if (x < x_star) fit.C_star = std::max(fit.C_star, V0[j] / std::pow(x, beta));
        else fit.D_star = std::max(fit.D_star, V0[j]);
    }
    // Local exponent from the first cells carrying mass.
    std::vector<std::pair<double, double>> pts;
    for (std::size_t j = 1; j < V0.size() && pts.size() < 10; ++j) {
        if (V0[j] > 0.0) pts.emplace_back(std::log(static_cast<double>(j) * dx), std::log(V0[j]));
    }
    if (pts.size() < 2) {
        fit.local_exponent = std::numeric_limits<double>::infinity();
    } else {
        double mx = 0, my = 0;
        for (auto [x, y] : pts) { mx += x; my += y; }
        mx /= static_cast<double>(pts.size());
        my /= static_cast<double>(pts.size());
        double sxy = 0, sxx = 0;
        for (auto [x, y] : pts) { sxy += (x - mx) * (y - my); sxx += (x - mx) * (x - mx); }
        fit.local_exponent = sxy / sxx;
    }
    fit.holds = V0[0] <= 0.0 && fit.local_exponent >= 0.9 * beta;
    return fit;
}

double sample_from_density(const std::vector<double>& v, double dx, Engine& engine) {
    std::vector<double> cdf(v.size(), 0.0);
    for (std::size_t j = 1; j < v.size(); ++j) cdf[j] = cdf[j - 1] + 0.5 * dx * (v[j - 1] + v[j]);
    const double total = cdf.back();
    if (!(total > 0.0)) throw ValidationError("cannot sample from an empty density");
    std::uniform_real_distribution<double> unif(0.0, total);
    const double u = unif(engine);
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    std::size_t j = static_cast<std::size_t>(std::max<std::ptrdiff_t>(1, it - cdf.begin()));
    j = std::min(j, v.size() - 1);
    // Density is linear on the cell: solve a/2 s^2 + b s = rest for s in [0, dx].
    const double rest = u - cdf[j - 1];
    const double b = v[j - 1];
    const double a = (v[j] - v[j - 1]) / dx;
    double s;
    if (std::abs(a) < 1e-14 * std::max(1.0, b)) s = b > 0.0 ? rest / b : 0.5 * dx;
    else s = (-b + std::sqrt(std::max(0.0, b * b + 2.0 * a * rest))) / a;
    return static_cast<double>(j - 1) * dx + std::clamp(s, 0.0, dx);
}

}  // namespace contagion
