#include "contagion/network.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "contagion/errors.hpp"
#include "contagion/rng.hpp"

namespace contagion {

namespace {

void require_nonnegative(double x, const std::string& what) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw ValidationError(what + " must be finite and >= 0");
}

}  // namespace

std::size_t BlockSpec::bank_count() const {
    std::size_t n = core_count();
    for (const auto& g : groups) n += g.size;
    return n;
}

void BlockSpec::validate() const {
    if (core.rows() != core.cols()) throw ValidationError("core matrix must be square");
    const auto mc = core_count();
    for (std::size_t i = 0; i < mc; ++i) {
        if (core(i, i) != 0.0) throw ValidationError("core matrix diagonal must be zero");
        for (std::size_t j = 0; j < mc; ++j) require_nonnegative(core(i, j), "core rate");
    }
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const auto& grp = groups[g];
        if (grp.core_to_group.size() != mc || grp.group_to_core.size() != mc) {
            throw ValidationError("periphery group " + std::to_string(g) + " needs vectors of length " +
                                  std::to_string(mc));
        }
        for (double r : grp.core_to_group) require_nonnegative(r, "core_to_group rate");
        for (double r : grp.group_to_core) require_nonnegative(r, "group_to_core rate");
    }
    require_nonnegative(societal_rate, "societal rate");
}

NoiseSpec NoiseSpec::dirac_zero() { return NoiseSpec{}; }

NoiseSpec NoiseSpec::uniform(double half_width, std::uint64_t seed) {
    NoiseSpec s;
    s.kind = Kind::Uniform;
    s.half_width = half_width;
    s.seed = seed;
    s.validate();
    return s;
}

NoiseSpec NoiseSpec::discrete(std::vector<double> points, std::vector<double> weights, std::uint64_t seed) {
    NoiseSpec s;
    s.kind = Kind::Discrete;
    s.points = std::move(points);
    s.weights = std::move(weights);
    s.seed = seed;
    s.validate();
    return s;
}

double NoiseSpec::mean() const {
    if (kind != Kind::Discrete) return 0.0;
    double m = 0.0;
    for (std::size_t k = 0; k < points.size(); ++k) m += points[k] * weights[k];
    return m;
}

void NoiseSpec::validate() const {
    switch (kind) {
        case Kind::DiracZero: return;
        case Kind::Uniform:
            if (!(half_width >= 0.0 && half_width <= 1.0)) throw ValidationError("uniform noise half-width must lie in [0,1]");
            return;
        case Kind::Discrete: {
            if (points.empty() || points.size() != weights.size()) {
                throw ValidationError("discrete noise needs matching nonempty points and weights");
            }
            double total = 0.0;
            for (std::size_t k = 0; k < points.size(); ++k) {
                if (!(points[k] >= -1.0 && points[k] <= 1.0)) throw ValidationError("discrete noise points must lie in [-1,1]");
                require_nonnegative(weights[k], "discrete noise weight");
                total += weights[k];
            }
            if (std::abs(total - 1.0) > 1e-12) throw ValidationError("discrete noise weights must sum to 1");
            // A point mass at +1 is not mean zero but is a documented scaling check; only warn.
            if (std::abs(mean()) > 1e-12) warn("discrete noise distribution is not centred");
            return;
        }
    }
}

void LiabilityNetwork::validate() const {
    if (rates.rows() != rates.cols()) throw ValidationError("rate matrix must be square");
    if (societal.size() != size()) throw ValidationError("societal vector length must equal bank count");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ValidationError("horizon T must be positive");
    for (std::size_t i = 0; i < size(); ++i) {
        if (rates(i, i) != 0.0) throw ValidationError("rate matrix diagonal must be zero (bank " + std::to_string(i) + ")");
        require_nonnegative(societal[i], "societal rate");
        for (std::size_t j = 0; j < size(); ++j) require_nonnegative(rates(i, j), "interbank rate");
    }
}

std::size_t TypeAtlas::base_size() const {
    return std::accumulate(group_sizes.begin(), group_sizes.end(), std::size_t{0});
}

LiabilityNetwork build_block_matrix(const BlockSpec& spec, double horizon) {
    spec.validate();
    const std::size_t mc = spec.core_count();
    const std::size_t n = spec.bank_count();
    LiabilityNetwork net;
    net.horizon = horizon;
    net.rates = Eigen::MatrixXd::Zero(n, n);
    net.rates.topLeftCorner(mc, mc) = spec.core;
    std::size_t offset = mc;
    for (const auto& grp : spec.groups) {
        for (std::size_t p = 0; p < grp.size; ++p) {
            for (std::size_t c = 0; c < mc; ++c) {
                net.rates(c, offset + p) = grp.core_to_group[c];
                net.rates(offset + p, c) = grp.group_to_core[c];
            }
        }
        offset += grp.size;
    }
    net.societal.assign(n, spec.societal_rate);
    net.validate();
    return net;
}

std::vector<std::size_t> scaled_origin(std::size_t n0, std::size_t m, std::size_t core_count) {
    if (core_count > n0) throw ValidationError("core count exceeds bank count");
    std::vector<std::size_t> origin;
    origin.reserve(n0 * m);
    for (std::size_t c = 0; c < m; ++c)
        for (std::size_t a = 0; a < core_count; ++a) origin.push_back(a);
    for (std::size_t c = 0; c < m; ++c)
        for (std::size_t a = core_count; a < n0; ++a) origin.push_back(a);
    return origin;
}

LiabilityNetwork scale_network(const LiabilityNetwork& base, std::size_t m) {
    return scale_network(base, m, base.size());
}

LiabilityNetwork scale_network(const LiabilityNetwork& base, std::size_t m, std::size_t core_count) {
    base.validate();
    if (m == 0) throw ValidationError("scale factor m must be >= 1");
    const auto origin = scaled_origin(base.size(), m, core_count);
    const std::size_t n = origin.size();
    LiabilityNetwork out;
    out.horizon = base.horizon;
    out.rates.resize(n, n);
    const double inv_m = 1.0 / static_cast<double>(m);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) out.rates(i, j) = base.rates(origin[i], origin[j]) * inv_m;
    out.societal.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.societal[i] = base.societal[origin[i]];
    return out;
}

std::vector<double> sample_noise(const NoiseSpec& noise, std::size_t count, std::uint64_t stream) {
    noise.validate();
    std::vector<double> out(count, 0.0);
    if (noise.kind == NoiseSpec::Kind::DiracZero) return out;
    auto eng = make_engine(noise.seed, stream);
    if (noise.kind == NoiseSpec::Kind::Uniform) {
        std::uniform_real_distribution<double> dist(-noise.half_width, noise.half_width);
        for (auto& x : out) x = dist(eng);
    } else {
        std::discrete_distribution<std::size_t> dist(noise.weights.begin(), noise.weights.end());
        for (auto& x : out) x = noise.points[dist(eng)];
    }
    return out;
}

NoisyNetwork apply_noise(const LiabilityNetwork& net, const NoiseSpec& noise) {
    net.validate();
    const std::size_t n = net.size();
    NoisyNetwork out;
    out.epsilons = sample_noise(noise, n, kNetworkNoiseStream);
    out.deltas = sample_noise(noise, n, kNetworkNoiseStream + 1);
    out.network = net;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            out.network.rates(i, j) = (1.0 + out.epsilons[i]) * (1.0 + out.deltas[j]) * net.rates(i, j);
    return out;
}

LiabilityNetwork apply_type_noise(const LiabilityNetwork& net, const std::vector<double>& thetas) {
    if (thetas.size() != net.size()) throw ValidationError("theta vector length must equal bank count");
    LiabilityNetwork out = net;
    for (std::size_t i = 0; i < net.size(); ++i)
        for (std::size_t j = 0; j < net.size(); ++j)
            out.rates(i, j) = (1.0 + thetas[i]) * (1.0 + thetas[j]) * net.rates(i, j);
    return out;
}

double net_liability(const LiabilityNetwork& net, std::size_t i) {
    if (i >= net.size()) throw ValidationError("bank index " + std::to_string(i) + " out of range");
    const double value = net.horizon * (net.societal[i] + net.rates.row(i).sum() - net.rates.col(i).sum());
    if (value <= 0.0) {
        std::ostringstream os;
        os << "bank " << i << " has nonpositive net liabilities (" << value << ")";
        warn(os.str());
    }
    return value;
}

std::vector<double> net_liabilities(const LiabilityNetwork& net) {
    std::vector<double> out(net.size());
    for (std::size_t i = 0; i < net.size(); ++i)
        out[i] = net.horizon * (net.societal[i] + net.rates.row(i).sum() - net.rates.col(i).sum());
    return out;
}

RankFactorization rank_factorize(const LiabilityNetwork& net, double rel_tol) {
    if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw ValidationError("rel_tol must lie in (0,1)");
    const std::size_t n = net.size();
    RankFactorization fac;
    fac.tol = rel_tol;
    if (n == 0) {
        fac.U.resize(0, 0);
        fac.V.resize(0, 0);
        return fac;
    }
    const Eigen::MatrixXd A = static_cast<double>(n) * net.rates;
    Eigen::BDCSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd s = svd.singularValues();
    fac.singular_values.assign(s.data(), s.data() + s.size());
    const double cutoff = rel_tol * (s.size() > 0 ? s(0) : 0.0);
    std::size_t k = 0;
    if (s.size() > 0 && s(0) > 0.0) {
        while (k < static_cast<std::size_t>(s.size()) && s(k) >= cutoff) ++k;
    }
    fac.k = k;
    fac.U = svd.matrixU().leftCols(k);
    fac.V = s.head(k).asDiagonal() * svd.matrixV().leftCols(k).transpose();
    for (std::size_t l = 0; l < k; ++l) {
        const double scale = fac.U.col(l).cwiseAbs().maxCoeff();
        for (std::size_t i = 0; i < n; ++i) {
            const double x = fac.U(i, l);
            if (std::abs(x) > 1e-12 * scale) {
                if (x < 0.0) {
                    fac.U.col(l) *= -1.0;
                    fac.V.row(l) *= -1.0;
                }
                break;
            }
        }
    }
    return fac;
}

double factorization_residual(const LiabilityNetwork& net, const RankFactorization& fac) {
    const Eigen::MatrixXd A = static_cast<double>(net.size()) * net.rates;
    if (fac.k == 0) return A.size() ? A.cwiseAbs().maxCoeff() : 0.0;
    return (A - fac.U * fac.V).cwiseAbs().maxCoeff();
}

TypeAtlas core_periphery_atlas(const BlockSpec& spec, double rel_tol) {
    const LiabilityNetwork base = build_block_matrix(spec);
    const RankFactorization fac = rank_factorize(base, rel_tol);
    const std::size_t mc = spec.core_count();
    const std::size_t n0 = base.size();
    TypeAtlas atlas;
    atlas.labels.assign(n0, 0);
    atlas.thetas.assign(n0, 0.0);
    auto add_type = [&](std::size_t representative, std::size_t size) {
        Eigen::VectorXd u = fac.k ? Eigen::VectorXd(fac.U.row(representative).transpose()) : Eigen::VectorXd();
        Eigen::VectorXd v = fac.k ? Eigen::VectorXd(fac.V.col(representative)) : Eigen::VectorXd();
        atlas.principal_u.push_back(u);
        atlas.principal_v.push_back(v);
        atlas.group_sizes.push_back(size);
        atlas.weights.push_back(static_cast<double>(size) / static_cast<double>(n0));
    };
    for (std::size_t c = 0; c < mc; ++c) {
        atlas.labels[c] = atlas.num_types();
        add_type(c, 1);
    }
    std::size_t offset = mc;
    for (const auto& grp : spec.groups) {
        if (grp.size == 0) continue;
        const std::size_t type = atlas.num_types();
        for (std::size_t p = 0; p < grp.size; ++p) atlas.labels[offset + p] = type;
        add_type(offset, grp.size);
        offset += grp.size;
    }
    return atlas;
}

TypeAtlas expand_atlas(const TypeAtlas& base, std::size_t core_count, std::size_t m,
                       const std::vector<double>& thetas) {
    const std::size_t n0 = base.labels.size();
    const auto origin = scaled_origin(n0, m, core_count);
    if (thetas.size() != origin.size()) throw ValidationError("theta vector length must equal m * n0");
    TypeAtlas out = base;
    out.labels.resize(origin.size());
    for (std::size_t i = 0; i < origin.size(); ++i) out.labels[i] = base.labels[origin[i]];
    out.thetas = thetas;
    for (auto& s : out.group_sizes) s *= m;
    return out;
}

RankFactorization atlas_factorization(const TypeAtlas& atlas) {
    const std::size_t n = atlas.labels.size();
    const std::size_t k = atlas.num_types() ? static_cast<std::size_t>(atlas.principal_u[0].size()) : 0;
    RankFactorization fac;
    fac.k = k;
    fac.U.resize(n, k);
    fac.V.resize(k, n);
    for (std::size_t i = 0; i < n; ++i) {
        const double scale = 1.0 + atlas.thetas[i];
        fac.U.row(i) = scale * atlas.principal_u[atlas.labels[i]].transpose();
        fac.V.col(i) = scale * atlas.principal_v[atlas.labels[i]];
    }
    return fac;
}

namespace {

// Factorization round-off leaves structural zeros at about 1e-15 of either sign.
void clean_roundoff(Eigen::MatrixXd& m) {
    const double scale = m.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            if (std::abs(m(i, j)) <= 1e-10 * scale) m(i, j) = 0.0;
}

}  // namespace

Eigen::MatrixXd effective_exposures(const TypeAtlas& atlas, std::size_t m0) {
    const std::size_t L = atlas.num_types();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(L, L);
    for (std::size_t i = 0; i < L; ++i)
        for (std::size_t j = 0; j < L; ++j) {
            if (atlas.principal_u[i].size() == 0) continue;
            out(i, j) = static_cast<double>(m0) * atlas.weights[i] * atlas.weights[j] *
                        atlas.principal_u[i].dot(atlas.principal_v[j]);
        }
    clean_roundoff(out);
    return out;
}

Eigen::MatrixXd mean_field_exposures(const TypeAtlas& atlas) {
    const std::size_t L = atlas.num_types();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(L, L);
    for (std::size_t i = 0; i < L; ++i)
        for (std::size_t j = 0; j < L; ++j) {
            if (atlas.principal_u[i].size() == 0) continue;
            out(i, j) = atlas.weights[i] * atlas.principal_u[i].dot(atlas.principal_v[j]);
        }
    clean_roundoff(out);
    return out;
}

}  // namespace contagion
