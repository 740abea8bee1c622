#include "contagion/feedback.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "contagion/errors.hpp"

namespace contagion {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

FeedbackMap FeedbackMap::log1p_scaled(double c) {
    if (!(c >= 0.0) || !std::isfinite(c)) throw ValidationError("log1p_scaled constant must be finite and >= 0");
    return FeedbackMap(Kind::Log1pScaled, c, 0.0);
}

FeedbackMap FeedbackMap::linear(double alpha) {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ValidationError("linear feedback slope must be finite and >= 0");
    return FeedbackMap(Kind::Linear, alpha, 0.0);
}

FeedbackMap FeedbackMap::log_affine(double offset, double slope) {
    if (!std::isfinite(offset) || !(slope >= 0.0) || !std::isfinite(slope)) {
        throw ValidationError("log_affine feedback needs a finite offset and a slope >= 0");
    }
    return FeedbackMap(Kind::LogAffine, offset, slope);
}

double FeedbackMap::operator()(double z) const {
    switch (kind_) {
        case Kind::Log1pScaled: return std::log1p(a_ * z);
        case Kind::Linear: return a_ * z;
        case Kind::LogAffine: {
            double arg = a_ + b_ * z;
            return arg > 0.0 ? std::log(arg) : -kInf;
        }
    }
    return 0.0;
}

double FeedbackMap::increment(double prior, double extra) const {
    if (extra == 0.0) return 0.0;
    switch (kind_) {
        case Kind::Log1pScaled:
            // log((1 + c(p + e)) / (1 + c p)) without cancellation.
            return std::log1p(a_ * extra / (1.0 + a_ * prior));
        case Kind::Linear: return a_ * extra;
        case Kind::LogAffine: {
            double before = a_ + b_ * prior;
            double after = before + b_ * extra;
            if (after <= 0.0) return 0.0;
            if (before <= 0.0) return kInf;
            return std::log1p(b_ * extra / before);
        }
    }
    return 0.0;
}

double FeedbackMap::lipschitz() const {
    switch (kind_) {
        case Kind::Log1pScaled:
        case Kind::Linear: return a_;
        case Kind::LogAffine: return a_ > 0.0 ? b_ / a_ : kInf;
    }
    return kInf;
}

std::string FeedbackMap::name() const {
    std::ostringstream os;
    os.precision(17);
    switch (kind_) {
        case Kind::Log1pScaled: os << "log1p_scaled(" << a_ << ")"; break;
        case Kind::Linear: os << "linear(" << a_ << ")"; break;
        case Kind::LogAffine: os << "log_affine(" << a_ << "," << b_ << ")"; break;
    }
    return os.str();
}

DecayFn DecayFn::linear_decay(double horizon) {
    if (!(horizon > 0.0)) throw ValidationError("linear_decay horizon must be positive");
    return DecayFn(Kind::LinearDecay, horizon);
}

DecayFn DecayFn::constant(double c) {
    if (!(c >= 0.0) || !std::isfinite(c)) throw ValidationError("constant decay must be finite and >= 0");
    return DecayFn(Kind::Constant, c);
}

double DecayFn::operator()(double s) const {
    if (kind_ == Kind::Constant) return p_;
    return std::max(0.0, 1.0 - s / p_);
}

std::string DecayFn::name() const {
    std::ostringstream os;
    os.precision(17);
    os << (kind_ == Kind::Constant ? "constant(" : "linear_decay(") << p_ << ")";
    return os.str();
}

double FeedbackSpec::lipschitz_bound() const {
    double lip = 0.0;
    for (const auto& m : maps) lip = std::max(lip, m.lipschitz());
    return lip;
}

void FeedbackSpec::validate(std::size_t n) const {
    if (maps.size() != 1 && maps.size() != n) {
        throw ValidationError("feedback needs one map or one per bank (" + std::to_string(n) + ")");
    }
}

}  // namespace contagion
