#include "contagion/timefn.hpp"

#include <algorithm>
#include <cmath>

#include "contagion/errors.hpp"

namespace contagion {

PiecewiseConstant::PiecewiseConstant(double constant) : values_{constant} {}

PiecewiseConstant::PiecewiseConstant(std::vector<double> breaks, std::vector<double> values)
    : breaks_(std::move(breaks)), values_(std::move(values)) {
    if (values_.size() != breaks_.size() + 1) {
        throw ValidationError("piecewise-constant function needs one more value than breaks");
    }
    for (std::size_t k = 0; k < breaks_.size(); ++k) {
        if (!(breaks_[k] > 0.0) || (k > 0 && !(breaks_[k] > breaks_[k - 1]))) {
            throw ValidationError("piecewise-constant breaks must be positive and increasing");
        }
    }
    for (double v : values_) {
        if (!std::isfinite(v)) throw ValidationError("piecewise-constant values must be finite");
    }
}

double PiecewiseConstant::operator()(double t) const {
    auto it = std::upper_bound(breaks_.begin(), breaks_.end(), t);
    return values_[static_cast<std::size_t>(it - breaks_.begin())];
}

double PiecewiseConstant::integral(double a, double b) const {
    if (b < a) return -integral(b, a);
    double total = 0.0;
    double left = a;
    for (std::size_t k = 0; k <= breaks_.size(); ++k) {
        double right = k < breaks_.size() ? breaks_[k] : b;
        if (right <= left) continue;
        double hi = std::min(right, b);
        total += values_[k] * (hi - left);
        left = hi;
        if (left >= b) break;
    }
    return total;
}

double PiecewiseConstant::min_value() const { return *std::min_element(values_.begin(), values_.end()); }

double PiecewiseConstant::max_value() const { return *std::max_element(values_.begin(), values_.end()); }

bool PiecewiseConstant::aligned_to(double dt) const {
    for (double b : breaks_) {
        double k = std::round(b / dt);
        if (std::abs(k * dt - b) > 1e-9 * std::max(1.0, b)) return false;
    }
    return true;
}

}  // namespace contagion
