#pragma once

#include <vector>

namespace contagion {

// Right-continuous step function on [0, inf): values[k] applies on
// [breaks[k-1], breaks[k]) with breaks[-1] = 0 and the last value extending forever.
class PiecewiseConstant {
public:
    PiecewiseConstant() = default;
    explicit PiecewiseConstant(double constant);
    PiecewiseConstant(std::vector<double> breaks, std::vector<double> values);

    double operator()(double t) const;
    double integral(double a, double b) const;
    double min_value() const;
    double max_value() const;
    bool is_constant() const { return breaks_.empty(); }

    const std::vector<double>& breaks() const { return breaks_; }
    const std::vector<double>& values() const { return values_; }

    // True when every break lies on the grid k*dt within a relative slack.
    bool aligned_to(double dt) const;

private:
    std::vector<double> breaks_;
    std::vector<double> values_{0.0};
};

}  // namespace contagion
