#pragma once

#include <string>
#include <vector>

namespace contagion {

// Increasing loss-to-distance map F.
class FeedbackMap {
public:
    enum class Kind { Log1pScaled, Linear, LogAffine };

    static FeedbackMap log1p_scaled(double c);  // z -> log(1 + c z)
    static FeedbackMap linear(double alpha);    // z -> alpha z
    // z -> log(offset + slope z), -inf where the argument is <= 0. Reference-free
    // form for banks whose net liabilities are not positive.
    static FeedbackMap log_affine(double offset, double slope);

    double operator()(double z) const;
    double lipschitz() const;
    // F(prior + extra) - F(prior), finite even where F itself is -inf at prior.
    double increment(double prior, double extra) const;

    Kind kind() const { return kind_; }
    double a() const { return a_; }
    double b() const { return b_; }
    std::string name() const;

private:
    FeedbackMap(Kind kind, double a, double b) : kind_(kind), a_(a), b_(b) {}
    Kind kind_ = Kind::Linear;
    double a_ = 0.0;
    double b_ = 0.0;
};

// Nonnegative, nonincreasing weight g applied to losses at the time they occur.
class DecayFn {
public:
    enum class Kind { LinearDecay, Constant };

    static DecayFn linear_decay(double horizon);  // s -> 1 - s/T, floored at 0
    static DecayFn constant(double c);

    double operator()(double s) const;
    Kind kind() const { return kind_; }
    double parameter() const { return p_; }
    std::string name() const;

private:
    DecayFn(Kind kind, double p) : kind_(kind), p_(p) {}
    Kind kind_ = Kind::Constant;
    double p_ = 1.0;
};

// One map per bank (or a single map shared by all) plus the decay g.
struct FeedbackSpec {
    std::vector<FeedbackMap> maps;
    DecayFn decay = DecayFn::constant(1.0);

    const FeedbackMap& map_for(std::size_t bank) const { return maps.size() == 1 ? maps[0] : maps[bank]; }
    double lipschitz_bound() const;
    void validate(std::size_t n) const;
};

}  // namespace contagion
