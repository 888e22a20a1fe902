#pragma once

#include <limits>
#include <string>

namespace pmlab {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// 1/q with 1/inf = 0.
inline double reciprocal(double q) { return q == kInfinity ? 0.0 : 1.0 / q; }

// Mixed-norm exponents (q1 in space, q2 in time), each in [1, inf].
class ExponentPair {
public:
    ExponentPair(double q1, double q2);

    // (a, b) = (1/q1, 1/q2); zero maps to infinity.
    static ExponentPair from_reciprocals(double inv_q1, double inv_q2);

    double q1() const { return q1_; }
    double q2() const { return q2_; }
    double inv_q1() const { return reciprocal(q1_); }
    double inv_q2() const { return reciprocal(q2_); }

    friend bool operator==(const ExponentPair&, const ExponentPair&) = default;

private:
    double q1_;
    double q2_;
};

std::string format_exponent(double q);
double parse_exponent(const std::string& text);

} // namespace pmlab
