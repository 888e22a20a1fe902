#include "pmlab/reference.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pmlab {

double heat_kernel(const Point& x, double t, const Point& center, int d, double mass)
{
    if (!(t > 0.0)) throw std::invalid_argument("heat kernel needs t > 0");
    double r2 = 0.0;
    for (int a = 0; a < d; ++a) {
        const auto i = static_cast<std::size_t>(a);
        r2 += (x[i] - center[i]) * (x[i] - center[i]);
    }
    return mass * std::pow(4.0 * std::numbers::pi * t, -0.5 * d) * std::exp(-r2 / (4.0 * t));
}

double BarenblattProfile::alpha() const { return d / (d * (m - 1.0) + 2.0); }
double BarenblattProfile::beta() const { return alpha() / d; }
double BarenblattProfile::k() const { return alpha() * (m - 1.0) / (2.0 * m * d); }

double BarenblattProfile::C() const
{
    if (!(m > 1.0)) throw std::invalid_argument("Barenblatt profile here needs m > 1");
    // mass = |S^{d-1}| C^{p + d/2} k^{-d/2} B(d/2, p + 1) / 2 with p = 1/(m-1).
    const double p = 1.0 / (m - 1.0);
    const double half_d = 0.5 * d;
    const double sphere = 2.0 * std::pow(std::numbers::pi, half_d) / std::tgamma(half_d);
    const double unit = sphere * std::pow(k(), -half_d) * std::beta(half_d, p + 1.0) * 0.5;
    return std::pow(mass / unit, 1.0 / (p + half_d));
}

double BarenblattProfile::support_radius(double t) const { return std::sqrt(C() / k()) * std::pow(t, beta()); }

double BarenblattProfile::operator()(const Point& x, double t) const
{
    if (!(t > 0.0)) throw std::invalid_argument("Barenblatt profile needs t > 0");
    double r2 = 0.0;
    for (int a = 0; a < d; ++a) {
        const auto i = static_cast<std::size_t>(a);
        r2 += (x[i] - center[i]) * (x[i] - center[i]);
    }
    const double inner = C() - k() * r2 * std::pow(t, -2.0 * beta());
    if (inner <= 0.0) return 0.0;
    return std::pow(t, -alpha()) * std::pow(inner, 1.0 / (m - 1.0));
}

double l1_distance(const CellField& a, const CellField& b)
{
    if (!a.grid().same_shape(b.grid())) throw std::invalid_argument("fields live on different grids");
    CompensatedSum s;
    for (std::size_t c = 0; c < a.size(); ++c) s.add(std::abs(a[c] - b[c]));
    return s.value() * a.grid().cell_volume();
}

} // namespace pmlab
