#include "pmlab/mixed_norm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace pmlab {

ExponentPair::ExponentPair(double q1, double q2) : q1_(q1), q2_(q2)
{
    if (!(q1 >= 1.0) || !(q2 >= 1.0)) throw std::invalid_argument("mixed-norm exponents must satisfy q >= 1");
}

ExponentPair ExponentPair::from_reciprocals(double inv_q1, double inv_q2)
{
    if (inv_q1 < 0.0 || inv_q2 < 0.0) throw std::invalid_argument("reciprocal exponents must be nonnegative");
    return ExponentPair(inv_q1 == 0.0 ? kInfinity : 1.0 / inv_q1, inv_q2 == 0.0 ? kInfinity : 1.0 / inv_q2);
}

std::string format_exponent(double q)
{
    if (q == kInfinity) return "inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", q);
    return buf;
}

double parse_exponent(const std::string& text)
{
    if (text == "inf" || text == "infinity" || text == "Inf") return kInfinity;
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument("bad exponent '" + text + "'");
    return v;
}

double time_span(const SampledField& f)
{
    CompensatedSum s;
    for (const auto& slice : f) s.add(slice.weight);
    return s.value();
}

namespace {

double slice_norm(const CellField& f, double q)
{
    if (q == kInfinity) return f.max_abs();
    CompensatedSum s;
    for (double v : f.values()) s.add(std::pow(std::abs(v), q));
    return std::pow(s.value() * f.grid().cell_volume(), 1.0 / q);
}

} // namespace

double mixed_norm(const SampledField& f, const ExponentPair& e)
{
    if (f.empty()) return 0.0;
    if (e.q2() == kInfinity) {
        double m = 0.0;
        for (const auto& slice : f) m = std::max(m, slice_norm(slice.field, e.q1()));
        return m;
    }
    // Factor the largest slice norm out before raising to q2 to avoid overflow.
    std::vector<double> norms;
    norms.reserve(f.size());
    double peak = 0.0;
    for (const auto& slice : f) {
        norms.push_back(slice_norm(slice.field, e.q1()));
        if (slice.weight > 0.0) peak = std::max(peak, norms.back());
    }
    if (peak == 0.0) return 0.0;
    CompensatedSum s;
    for (std::size_t k = 0; k < f.size(); ++k) {
        if (f[k].weight > 0.0) s.add(f[k].weight * std::pow(norms[k] / peak, e.q2()));
    }
    return peak * std::pow(s.value(), 1.0 / e.q2());
}

double sup_l1(const SampledField& u)
{
    double m = 0.0;
    for (const auto& slice : u) m = std::max(m, integrate(slice.field));
    return m;
}

double gradient_power(const SampledField& u, double power, double alpha)
{
    CompensatedSum total;
    for (const auto& slice : u) {
        if (slice.weight <= 0.0) continue;
        CellField w(slice.field.grid());
        for (std::size_t c = 0; c < w.size(); ++c) w[c] = std::pow(std::max(slice.field[c], 0.0), power);
        const CellField mag = cell_magnitude(gradient_faces(w));
        CompensatedSum s;
        for (double g : mag.values()) s.add(std::pow(g, alpha));
        total.add(slice.weight * s.value() * w.grid().cell_volume());
    }
    return total.value();
}

double grad_power_alpha(const SampledField& u, double m, double q, double alpha)
{
    return gradient_power(u, 0.5 * (m + q - 1.0), alpha);
}

void GradientFunctionalParams::validate() const
{
    if (!(m > 0.0)) throw std::invalid_argument("diffusion exponent m must be positive");
    if (!(q >= 1.0)) throw std::invalid_argument("moment exponent q must be >= 1");
    if (!(alpha > 0.0 && alpha < 2.0)) throw std::invalid_argument("alpha must lie in (0, 2)");
    if (!(xi > 1.0)) throw std::invalid_argument("xi must exceed 1");
    if (!(A > 0.0)) throw std::invalid_argument("A must be positive");
    if (!(m + q - 1.0 > 0.0)) throw std::invalid_argument("m + q - 1 must be positive");
}

double weighted_gradient(const SampledField& u, const GradientFunctionalParams& p)
{
    p.validate();
    const double power = 0.5 * (p.m + p.q - 1.0);
    const double base = std::pow(p.A, p.q - 1.0);
    CompensatedSum total;
    for (const auto& slice : u) {
        if (slice.weight <= 0.0) continue;
        const Grid& g = slice.field.grid();
        CellField w(g);
        for (std::size_t c = 0; c < w.size(); ++c) w[c] = std::pow(std::max(slice.field[c], 0.0), power);
        const FaceField grad = gradient_faces(w);
        const bool mirror = g.boundary() == Boundary::NoFlux;
        const int n = g.cells();
        CompensatedSum s;
        for (int a = 0; a < g.dim(); ++a) {
            auto comp = grad.component(a);
            for_each_line(g, a, [&](std::size_t cb, std::size_t fb, std::size_t st) {
                for (int k = 0; k <= n; ++k) {
                    const std::size_t kk = static_cast<std::size_t>(k);
                    const double gf = comp[fb + kk * st];
                    if (gf == 0.0) continue;
                    const double left = k > 0 ? slice.field[cb + (kk - 1) * st] : (mirror ? slice.field[cb] : 0.0);
                    const double right = k < n ? slice.field[cb + kk * st]
                                               : (mirror ? slice.field[cb + (kk - 1) * st] : 0.0);
                    const double ubar = std::max(0.5 * (left + right), 0.0);
                    const double denom = std::pow(base + std::pow(ubar, p.q - 1.0), p.xi);
                    s.add(gf * gf / denom);
                }
            });
        }
        total.add(slice.weight * s.value() * g.cell_volume());
    }
    return total.value();
}

double space_time_power(const SampledField& f, double p)
{
    CompensatedSum total;
    for (const auto& slice : f) {
        if (slice.weight <= 0.0) continue;
        CompensatedSum s;
        for (double v : slice.field.values()) s.add(std::pow(std::abs(v), p));
        total.add(slice.weight * s.value() * slice.field.grid().cell_volume());
    }
    return total.value();
}

} // namespace pmlab
