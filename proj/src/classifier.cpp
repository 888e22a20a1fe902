#include "pmlab/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pmlab {

bool DiffusionParams::plain_valid() const { return d >= 2 && m > 1.0 - 1.0 / d; }
bool DiffusionParams::sigma_valid() const { return d >= 2 && m > 0.0 && sigma_level() > 0.0; }

std::string to_string(LineVerdict v)
{
    switch (v) {
    case LineVerdict::OnLine: return "OnLine";
    case LineVerdict::Subclass: return "Subclass";
    case LineVerdict::Supercritical: return "Supercritical";
    case LineVerdict::NotApplicable: return "NotApplicable";
    }
    return "?";
}

std::string to_string(Admissibility a)
{
    switch (a) {
    case Admissibility::PmeAdmissible: return "PME_admissible";
    case Admissibility::FdeAdmissible: return "FDE_admissible";
    case Admissibility::DivFreePmeAdmissible: return "DivFree_PME_admissible";
    case Admissibility::DivFreeFdeAdmissible: return "DivFree_FDE_admissible";
    case Admissibility::CompactnessAdmissible: return "Compactness_admissible";
    }
    return "?";
}

namespace {

double raw_sum(const DiffusionParams& p, double a, double b)
{
    return p.d * a + p.sigma_level() * b;
}

LineVerdict line_verdict(double sum, double level)
{
    const double diff = sum - level;
    if (std::abs(diff) <= kLineTolerance * (1.0 + std::abs(sum))) return LineVerdict::OnLine;
    return diff < 0.0 ? LineVerdict::Subclass : LineVerdict::Supercritical;
}

bool same(double x, double y) { return std::abs(x - y) <= kLineTolerance * (1.0 + std::abs(y)); }

// Tracks whether any compared quantity sits within the boundary tolerance.
struct EdgeWatch {
    bool near = false;
    void check(double x, double edge)
    {
        if (std::abs(x - edge) <= kBoundaryTolerance * (1.0 + std::abs(edge))) near = true;
    }
};

} // namespace

double scaling_sum(const DiffusionParams& p, const ExponentPair& e, ClassFamily family)
{
    if (family == ClassFamily::Plain && !p.plain_valid())
        throw std::invalid_argument("plain scaling class requires m > 1 - 1/d");
    if (family == ClassFamily::Sigma && !p.sigma_valid())
        throw std::invalid_argument("sigma scaling class requires 2 + d(m-1) > 0");
    return raw_sum(p, e.inv_q1(), e.inv_q2());
}

bool compactness_admissible(const DiffusionParams& p, const ExponentPair& e)
{
    const double a = e.inv_q1();
    const double b = e.inv_q2();
    if (p.m >= 1.0 && a == 0.0 && b == 1.0) return true;
    if (!p.sigma_valid()) return false;
    const double level = p.sigma_level();
    if (!(raw_sum(p, a, b) < level)) return false;
    if (p.m < 1.0) return a <= level / p.d && b <= 1.0;
    return a < level / (p.m * p.d) && (p.m - 1.0) / p.m < b && b <= 1.0;
}

AdmissibilityResult theorem_admissible(const DiffusionParams& p, const ExponentPair& e, bool divergence_free)
{
    AdmissibilityResult out;
    EdgeWatch edge;
    const double a = e.inv_q1();
    const double b = e.inv_q2();
    const double m = p.m;
    const double d = p.d;
    const double sum = raw_sum(p, a, b);

    if (p.plain_valid()) {
        const double level = p.plain_level();
        const LineVerdict plain = line_verdict(sum, level);
        edge.check(sum, level);
        if (m >= 1.0 && m <= 2.0) {
            const double a_max = ((2.0 - m) + d * (m - 1.0)) / (m * d);
            edge.check(a, a_max);
            edge.check(b, 0.5);
            const bool interior = plain == LineVerdict::Subclass && a < a_max && b <= 0.5;
            const bool anchor = plain == LineVerdict::OnLine && same(a, 0.5 * (m - 1.0)) && same(b, 0.5);
            if (interior || anchor) out.labels.insert(Admissibility::PmeAdmissible);
        }
        else if (m < 1.0) {
            const double a_max = (1.0 + d * (m - 1.0)) / d;
            const double b_max = (1.0 + d * (m - 1.0)) / (2.0 + d * (m - 1.0));
            edge.check(a, a_max);
            edge.check(b, b_max);
            if (plain == LineVerdict::Subclass && a < a_max && b < b_max) out.labels.insert(Admissibility::FdeAdmissible);
        }
    }

    if (divergence_free && p.sigma_valid()) {
        const double level = p.sigma_level();
        const LineVerdict sigma = line_verdict(sum, level);
        edge.check(sum, level);
        edge.check(b, 1.0);
        const bool endpoint = a == 0.0 && b == 1.0;
        if (m >= 1.0) {
            const double a_max = level / (m * d);
            edge.check(a, a_max);
            if ((sigma == LineVerdict::Subclass && a < a_max && b < 1.0) || endpoint)
                out.labels.insert(Admissibility::DivFreePmeAdmissible);
        }
        else {
            const double a_max = level / d;
            edge.check(a, a_max);
            if ((sigma == LineVerdict::Subclass && a < a_max && b < 1.0) || endpoint)
                out.labels.insert(Admissibility::DivFreeFdeAdmissible);
        }
    }

    if (compactness_admissible(p, e)) out.labels.insert(Admissibility::CompactnessAdmissible);
    out.near_boundary = edge.near;
    return out;
}

ClassVerdict classify(const DiffusionParams& p, const ExponentPair& e, bool divergence_free)
{
    if (divergence_free && !p.sigma_valid()) throw std::invalid_argument("sigma classes require 2 + d(m-1) > 0");
    if (!divergence_free && !p.plain_valid()) throw std::invalid_argument("plain classes require m > 1 - 1/d");
    ClassVerdict v;
    v.scaling_sum = raw_sum(p, e.inv_q1(), e.inv_q2());
    if (p.plain_valid()) v.plain = line_verdict(v.scaling_sum, p.plain_level());
    if (divergence_free) v.sigma = line_verdict(v.scaling_sum, p.sigma_level());
    const auto adm = theorem_admissible(p, e, divergence_free);
    v.theorems = adm.labels;
    v.near_boundary = adm.near_boundary;
    return v;
}

double embed_norm(double norm, const ExponentPair& from_larger, const ExponentPair& to_smaller,
                  double omega_measure, double final_time)
{
    if (to_smaller.q1() > from_larger.q1() || to_smaller.q2() > from_larger.q2())
        throw std::invalid_argument("embedding only lowers exponents on a bounded cylinder");
    return std::pow(omega_measure, to_smaller.inv_q1() - from_larger.inv_q1()) *
           std::pow(final_time, to_smaller.inv_q2() - from_larger.inv_q2()) * norm;
}

ScalarFunction rescale_density(ScalarFunction u, double r, const DiffusionParams& p)
{
    if (!(r > 0.0)) throw std::invalid_argument("scaling factor must be positive");
    const double amp = std::pow(r, p.d);
    const double tscale = std::pow(r, p.sigma_level());
    return [u = std::move(u), r, amp, tscale](const std::array<double, 3>& x, double t) {
        return amp * u({r * x[0], r * x[1], r * x[2]}, tscale * t);
    };
}

VectorFunction rescale_drift(VectorFunction V, double r, const DiffusionParams& p)
{
    if (!(r > 0.0)) throw std::invalid_argument("scaling factor must be positive");
    const double amp = std::pow(r, p.plain_level());
    const double tscale = std::pow(r, p.sigma_level());
    return [V = std::move(V), r, amp, tscale](const std::array<double, 3>& x, double t) {
        auto v = V({r * x[0], r * x[1], r * x[2]}, tscale * t);
        for (auto& c : v) c *= amp;
        return v;
    };
}

std::vector<RegionSample> region_sweep(const DiffusionParams& p, bool divergence_free, int steps, double extent)
{
    if (steps < 1) throw std::invalid_argument("region sweep needs at least one step");
    std::vector<RegionSample> out;
    out.reserve(static_cast<std::size_t>((steps + 1) * (steps + 1)));
    for (int j = 0; j <= steps; ++j) {
        for (int i = 0; i <= steps; ++i) {
            RegionSample s;
            s.inv_q1 = extent * i / steps;
            s.inv_q2 = extent * j / steps;
            s.valid = s.inv_q1 <= 1.0 && s.inv_q2 <= 1.0;
            if (s.valid) {
                s.verdict = classify(p, ExponentPair::from_reciprocals(s.inv_q1, s.inv_q2), divergence_free);
            }
            else {
                s.verdict.scaling_sum = raw_sum(p, s.inv_q1, s.inv_q2);
            }
            out.push_back(std::move(s));
        }
    }
    return out;
}

} // namespace pmlab
