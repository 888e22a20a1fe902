#include "pmlab/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pmlab/classifier.hpp"

namespace pmlab {

std::string to_string(EstimateMode m) { return m == EstimateMode::Literal ? "Literal" : "RatioTrend"; }

namespace {

nlohmann::json number(double x)
{
    if (std::isfinite(x)) return x;
    if (std::isnan(x)) return nullptr;
    return x > 0 ? "inf" : "-inf";
}

double safe_ratio(double lhs, double rhs)
{
    if (lhs == 0.0) return 0.0;
    if (rhs == 0.0) return std::numeric_limits<double>::infinity();
    return lhs / rhs;
}

EstimateReport make(const std::string& id, EstimateMode mode, double lhs, double rhs)
{
    EstimateReport r;
    r.id = id;
    r.mode = mode;
    r.lhs = lhs;
    r.rhs = rhs;
    r.ratio = safe_ratio(lhs, rhs);
    return r;
}

EstimateReport not_applicable(const std::string& id, EstimateMode mode, const std::string& why)
{
    EstimateReport r;
    r.id = id;
    r.mode = mode;
    r.applicable = false;
    r.pass = false;
    r.note = why;
    return r;
}

int dim(const EstimateInput& in) { return in.traj.grid.dim(); }

// Cell magnitudes of the drift at each stored slice time; a single entry
// stands for all slices when the drift does not depend on time.
std::vector<CellField> drift_magnitudes(const EstimateInput& in)
{
    std::vector<CellField> out;
    if (!in.drift.time_dependent()) {
        out.push_back(cell_magnitude(in.drift.sample(in.traj.grid, 0.0)));
        return out;
    }
    for (const auto& s : in.traj.slices) out.push_back(cell_magnitude(in.drift.sample(in.traj.grid, s.time)));
    return out;
}

} // namespace

nlohmann::json to_json(const EstimateReport& r)
{
    nlohmann::json j;
    j["id"] = r.id;
    nlohmann::json params = nlohmann::json::object();
    for (const auto& [k, v] : r.params) params[k] = number(v);
    j["params"] = params;
    j["lhs"] = number(r.lhs);
    j["rhs"] = number(r.rhs);
    j["ratio"] = number(r.ratio);
    j["mode"] = to_string(r.mode);
    j["pass"] = r.pass;
    j["applicable"] = r.applicable;
    if (!r.note.empty()) j["note"] = r.note;
    if (!r.refinement.empty()) {
        nlohmann::json series = nlohmann::json::array();
        for (const auto& p : r.refinement) {
            series.push_back({{"cells", p.cells}, {"lhs", number(p.lhs)}, {"rhs", number(p.rhs)}, {"ratio", number(p.ratio)}});
        }
        j["refinement_series"] = series;
    }
    return j;
}

double data_mass(const EstimateInput& in)
{
    return total_mass(in.measure, in.traj.grid, in.traj.final_time, true);
}

double cylinder_volume(const Trajectory& traj) { return traj.grid.volume() * traj.final_time; }

double drift_energy(const EstimateInput& in)
{
    if (in.drift.preset == DriftPreset::Zero) return 0.0;
    const auto mags = drift_magnitudes(in);
    const double e = 2.0 - in.traj.m;
    CompensatedSum total;
    for (std::size_t k = 0; k < in.traj.slices.size(); ++k) {
        const auto& s = in.traj.slices[k];
        if (s.weight <= 0.0) continue;
        const CellField& v = mags[mags.size() == 1 ? 0 : k];
        CompensatedSum cell;
        for (std::size_t c = 0; c < v.size(); ++c) {
            if (v[c] == 0.0) continue;
            cell.add(std::pow(std::max(s.field[c], 0.0), e) * v[c] * v[c]);
        }
        total.add(s.weight * cell.value() * s.field.grid().cell_volume());
    }
    return total.value();
}

double drift_norm(const EstimateInput& in, const ExponentPair& e)
{
    const auto mags = drift_magnitudes(in);
    SampledField f;
    if (mags.size() == 1) {
        f.push_back(TimeSlice{0.0, in.traj.final_time, mags.front()});
    }
    else {
        for (std::size_t k = 0; k < mags.size(); ++k) f.push_back(TimeSlice{in.traj.slices[k].time, in.traj.slices[k].weight, mags[k]});
    }
    return mixed_norm(f, e);
}

EstimateReport verify_mass(const EstimateInput& in)
{
    double sup = in.traj.initial_mass;
    for (const auto& b : in.traj.budget) sup = std::max(sup, b.mass_after);
    const double nu = data_mass(in);
    EstimateReport r = make("Estimate01", EstimateMode::Literal, sup, nu);
    r.params["budget_residual"] = in.traj.max_budget_residual();
    r.pass = sup <= nu * (1.0 + kMassTolerance);
    return r;
}

EstimateReport verify_weighted_gradient(const EstimateInput& in, const WeightedGradientParams& p)
{
    if (!(p.xi > 1.0)) throw std::invalid_argument("xi must exceed 1");
    if (!(p.q > 1.0)) throw std::invalid_argument("q must exceed 1");
    if (!(p.A > 0.0)) throw std::invalid_argument("A must be positive");
    const double m = in.traj.m;
    const bool divfree = in.drift.divergence_free();
    const std::string id = divfree ? "Estimate02_divfree" : "Estimate02";
    if (!divfree && m > 2.0) throw std::invalid_argument("the general weighted-gradient bound needs m <= 2");

    GradientFunctionalParams gp;
    gp.m = m;
    gp.q = p.q;
    gp.alpha = 1.0;
    gp.xi = p.xi;
    gp.A = p.A;
    const double lhs = weighted_gradient(in.traj.slices, gp);
    const double nu = data_mass(in);
    const double C = (m + p.q - 1.0) * (m + p.q - 1.0) * std::pow(p.A, (p.q - 1.0) * (1.0 - p.xi)) /
                     (m * (p.q - 1.0) * (p.xi - 1.0));
    double rhs = 2.0 * C * nu;
    double energy = 0.0;
    if (!divfree) {
        energy = drift_energy(in);
        rhs = C * (2.0 * nu + (p.q - 1.0) * (p.xi - 1.0) / m * energy);
    }
    EstimateReport r = make(id, EstimateMode::Literal, lhs, rhs);
    r.params = {{"m", m}, {"d", dim(in)}, {"q", p.q}, {"xi", p.xi}, {"A", p.A}, {"nu", nu}, {"constant", C}};
    if (!divfree) r.params["drift_energy"] = energy;
    r.pass = lhs <= rhs * (1.0 + kLiteralSlack);
    return r;
}

double alpha_limit(double m, int d, double q) { return 2.0 * (2.0 + m * d) / (2.0 + d * (m + q - 1.0)); }

EstimateReport verify_alpha_gradient(const EstimateInput& in, const AlphaGradientParams& p)
{
    const double m = in.traj.m;
    const int d = dim(in);
    if (!(p.q >= 1.0)) throw std::invalid_argument("q must be >= 1");
    const bool q_one = p.q == 1.0;
    const std::string id = q_one ? "Estimate04" : "Estimate03";
    if (!(p.alpha > 0.0 && p.alpha < 2.0)) throw std::invalid_argument("alpha must lie in (0, 2)");
    if (!q_one && !(p.alpha < alpha_limit(m, d, p.q)))
        throw std::invalid_argument("alpha must stay below 2(2+md)/(2+d(m+q-1))");
    if (m > 2.0) return not_applicable(id, EstimateMode::RatioTrend, "requires m <= 2");

    const double vol = cylinder_volume(in.traj);
    const double lhs = std::pow(grad_power_alpha(in.traj.slices, m, p.q, p.alpha) / vol, 1.0 / p.alpha);
    const double nu = data_mass(in);
    const double drift_mean = drift_energy(in) / vol;
    double rhs = 0.0;
    if (q_one) {
        rhs = std::sqrt(nu / vol) + std::sqrt(drift_mean);
    }
    else {
        const double e = (2.0 + d * (m + p.q - 1.0)) / (2.0 * (2.0 + m * d));
        const double K = 2.0 * d * (m + p.q - 1.0) * (m + p.q - 1.0) /
                         (m * (2.0 * (2.0 + m * d) - p.alpha * (2.0 + d * (m + p.q - 1.0))));
        const double nu_power = std::pow(nu, (p.q - 1.0) / (2.0 + m * d));
        const double mq = (m + p.q - 1.0) / m;
        rhs = std::pow(K, e) * nu_power * std::pow(nu / vol, e) + nu_power * std::pow(mq * mq * drift_mean, e);
    }
    EstimateReport r = make(id, EstimateMode::RatioTrend, lhs, rhs);
    r.params = {{"m", m}, {"d", d}, {"q", p.q}, {"alpha", p.alpha}, {"nu", nu}};
    r.pass = std::isfinite(r.ratio);
    return r;
}

double sigma1(double alpha, double q2)
{
    if (q2 == kInfinity) return 2.0 / (2.0 - alpha);
    return 2.0 * q2 / ((2.0 - alpha) * q2 + 2.0 * alpha);
}

double sigma2(double alpha, double q2, double m)
{
    if (q2 == kInfinity) return (4.0 - (2.0 + alpha) * m) / (2.0 * (2.0 - alpha));
    return ((4.0 - (2.0 + alpha) * m) * q2 + 2.0 * alpha * m) / (2.0 * ((2.0 - alpha) * q2 + 2.0 * alpha));
}

EstimateReport verify_theorem_estimate(const EstimateInput& in, double alpha)
{
    if (!(alpha > 1.0 && alpha < 2.0)) throw std::invalid_argument("alpha must lie in (1, 2)");
    const double m = in.traj.m;
    const int d = dim(in);
    const bool divfree = in.drift.divergence_free();
    const std::string id = divfree ? "E_V_divfree" : "E_V";
    const DiffusionParams dp{m, d};
    const ExponentPair& e = in.drift.exponents;

    bool admissible = false;
    if (divfree) {
        admissible = dp.sigma_valid();
    }
    else {
        const auto labels = theorem_admissible(dp, e, false).labels;
        if (m >= 1.0 && m <= 2.0) admissible = labels.count(Admissibility::PmeAdmissible) > 0;
        else if (m < 1.0 && dp.plain_valid()) admissible = labels.count(Admissibility::FdeAdmissible) > 0;
    }
    if (!admissible) return not_applicable(id, EstimateMode::RatioTrend, "drift exponents outside the admissible region");

    const double vol = cylinder_volume(in.traj);
    const double lhs = std::pow(grad_power_alpha(in.traj.slices, m, 1.0, alpha) / vol, 1.0 / alpha);
    const double nu = data_mass(in);
    double rhs = std::sqrt(nu / vol);
    EstimateReport r;
    if (divfree) {
        r = make(id, EstimateMode::RatioTrend, lhs, rhs);
        r.params = {{"m", m}, {"d", d}, {"alpha", alpha}, {"nu", nu}};
    }
    else {
        const double s1 = sigma1(alpha, e.q2());
        const double s2 = sigma2(alpha, e.q2(), m);
        const double vnorm = drift_norm(in, e);
        rhs += std::pow(vnorm, s1) * std::pow(nu, s2);
        r = make(id, EstimateMode::RatioTrend, lhs, rhs);
        r.params = {{"m", m}, {"d", d}, {"alpha", alpha}, {"nu", nu}, {"q1", e.q1()}, {"q2", e.q2()},
                    {"sigma1", s1}, {"sigma2", s2}, {"drift_norm", vnorm}};
    }
    r.pass = std::isfinite(r.ratio);
    return r;
}

double interpolation_relation(double alpha, double r1, double r2, double m, int d)
{
    const double inv_r2 = r2 == kInfinity ? 0.0 : 1.0 / r2;
    return d / r1 + (alpha * (2.0 + m * d) - 2.0 * d) * 0.5 * inv_r2 - d;
}

void check_interpolation(const InterpolationParams& p, double m, int d)
{
    constexpr double tol = 1e-9;
    if (!(p.alpha >= 2.0 * d / (2.0 + m * d) - tol && p.alpha < 2.0))
        throw std::invalid_argument("alpha must lie in [2d/(2+md), 2)");
    if (std::abs(interpolation_relation(p.alpha, p.r1, p.r2, m, d)) > tol * d)
        throw std::invalid_argument("(r1, r2) is off the interpolation relation");
    const double r1_max = p.alpha * m * d / (2.0 * (d - p.alpha));
    if (!(p.r1 >= 1.0 - tol && p.r1 <= r1_max * (1.0 + tol))) throw std::invalid_argument("r1 outside its range");
    if (!(p.r2 >= p.alpha * m / 2.0 * (1.0 - tol))) throw std::invalid_argument("r2 outside its range");
    if (!(p.r1 >= 1.0 && p.r2 >= 1.0)) throw std::invalid_argument("mixed norms here need r1, r2 >= 1");
}

InterpolationParams diagonal_interpolation(double alpha, double m, int d)
{
    const double r = alpha * (2.0 + m * d) / (2.0 * d);
    return {alpha, r, r};
}

InterpolationParams interpolation_for_r2(double alpha, double r2, double m, int d)
{
    const double inv_r2 = r2 == kInfinity ? 0.0 : 1.0 / r2;
    const double r1 = d / (d - (alpha * (2.0 + m * d) - 2.0 * d) * 0.5 * inv_r2);
    return {alpha, r1, r2};
}

EstimateReport verify_interpolation(const EstimateInput& in, const InterpolationParams& p)
{
    const double m = in.traj.m;
    check_interpolation(p, m, dim(in));
    if (in.traj.grid.boundary() == Boundary::NoFlux)
        return not_applicable("interpolation", EstimateMode::Literal, "needs zero boundary values");
    const double lhs = mixed_norm(in.traj.slices, ExponentPair(p.r1, p.r2));
    const double sup = sup_l1(in.traj.slices);
    const double grad = gradient_power(in.traj.slices, 0.5 * m, p.alpha);
    double rhs = sup;
    if (p.r2 != kInfinity) rhs = std::pow(sup, 1.0 - p.alpha * m / (2.0 * p.r2)) * std::pow(grad, 1.0 / p.r2);
    EstimateReport r = make("interpolation", EstimateMode::Literal, lhs, rhs);
    r.params = {{"m", m}, {"d", dim(in)}, {"alpha", p.alpha}, {"r1", p.r1}, {"r2", p.r2}};
    r.pass = lhs <= rhs * (1.0 + kLiteralSlack);
    return r;
}

EstimateReport verify_parabolic_embedding(const EstimateInput& in, const EmbeddingParams& p)
{
    const int d = dim(in);
    if (!(p.p >= 1.0 && p.p < d)) throw std::invalid_argument("embedding needs 1 <= p < d");
    if (!(p.q > 0.0 && p.q < d * p.p / (d - p.p))) throw std::invalid_argument("embedding needs 0 < q < dp/(d-p)");
    const double s = p.p * (d + p.q) / d;
    const auto& slices = in.traj.slices;
    const double lhs = space_time_power(slices, s);

    double sup_q = 0.0;
    CompensatedSum l1_term;
    for (const auto& slice : slices) {
        CompensatedSum a;
        CompensatedSum b;
        for (double v : slice.field.values()) {
            a.add(std::pow(std::abs(v), p.q));
            b.add(std::abs(v));
        }
        const double hd = slice.field.grid().cell_volume();
        sup_q = std::max(sup_q, a.value() * hd);
        if (slice.weight > 0.0) l1_term.add(slice.weight * std::pow(b.value() * hd, s));
    }
    const double grad = gradient_power(slices, 1.0, p.p);
    const double omega = in.traj.grid.volume();
    const double rhs = std::pow(sup_q, p.p / d) * grad + std::pow(omega, 1.0 - s) * l1_term.value();
    EstimateReport r = make("parabolic_embedding", EstimateMode::RatioTrend, lhs, rhs);
    r.params = {{"d", d}, {"p", p.p}, {"q", p.q}};
    r.pass = std::isfinite(r.ratio);
    return r;
}

bool trend_gated(const std::string& id) { return id == "Estimate02" || id == "Estimate02_divfree"; }

EstimateReport combine_refinement(const std::vector<std::pair<int, EstimateReport>>& ladder)
{
    if (ladder.empty()) throw std::invalid_argument("empty refinement ladder");
    EstimateReport out = ladder.back().second;
    out.refinement.clear();
    for (std::size_t k = 0; k < ladder.size(); ++k) {
        if (k > 0 && ladder[k].first <= ladder[k - 1].first) throw std::invalid_argument("ladder must increase");
        const auto& r = ladder[k].second;
        out.refinement.push_back({ladder[k].first, r.lhs, r.rhs, r.ratio});
        if (!r.applicable) {
            out.applicable = false;
            if (out.note.empty()) out.note = r.note;
        }
    }
    if (!out.applicable) {
        out.pass = false;
        return out;
    }
    if (out.mode == EstimateMode::Literal) {
        if (!trend_gated(out.id)) {
            out.pass = std::all_of(ladder.begin(), ladder.end(), [](const auto& e) { return e.second.pass; });
            if (!out.pass && out.note.empty()) out.note = "fails on some grid of the ladder";
            return out;
        }
        bool monotone = true;
        for (std::size_t k = 1; k < out.refinement.size(); ++k) {
            if (out.refinement[k].ratio > out.refinement[k - 1].ratio * (1.0 + 1e-12)) monotone = false;
        }
        out.pass = ladder.back().second.pass && monotone;
        if (!monotone) out.note = "ratio increases under refinement";
        return out;
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    bool finite = true;
    for (const auto& p : out.refinement) {
        if (!std::isfinite(p.ratio)) finite = false;
        lo = std::min(lo, p.ratio);
        hi = std::max(hi, p.ratio);
    }
    out.pass = finite && (hi == 0.0 || hi <= kTrendFactor * lo);
    return out;
}

} // namespace pmlab
