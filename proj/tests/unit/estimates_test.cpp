#include "doctest.h"

#include <cmath>

#include "pmlab/estimates.hpp"

using namespace pmlab;

namespace {

Trajectory zero_trajectory(double m, Boundary b = Boundary::DirichletZero)
{
    Trajectory t;
    t.grid = Grid(2, 16, 1.0, b);
    t.m = m;
    t.final_time = 1.0;
    t.slices.push_back({0.0, 0.5, CellField(t.grid)});
    t.slices.push_back({0.5, 0.5, CellField(t.grid)});
    t.slices.push_back({1.0, 0.0, CellField(t.grid)});
    return t;
}

Trajectory run(const Grid& g, double m, const MeasureSpec& ms, const DriftSpec& drift, double T)
{
    MollifiedForcing f(ms, 8, g, T);
    SolverConfig c;
    c.m = m;
    c.t_end = T;
    return solve(g, c, f, drift);
}

MeasureSpec atoms()
{
    MeasureSpec ms;
    ms.atoms.push_back({{0.5, 0.5, 0}, 0.1, 0.005});
    ms.atoms.push_back({{0.4, 0.6, 0}, 0.15, 0.0025});
    return ms;
}

} // namespace

TEST_CASE("Estimate01")
{
    MeasureSpec none;
    DriftSpec zero;
    auto z = zero_trajectory(2.0);
    auto r = verify_mass({z, none, zero});
    CHECK(r.lhs == 0.0);
    CHECK(r.rhs == 0.0);
    CHECK(r.pass);

    MeasureSpec one;
    one.atoms.push_back({{0.5, 0.5, 0}, 0.2, 1.0});
    auto tr = run(Grid(2, 32, 1.0), 2.0, one, zero, 0.4);
    auto e = verify_mass({tr, one, zero});
    CHECK(e.rhs == 1.0);
    CHECK(e.lhs <= 1.0 + 1e-10);
    CHECK(e.pass);

    MeasureSpec mixed;
    mixed.atoms.push_back({{0.5, 0.5, 0}, 0.2, 0.5});
    mixed.initial_atoms.push_back({{0.3, 0.3, 0}, 0.5});
    auto tm = run(Grid(2, 32, 1.0, Boundary::NoFlux), 1.0, mixed, zero, 0.4);
    auto em = verify_mass({tm, mixed, zero});
    CHECK(em.rhs == doctest::Approx(1.0));
    CHECK(em.lhs == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(em.pass);
}

TEST_CASE("Estimate02: constants and the zero trajectory")
{
    MeasureSpec ms = atoms();
    DriftSpec zero;
    auto z = zero_trajectory(2.0);
    auto r = verify_weighted_gradient({z, ms, zero}, {1.0, 2.0, 2.0});
    CHECK(r.id == "Estimate02_divfree");
    CHECK(r.lhs == 0.0);
    CHECK(r.pass);
    // 2 (m+q-1)^2 A^{(q-1)(1-xi)} nu / (m (q-1)(xi-1)) with m=2, q=2, xi=2, A=1
    CHECK(r.rhs == doctest::Approx(2.0 * 9.0 * 0.0075 / 2.0));

    auto r2 = verify_weighted_gradient({z, ms, zero}, {2.0, 3.0, 1.5});
    const double C = 2.5 * 2.5 * std::pow(2.0, 0.5 * -2.0) / (2.0 * 0.5 * 2.0);
    CHECK(r2.rhs == doctest::Approx(2.0 * C * 0.0075));

    CHECK_THROWS(verify_weighted_gradient({z, ms, zero}, {1.0, 1.0, 2.0}));
    CHECK_THROWS(verify_weighted_gradient({z, ms, zero}, {1.0, 2.0, 1.0}));
    CHECK_THROWS(verify_weighted_gradient({z, ms, zero}, {0.0, 2.0, 2.0}));

    DriftSpec radial;
    radial.preset = DriftPreset::Radial;
    radial.amplitude = 0.1;
    auto z3 = zero_trajectory(3.0);
    CHECK_THROWS(verify_weighted_gradient({z3, ms, radial}, {1.0, 2.0, 2.0}));
    CHECK_NOTHROW(verify_weighted_gradient({z3, ms, zero}, {1.0, 2.0, 2.0}));
}

TEST_CASE("Estimate02: atom scenario, m=2, V=0")
{
    MeasureSpec ms = atoms();
    DriftSpec zero;
    auto tr = run(Grid(2, 32, 1.0), 2.0, ms, zero, 0.3);
    EstimateInput in{tr, ms, zero};
    auto r = verify_weighted_gradient(in, {1.0, 2.0, 2.0});
    CHECK(r.lhs > 0.0);
    CHECK(r.pass);
    // lhs non-increasing in xi and in A
    auto bigger_xi = verify_weighted_gradient(in, {1.0, 3.0, 2.0});
    auto bigger_A = verify_weighted_gradient(in, {2.0, 2.0, 2.0});
    CHECK(bigger_xi.lhs <= r.lhs);
    CHECK(bigger_A.lhs <= r.lhs);
    // deterministic
    CHECK(verify_weighted_gradient(in, {1.0, 2.0, 2.0}).lhs == r.lhs);
}

TEST_CASE("Estimate02 general form carries the drift energy")
{
    MeasureSpec ms = atoms();
    DriftSpec radial;
    radial.preset = DriftPreset::Radial;
    radial.amplitude = 0.5;
    radial.center = {0.5, 0.5, 0};
    auto tr = run(Grid(2, 32, 1.0), 1.5, ms, radial, 0.3);
    EstimateInput in{tr, ms, radial};
    auto r = verify_weighted_gradient(in, {1.0, 2.0, 2.0});
    CHECK(r.id == "Estimate02");
    const double C = r.params.at("constant");
    CHECK(r.rhs == doctest::Approx(C * (2.0 * 0.0075 + 1.0 / 1.5 * drift_energy(in))));
}

TEST_CASE("Estimate03/04")
{
    MeasureSpec ms = atoms();
    DriftSpec zero;
    auto z = zero_trajectory(2.0);
    auto r = verify_alpha_gradient({z, ms, zero}, {1.0, 1.0});
    CHECK(r.id == "Estimate04");
    CHECK(r.lhs == 0.0);
    // q -> 1 form: [nu/|Omega_T|]^{1/2} + (mean u^{2-m}|V|^2)^{1/2}
    CHECK(r.rhs == doctest::Approx(std::sqrt(0.0075 / 1.0)));
    CHECK(verify_alpha_gradient({z, ms, zero}, {1.5, 1.0}).id == "Estimate03");
    CHECK(alpha_limit(2.0, 2, 1.5) == doctest::Approx(2.0 * 6.0 / 7.0));
    CHECK_THROWS(verify_alpha_gradient({z, ms, zero}, {1.5, 1.8}));
    CHECK_THROWS(verify_alpha_gradient({z, ms, zero}, {1.0, 2.0}));
    CHECK_FALSE(verify_alpha_gradient({zero_trajectory(2.5), ms, zero}, {1.0, 1.0}).applicable);
}

TEST_CASE("E_V exponents")
{
    CHECK(sigma1(2.0, 2.0) == doctest::Approx(1.0));
    CHECK(sigma1(1.5, 4.0) == doctest::Approx(8.0 / (2.0 + 3.0)));
    CHECK(sigma2(1.5, 4.0, 1.0) == doctest::Approx(((4.0 - 3.5) * 4.0 + 3.0) / (2.0 * 5.0)));
    CHECK(sigma1(1.5, kInfinity) == doctest::Approx(4.0));

    MeasureSpec ms = atoms();
    DriftSpec zero;
    auto z = zero_trajectory(1.5);
    auto r = verify_theorem_estimate({z, ms, zero}, 1.5);
    CHECK(r.id == "E_V_divfree");
    CHECK(r.rhs == doctest::Approx(std::sqrt(0.0075)));

    // m=1, (4,4) is on the plain line but not the designated pair: not PME admissible
    DriftSpec radial;
    radial.preset = DriftPreset::Radial;
    radial.amplitude = 0.3;
    radial.center = {0.5, 0.5, 0};
    radial.exponents = {4.0, 4.0};
    auto tr = run(Grid(2, 32, 1.0), 1.0, ms, radial, 0.3);
    CHECK_FALSE(verify_theorem_estimate({tr, ms, radial}, 1.5).applicable);
    // (8, 4): sum 1/4 + 1/2 < 1, inside the PME box
    radial.exponents = {8.0, 4.0};
    auto ok = verify_theorem_estimate({tr, ms, radial}, 1.5);
    CHECK(ok.applicable);
    CHECK(ok.params.at("sigma1") == doctest::Approx(sigma1(1.5, 4.0)));
    CHECK(ok.params.at("sigma2") == doctest::Approx(sigma2(1.5, 4.0, 1.0)));
    CHECK(ok.pass);
}

TEST_CASE("interpolation relation")
{
    // d=2, m=2, alpha=1.5: diagonal r = 1.5 * 6 / 4
    auto p = diagonal_interpolation(1.5, 2.0, 2);
    CHECK(p.r1 == doctest::Approx(2.25));
    CHECK(std::abs(interpolation_relation(p.alpha, p.r1, p.r2, 2.0, 2)) < 1e-12);
    auto q = interpolation_for_r2(1.5, 3.0, 2.0, 2);
    CHECK(std::abs(interpolation_relation(q.alpha, q.r1, q.r2, 2.0, 2)) < 1e-12);
    auto e = interpolation_for_r2(1.5, kInfinity, 2.0, 2);
    CHECK(e.r1 == doctest::Approx(1.0));
    CHECK_THROWS(check_interpolation({1.5, 2.0, 2.0}, 2.0, 2));
    CHECK_THROWS(check_interpolation({0.5, 1.0, 1.0}, 2.0, 2));
    CHECK_NOTHROW(check_interpolation(p, 2.0, 2));
}

TEST_CASE("interpolation verdicts")
{
    MeasureSpec ms = atoms();
    DriftSpec zero;
    auto z = zero_trajectory(2.0);
    auto r = verify_interpolation({z, ms, zero}, diagonal_interpolation(1.5, 2.0, 2));
    CHECK(r.lhs == 0.0);
    CHECK(r.pass);

    auto tr = run(Grid(2, 32, 1.0), 2.0, ms, zero, 0.3);
    EstimateInput in{tr, ms, zero};
    auto endpoint = verify_interpolation(in, interpolation_for_r2(1.5, kInfinity, 2.0, 2));
    CHECK(endpoint.rhs == doctest::Approx(sup_l1(tr.slices)));
    CHECK(endpoint.lhs == doctest::Approx(sup_l1(tr.slices)));
    CHECK(verify_interpolation(in, diagonal_interpolation(1.5, 2.0, 2)).pass);

    auto nf = zero_trajectory(2.0, Boundary::NoFlux);
    CHECK_FALSE(verify_interpolation({nf, ms, zero}, diagonal_interpolation(1.5, 2.0, 2)).applicable);
}

TEST_CASE("parabolic embedding")
{
    MeasureSpec ms = atoms();
    DriftSpec zero;
    auto z = zero_trajectory(1.0);
    auto r = verify_parabolic_embedding({z, ms, zero}, {1.5, 1.0});
    CHECK(r.ratio == 0.0);
    CHECK_THROWS(verify_parabolic_embedding({z, ms, zero}, {2.0, 1.0}));
    CHECK_THROWS(verify_parabolic_embedding({z, ms, zero}, {1.5, 6.0}));

    // Gaussian evolution under the heat flow: bounded ratio series
    MeasureSpec init;
    init.initial_atoms.push_back({{0.5, 0.5, 0}, 1.0});
    std::vector<double> ratios;
    for (int n : {32, 64, 128}) {
        auto tr = run(Grid(2, n, 1.0), 1.0, init, zero, 0.02);
        ratios.push_back(verify_parabolic_embedding({tr, init, zero}, {1.5, 1.0}).ratio);
    }
    auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
    CHECK(*hi <= kTrendFactor * *lo);
}

TEST_CASE("combine_refinement")
{
    auto lit = [](const std::string& id, double lhs, double rhs) {
        EstimateReport r;
        r.id = id;
        r.lhs = lhs;
        r.rhs = rhs;
        r.ratio = lhs / rhs;
        r.pass = lhs <= rhs * 1.05;
        return r;
    };
    auto ok = combine_refinement({{32, lit("Estimate02", 0.5, 1)}, {64, lit("Estimate02", 0.4, 1)}, {128, lit("Estimate02", 0.4, 1)}});
    CHECK(ok.pass);
    CHECK(ok.refinement.size() == 3);
    auto up = combine_refinement({{32, lit("Estimate02", 0.4, 1)}, {64, lit("Estimate02", 0.41, 1)}, {128, lit("Estimate02", 0.42, 1)}});
    CHECK_FALSE(up.pass);
    auto coarse_fail = combine_refinement({{32, lit("Estimate01", 1.1, 1)}, {64, lit("Estimate01", 0.9, 1)}});
    CHECK_FALSE(coarse_fail.pass);

    EstimateReport t;
    t.id = "Estimate03";
    t.mode = EstimateMode::RatioTrend;
    t.pass = true;
    auto trend = [&](double ratio) {
        EstimateReport r = t;
        r.ratio = ratio;
        return r;
    };
    CHECK(combine_refinement({{32, trend(1.0)}, {64, trend(1.5)}, {128, trend(1.9)}}).pass);
    CHECK_FALSE(combine_refinement({{32, trend(1.0)}, {64, trend(1.5)}, {128, trend(2.1)}}).pass);
    CHECK_THROWS(combine_refinement({}));
    CHECK_THROWS(combine_refinement({{64, trend(1.0)}, {32, trend(1.0)}}));
}

TEST_CASE("report JSON")
{
    EstimateReport r;
    r.id = "Estimate01";
    r.lhs = 0.5;
    r.rhs = 1.0;
    r.ratio = 0.5;
    r.pass = true;
    r.params["q2"] = kInfinity;
    auto j = to_json(r);
    CHECK(j["id"] == "Estimate01");
    CHECK(j["mode"] == "Literal");
    CHECK(j["params"]["q2"] == "inf");
}
