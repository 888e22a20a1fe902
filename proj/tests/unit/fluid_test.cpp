#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "pmlab/drift.hpp"
#include "pmlab/fluid.hpp"

using namespace pmlab;

namespace {

// l2 norm of the discrete vorticity over nodes inside [1/4, 3/4]^2.
double window_vorticity(const FaceField& v)
{
    const Grid& g = v.grid();
    const int n = g.cells();
    const double h = g.h();
    auto u = v.component(0);
    auto w = v.component(1);
    double a = 0.0;
    for (int i = 1; i < n; ++i) {
        for (int j = 1; j < n; ++j) {
            const double x = i * h, y = j * h;
            if (x < 0.25 || x > 0.75 || y < 0.25 || y > 0.75) continue;
            const double om = (w[static_cast<std::size_t>(i * (n + 1) + j)] - w[static_cast<std::size_t>((i - 1) * (n + 1) + j)]) / h -
                              (u[static_cast<std::size_t>(i * n + j)] - u[static_cast<std::size_t>(i * n + j - 1)]) / h;
            a += om * om;
        }
    }
    return std::sqrt(a);
}

} // namespace

TEST_CASE("potentials")
{
    Grid g(2, 8, 1.0);
    PotentialSpec lin{PotentialKind::Linear, 3.0, {}};
    CHECK(lin.value({0.2, 0.5, 0}) == doctest::Approx(1.5));
    auto G = lin.gradient(g);
    CHECK(G.component(0)[10] == 0.0);
    CHECK(G.component(1)[10] == doctest::Approx(3.0));
    PotentialSpec well{PotentialKind::Well, 2.0, {0.5, 0.5, 0}};
    CHECK(well.value({0.7, 0.5, 0}) == doctest::Approx(0.04));
    CHECK(potential_kind_from_string("linear") == PotentialKind::Linear);
    CHECK_THROWS(potential_kind_from_string("cubic"));
}

TEST_CASE("projection removes the divergence")
{
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    Grid g(2, 32, 1.0);
    FluidState s = make_fluid_state(g);
    for (int a = 0; a < 2; ++a) {
        auto c = s.v.component(a);
        for (std::size_t k = 0; k < c.size(); ++k) {
            auto x = g.face_center(a, k);
            const bool wall = (a == 0 && (x[0] == 0.0 || x[0] == 1.0)) || (a == 1 && (x[1] == 0.0 || x[1] == 1.0));
            c[k] = wall ? 0.0 : U(rng);
        }
    }
    auto stats = project(s.v, s.pressure, 0.01);
    CHECK(stats.relative_divergence <= kProjectionTolerance);
    CHECK(relative_divergence(s.v) <= kProjectionTolerance);
}

TEST_CASE("constant potential and zero velocity stay at rest")
{
    Grid g(2, 16, 1.0);
    FluidState s = make_fluid_state(g);
    CellField rho(g, 1.0);
    PotentialSpec c;
    auto r = ns_step(s, rho, c.gradient(g), 1e-4);
    CHECK(r.state.v.max_abs() == 0.0);
    CHECK(forcing_work(c.gradient(g), rho, r.state.v) == 0.0);
}

TEST_CASE("Taylor-Green decay rate in the interior window")
{
    Grid g(2, 128, 1.0);
    FluidState s = make_fluid_state(g);
    s.v = taylor_green(g);
    CHECK(relative_divergence(s.v) <= kProjectionTolerance);
    const double a0 = window_vorticity(s.v);
    const double T = 0.002;
    CellField rho(g);
    FaceField none(g);
    double t = 0.0;
    while (t < T) {
        const double dt = std::min(ns_stable_dt(s, 0.5), T - t);
        auto r = ns_step(s, rho, none, dt);
        CHECK(r.projection.relative_divergence <= kProjectionTolerance);
        s = std::move(r.state);
        t += dt;
    }
    const double rate = -std::log(window_vorticity(s.v) / a0) / T;
    const double exact = 8.0 * std::numbers::pi * std::numbers::pi;
    CHECK(std::abs(rate / exact - 1.0) < 0.05);
}

TEST_CASE("coupled: zero data gives the zero pair")
{
    Grid g(2, 16, 1.0);
    MeasureSpec none;
    CoupledConfig c;
    c.t_end = 0.005;
    MollifiedForcing f(none, 4, g, c.t_end);
    PotentialSpec p{PotentialKind::Linear, 50.0, {}};
    auto run = coupled_solve(g, c, f, FaceField(g), p);
    CHECK(run.final_fluid.v.max_abs() == 0.0);
    for (auto& s : run.rho) CHECK(s.field.max_abs() == 0.0);
    auto e = verify_coupled_energy(run, 1.5);
    CHECK(e.lhs == 0.0);
}

TEST_CASE("coupled: buoyant atom")
{
    Grid g(2, 32, 1.0);
    MeasureSpec ms;
    ms.atoms.push_back({{0.5, 0.3, 0}, 0.005, 1.0});
    ms.initial_atoms.push_back({{0.3, 0.6, 0}, 0.5});
    CoupledConfig c;
    c.m = 1.5;
    c.t_end = 0.02;
    MollifiedForcing f(ms, 8, g, c.t_end);
    PotentialSpec p{PotentialKind::Linear, 50.0, {}};
    auto run = coupled_solve(g, c, f, FaceField(g), p);
    CHECK(run.max_divergence() <= kProjectionTolerance);
    CHECK(run.max_energy_ratio() <= 1.0 + c.energy_slack);
    double sup = 0.0;
    for (auto& r : run.records) sup = std::max(sup, r.mass);
    CHECK(sup <= 1.5 * (1.0 + 1e-10));
    CHECK(run.records.back().kinetic > 0.0);
    auto e = verify_coupled_energy(run, 1.5);
    CHECK(e.rhs == doctest::Approx(1.5));
    CHECK(e.pass);
}

TEST_CASE("coupled: constant potential, vortex start, NoFlux density")
{
    Grid g(2, 32, 1.0, Boundary::NoFlux);
    MeasureSpec ms;
    ms.initial_atoms.push_back({{0.5, 0.5, 0}, 1.0});
    CoupledConfig c;
    c.m = 1.0;
    c.t_end = 0.01;
    MollifiedForcing f(ms, 4, g, c.t_end);
    auto run = coupled_solve(g, c, f, taylor_green(g), PotentialSpec{});
    CHECK(run.kinetic_monotone());
    for (std::size_t k = 1; k < run.records.size(); ++k) CHECK(run.records[k].kinetic <= run.records[k - 1].kinetic);
    for (auto& r : run.records) CHECK(r.mass == doctest::Approx(1.0).epsilon(1e-12));
    auto e = verify_coupled_energy(run, 1.0);
    CHECK(std::isfinite(e.lhs));
    CHECK(e.pass);
}
