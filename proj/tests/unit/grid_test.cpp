#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "pmlab/grid.hpp"

using namespace pmlab;

namespace {

CellField sample(const Grid& g, auto&& f)
{
    CellField out(g);
    for (std::size_t c = 0; c < g.cell_count(); ++c) out[c] = f(g.cell_center(c));
    return out;
}

double face_dot(const FaceField& a, const FaceField& b)
{
    double s = 0.0;
    for (int ax = 0; ax < a.grid().dim(); ++ax) {
        auto x = a.component(ax);
        auto y = b.component(ax);
        for (std::size_t k = 0; k < x.size(); ++k) s += x[k] * y[k];
    }
    return s;
}

} // namespace

TEST_CASE("face layout matches the documented 2D indexing")
{
    Grid g(2, 5, 1.0);
    CHECK(g.face_count(0) == 6 * 5);
    CHECK(g.face_count(1) == 5 * 6);
    CHECK(g.stride(0) == 5);
    CHECK(g.stride(1) == 1);
    auto c = g.cell_center(g.cell_flat({2, 3, 0}));
    CHECK(c[0] == doctest::Approx(0.5));
    CHECK(c[1] == doctest::Approx(0.7));
    // x-face i*N + j sits at x = i h, y-face i*(N+1) + j at y = j h
    auto fx = g.face_center(0, 2 * 5 + 3);
    CHECK(fx[0] == doctest::Approx(0.4));
    CHECK(fx[1] == doctest::Approx(0.7));
    auto fy = g.face_center(1, 2 * 6 + 3);
    CHECK(fy[0] == doctest::Approx(0.5));
    CHECK(fy[1] == doctest::Approx(0.6));
}

TEST_CASE("gradient_faces of x1 is 1 on every interior x1-face")
{
    for (auto b : {Boundary::DirichletZero, Boundary::NoFlux}) {
        Grid g(2, 8, 1.0, b);
        auto f = sample(g, [](const Point& x) { return x[0]; });
        auto G = gradient_faces(f);
        auto gx = G.component(0);
        for (std::size_t k = 0; k < gx.size(); ++k) {
            auto x = g.face_center(0, k);
            if (x[0] > 0.0 && x[0] < 1.0) CHECK(gx[k] == doctest::Approx(1.0).epsilon(1e-13));
        }
        auto gy = G.component(1);
        for (std::size_t k = 0; k < gy.size(); ++k) {
            auto x = g.face_center(1, k);
            if (x[1] > 0.0 && x[1] < 1.0) CHECK(gy[k] == doctest::Approx(0.0));
        }
    }
}

TEST_CASE("gradient_faces boundary ghosts")
{
    Grid d(2, 4, 1.0, Boundary::DirichletZero);
    Grid n(2, 4, 1.0, Boundary::NoFlux);
    CellField fd(d, 2.0), fn(n, 2.0);
    auto Gd = gradient_faces(fd);
    auto Gn = gradient_faces(fn);
    // face 0 along x at row j=0: ghost 0 versus mirror
    CHECK(Gd.component(0)[0] == doctest::Approx(2.0 / 0.25));
    CHECK(Gd.component(0)[4 * 4] == doctest::Approx(-2.0 / 0.25));
    CHECK(Gn.component(0)[0] == 0.0);
    CHECK(Gn.max_abs() == 0.0);
}

TEST_CASE("gradient_faces of zero is zero")
{
    Grid g(2, 6, 1.0);
    CHECK(gradient_faces(CellField(g)).max_abs() == 0.0);
    Grid g3(3, 4, 1.0);
    CHECK(gradient_faces(CellField(g3)).max_abs() == 0.0);
}

TEST_CASE("x1 squared on N=8: the face at x1 = 0.5 carries 1.0")
{
    Grid g(2, 8, 1.0);
    auto f = sample(g, [](const Point& x) { return x[0] * x[0]; });
    auto G = gradient_faces(f);
    // centres 0.4375 and 0.5625: (0.31640625 - 0.19140625) / 0.125
    const std::size_t face = 4 * 8 + 2;
    CHECK(g.face_center(0, face)[0] == doctest::Approx(0.5));
    CHECK(G.component(0)[face] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("divergence of constant and of affine gradients vanishes inside")
{
    Grid g(2, 8, 1.0, Boundary::NoFlux);
    FaceField F(g, 3.0);
    auto div = divergence_cells(F);
    auto lin = sample(g, [](const Point& x) { return 2.0 * x[0] - x[1] + 0.3; });
    auto div2 = divergence_cells(gradient_faces(lin));
    for (std::size_t c = 0; c < g.cell_count(); ++c) {
        auto i = g.cell_index(c);
        if (i[0] > 0 && i[0] < 7 && i[1] > 0 && i[1] < 7) {
            CHECK(div[c] == doctest::Approx(0.0));
            CHECK(std::abs(div2[c]) < 1e-10);
        }
    }
}

TEST_CASE("discrete divergence theorem and summation by parts")
{
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int dim : {2, 3}) {
        Grid g(dim, 7, 1.3, Boundary::DirichletZero);
        FaceField F(g);
        for (int a = 0; a < dim; ++a)
            for (auto& v : F.component(a)) v = U(rng);
        CellField f(g);
        for (auto& v : f.values()) v = U(rng);

        const double lhs = integrate(divergence_cells(F));
        const double rhs = boundary_flux(F);
        CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(rhs)));

        const double a = face_dot(gradient_faces(f), F);
        double b = 0.0;
        auto div = divergence_cells(F);
        for (std::size_t c = 0; c < g.cell_count(); ++c) b += f[c] * div[c];
        CHECK(std::abs(a + b) <= 1e-12 * std::max(1.0, std::abs(a)));
    }
}

TEST_CASE("integrate")
{
    Grid g(2, 10, 1.0);
    CHECK(integrate(CellField(g, 1.0)) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(integrate(CellField(g)) == 0.0);
    CellField one(g);
    one[37] = 1.0;
    CHECK(integrate(one) == doctest::Approx(0.01).epsilon(1e-15));
}

TEST_CASE("snapshot formats")
{
    Grid g(2, 4, 1.0);
    CellField f(g);
    f[g.cell_flat({1, 0, 0})] = 3.0;
    f[g.cell_flat({1, 1, 0})] = 4.5;
    f[g.cell_flat({3, 2, 0})] = -0.25;
    std::ostringstream csv;
    write_csv(csv, f);
    CHECK(csv.str().find("\n1,0,3\n") != std::string::npos);
    CHECK(csv.str().find("\n1,1,4.5\n") != std::string::npos);
    CHECK(csv.str().find("\n3,2,-0.25\n") != std::string::npos);

    std::stringstream bin;
    write_binary(bin, f.values());
    CHECK(bin.str().size() == 16 * sizeof(double));
    auto back = read_binary(bin, 16);
    CHECK(std::equal(back.begin(), back.end(), f.values().begin()));
    CHECK_THROWS(read_binary(bin, 1));
}

TEST_CASE("cell_magnitude averages opposing faces")
{
    Grid g(2, 5, 1.0);
    FaceField F(g);
    for (auto& v : F.component(0)) v = 3.0;
    for (auto& v : F.component(1)) v = 4.0;
    auto M = cell_magnitude(F);
    for (double v : M.values()) CHECK(v == doctest::Approx(5.0));
}
