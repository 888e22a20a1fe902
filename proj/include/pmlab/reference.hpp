#pragma once

// Closed-form solutions used as oracles: the heat kernel (m = 1) and the
// Barenblatt profile (m > 1), both emanating from a point mass.

#include "pmlab/grid.hpp"

namespace pmlab {

// (4 pi t)^{-d/2} exp(-|x - c|^2 / (4t)) scaled by mass.
double heat_kernel(const Point& x, double t, const Point& center, int d, double mass = 1.0);

struct BarenblattProfile {
    double m = 2.0;
    int d = 2;
    double mass = 1.0;
    Point center{};

    double alpha() const;
    double beta() const;
    double k() const;
    double C() const;  // fixed by the mass
    double support_radius(double t) const;
    double operator()(const Point& x, double t) const;
};

// Cell averages of f(., t) by an s^d point midpoint rule inside each cell.
template <class Fn>
CellField sample_cell_average(const Grid& grid, Fn&& f, int sub = 4)
{
    CellField out(grid);
    const double h = grid.h();
    const int d = grid.dim();
    const int sz = d == 3 ? sub : 1;
    const double inv = 1.0 / (static_cast<double>(sub) * sub * sz);
    for (std::size_t c = 0; c < grid.cell_count(); ++c) {
        const auto idx = grid.cell_index(c);
        double s = 0.0;
        for (int i = 0; i < sub; ++i) {
            for (int j = 0; j < sub; ++j) {
                for (int k = 0; k < sz; ++k) {
                    Point x{(idx[0] + (i + 0.5) / sub) * h, (idx[1] + (j + 0.5) / sub) * h, 0.0};
                    if (d == 3) x[2] = (idx[2] + (k + 0.5) / sub) * h;
                    s += f(x);
                }
            }
        }
        out[c] = s * inv;
    }
    return out;
}

// h^d sum |a - b|.
double l1_distance(const CellField& a, const CellField& b);

} // namespace pmlab
