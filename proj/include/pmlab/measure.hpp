#pragma once

// Forcing measures mu (space-time atoms plus an optional absolutely continuous
// density) and initial measures mu0, with the bounded mollified sequence mu_n.

#include <functional>
#include <optional>
#include <vector>

#include "pmlab/grid.hpp"

namespace pmlab {

struct Atom {
    Point x{};
    double t = 0.0;
    double mass = 0.0;
};

struct InitialAtom {
    Point x{};
    double mass = 0.0;
};

enum class DensityKind { Constant, SineBump };

// amplitude * shape(x) on t_on <= t < t_off; SineBump shape is prod_a sin^2(pi x_a / L).
struct DensityPreset {
    DensityKind kind = DensityKind::Constant;
    double amplitude = 0.0;
    double t_on = 0.0;
    double t_off = 1e300;
};

struct MeasureSpec {
    std::vector<Atom> atoms;
    std::optional<DensityPreset> density;
    std::vector<InitialAtom> initial_atoms;

    bool empty() const { return atoms.empty() && !density && initial_atoms.empty(); }
};

// Throws if an atom lies outside the open box / time interval or carries
// nonpositive mass, or the density is negative.
void validate(const MeasureSpec& spec, const Grid& grid, double final_time);

// mu(Omega_T), plus mu0(Omega) when include_initial.
double total_mass(const MeasureSpec& spec, const Grid& grid, double final_time, bool include_initial);

// mu(Q) for the closed cylinder Q = [lo, hi] x [t0, t1].
double exact_cylinder_mass(const MeasureSpec& spec, const Grid& grid, double final_time, const Point& lo,
                           const Point& hi, double t0, double t1);

using SpaceTimeFunction = std::function<double(const Point&, double)>;

// sum mass*phi(atom) + int int density*phi, the weak limit of mu_n paired with phi.
double exact_pairing(const MeasureSpec& spec, const Grid& grid, double final_time, const SpaceTimeFunction& phi);

class MollifiedForcing {
public:
    // Mollification radii: max(2h, L/n) in space and T/n in time.
    MollifiedForcing(const MeasureSpec& spec, int n, const Grid& grid, double final_time);

    int level() const { return level_; }
    double width() const { return delta_; }
    double time_width() const { return tau_; }
    const Grid& grid() const { return grid_; }
    double final_time() const { return final_time_; }

    // Adds int_{t0}^{t1} mu_n dt cell by cell to `out`; returns the added mass.
    double accumulate(double t0, double t1, CellField& out) const;

    // (1/(t1-t0)) int_{t0}^{t1} mu_n dt.
    CellField average(double t0, double t1) const;

    // Space-mollified mu0, the solver's initial state.
    CellField initial_state() const;

    // Discrete int int mu_n over Omega_T.
    double total() const;

    // int int mu_n over ([lo,hi] x [t0,t1]) intersected with Omega_T.
    double cylinder_mass(const Point& lo, const Point& hi, double t0, double t1) const;

    // int int mu_n phi, midpoint rule in space and Gauss-Legendre in time.
    double pair_with(const SpaceTimeFunction& phi) const;

    // Upper bound on the mollified density over Omega_T (finite for every n).
    double sup_bound() const;

private:
    struct Spread {
        std::vector<std::size_t> cells;
        std::vector<double> weights;  // sum weights * h^d = 1
    };
    struct TimedSpread {
        Spread space;
        double t = 0.0;
        double mass = 0.0;
        double kept = 1.0;  // fraction of the time profile inside [0, T]
    };

    Spread spread(const Point& x) const;
    double time_cdf(double tau) const;
    // Share of the atom's (renormalized) time profile falling in [t0, t1].
    double time_fraction(const TimedSpread& a, double t0, double t1) const;

    Grid grid_;
    double final_time_ = 0.0;
    int level_ = 1;
    double delta_ = 0.0;
    double tau_ = 0.0;
    std::vector<TimedSpread> atoms_;
    CellField initial_;
    std::optional<DensityPreset> density_;
    CellField density_shape_;  // exact cell averages of the spatial shape
};

} // namespace pmlab
