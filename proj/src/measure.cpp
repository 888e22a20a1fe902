#include "pmlab/measure.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pmlab {

namespace {

// Antiderivative of (1 - s^2)^2; G(1) - G(-1) = 16/15.
double profile_antiderivative(double s) { return s - 2.0 * s * s * s / 3.0 + s * s * s * s * s / 5.0; }

double overlap(double a0, double a1, double b0, double b1) { return std::max(0.0, std::min(a1, b1) - std::max(a0, b0)); }

// Integral of sin^2(pi x / L).
double sine_antiderivative(double x, double L)
{
    return 0.5 * x - L / (4.0 * std::numbers::pi) * std::sin(2.0 * std::numbers::pi * x / L);
}

double shape_integral(DensityKind kind, double a, double b, double L)
{
    if (b <= a) return 0.0;
    if (kind == DensityKind::Constant) return b - a;
    return sine_antiderivative(b, L) - sine_antiderivative(a, L);
}

double shape_value(DensityKind kind, const Point& x, int d, double L)
{
    if (kind == DensityKind::Constant) return 1.0;
    double v = 1.0;
    for (int a = 0; a < d; ++a) {
        const double s = std::sin(std::numbers::pi * x[static_cast<std::size_t>(a)] / L);
        v *= s * s;
    }
    return v;
}

double density_time_overlap(const DensityPreset& p, double t0, double t1, double T)
{
    return overlap(t0, t1, std::max(p.t_on, 0.0), std::min(p.t_off, T));
}

// 5-point Gauss-Legendre on [-1, 1].
constexpr std::array<double, 5> kGaussNodes{-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                                            0.9061798459386640};
constexpr std::array<double, 5> kGaussWeights{0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                              0.4786286704993665, 0.2369268850561891};

template <class Fn>
double gauss(double a, double b, int panels, Fn&& fn)
{
    if (b <= a) return 0.0;
    const double w = (b - a) / panels;
    double s = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double mid = a + (p + 0.5) * w;
        for (std::size_t k = 0; k < kGaussNodes.size(); ++k) s += kGaussWeights[k] * 0.5 * w * fn(mid + 0.5 * w * kGaussNodes[k]);
    }
    return s;
}

bool inside_box(const Point& x, const Point& lo, const Point& hi, int d)
{
    for (int a = 0; a < d; ++a) {
        const auto i = static_cast<std::size_t>(a);
        if (x[i] < lo[i] || x[i] > hi[i]) return false;
    }
    return true;
}

} // namespace

void validate(const MeasureSpec& spec, const Grid& grid, double final_time)
{
    const double L = grid.length();
    for (const auto& a : spec.atoms) {
        if (!(a.mass > 0.0)) throw std::invalid_argument("atom mass must be positive");
        if (!(a.t > 0.0 && a.t < final_time)) throw std::invalid_argument("atom time must lie in (0, T)");
        for (int k = 0; k < grid.dim(); ++k) {
            const double x = a.x[static_cast<std::size_t>(k)];
            if (!(x > 0.0 && x < L)) throw std::invalid_argument("atom must lie strictly inside the domain");
        }
    }
    for (const auto& a : spec.initial_atoms) {
        if (!(a.mass > 0.0)) throw std::invalid_argument("initial atom mass must be positive");
        for (int k = 0; k < grid.dim(); ++k) {
            const double x = a.x[static_cast<std::size_t>(k)];
            if (!(x > 0.0 && x < L)) throw std::invalid_argument("initial atom must lie strictly inside the domain");
        }
    }
    if (spec.density) {
        if (!(spec.density->amplitude >= 0.0)) throw std::invalid_argument("density amplitude must be nonnegative");
        if (!(spec.density->t_off > spec.density->t_on)) throw std::invalid_argument("density needs t_off > t_on");
    }
}

double total_mass(const MeasureSpec& spec, const Grid& grid, double final_time, bool include_initial)
{
    CompensatedSum s;
    for (const auto& a : spec.atoms) s.add(a.mass);
    if (spec.density) {
        const auto& p = *spec.density;
        const double L = grid.length();
        s.add(p.amplitude * density_time_overlap(p, 0.0, final_time, final_time) *
              std::pow(shape_integral(p.kind, 0.0, L, L), grid.dim()));
    }
    if (include_initial) {
        for (const auto& a : spec.initial_atoms) s.add(a.mass);
    }
    return s.value();
}

double exact_cylinder_mass(const MeasureSpec& spec, const Grid& grid, double final_time, const Point& lo,
                           const Point& hi, double t0, double t1)
{
    CompensatedSum s;
    for (const auto& a : spec.atoms) {
        if (a.t >= t0 && a.t <= t1 && inside_box(a.x, lo, hi, grid.dim())) s.add(a.mass);
    }
    if (spec.density) {
        const auto& p = *spec.density;
        const double L = grid.length();
        double space = 1.0;
        for (int k = 0; k < grid.dim(); ++k) {
            const auto i = static_cast<std::size_t>(k);
            space *= shape_integral(p.kind, std::max(lo[i], 0.0), std::min(hi[i], L), L);
        }
        s.add(p.amplitude * space * density_time_overlap(p, t0, t1, final_time));
    }
    return s.value();
}

double exact_pairing(const MeasureSpec& spec, const Grid& grid, double final_time, const SpaceTimeFunction& phi)
{
    double s = 0.0;
    for (const auto& a : spec.atoms) s += a.mass * phi(a.x, a.t);
    if (spec.density) {
        const auto& p = *spec.density;
        const double L = grid.length();
        const int d = grid.dim();
        const double t0 = std::max(p.t_on, 0.0);
        const double t1 = std::min(p.t_off, final_time);
        constexpr int panels = 16;
        s += p.amplitude * gauss(t0, t1, 4, [&](double t) {
            return gauss(0.0, L, panels, [&](double x) {
                return gauss(0.0, L, panels, [&](double y) {
                    if (d == 2) {
                        const Point pt{x, y, 0.0};
                        return shape_value(p.kind, pt, d, L) * phi(pt, t);
                    }
                    return gauss(0.0, L, panels, [&](double z) {
                        const Point pt{x, y, z};
                        return shape_value(p.kind, pt, d, L) * phi(pt, t);
                    });
                });
            });
        });
    }
    return s;
}

MollifiedForcing::MollifiedForcing(const MeasureSpec& spec, int n, const Grid& grid, double final_time)
    : grid_(grid), final_time_(final_time), level_(n), initial_(grid), density_(spec.density), density_shape_(grid)
{
    if (n < 1) throw std::invalid_argument("mollification level must be >= 1");
    if (!(final_time > 0.0)) throw std::invalid_argument("final time must be positive");
    validate(spec, grid, final_time);
    delta_ = std::max(2.0 * grid.h(), grid.length() / n);
    tau_ = final_time / n;

    for (const auto& a : spec.atoms) {
        TimedSpread ts;
        ts.space = spread(a.x);
        ts.t = a.t;
        ts.mass = a.mass;
        ts.kept = time_cdf(final_time - a.t) - time_cdf(-a.t);
        if (ts.kept < 0.5) throw std::invalid_argument("atom too close to t = 0 or t = T for this mollification level");
        atoms_.push_back(std::move(ts));
    }
    for (const auto& a : spec.initial_atoms) {
        const Spread s = spread(a.x);
        for (std::size_t k = 0; k < s.cells.size(); ++k) initial_[s.cells[k]] += a.mass * s.weights[k];
    }
    if (density_) {
        const double L = grid.length();
        const double h = grid.h();
        for (std::size_t c = 0; c < grid.cell_count(); ++c) {
            const auto idx = grid.cell_index(c);
            double v = 1.0;
            for (int k = 0; k < grid.dim(); ++k) {
                const double x0 = idx[static_cast<std::size_t>(k)] * h;
                v *= shape_integral(density_->kind, x0, x0 + h, L) / h;
            }
            density_shape_[c] = v;
        }
    }
}

MollifiedForcing::Spread MollifiedForcing::spread(const Point& x) const
{
    const int d = grid_.dim();
    const int N = grid_.cells();
    const double h = grid_.h();
    std::array<int, 3> lo{0, 0, 0};
    std::array<int, 3> hi{0, 0, 0};
    for (int k = 0; k < d; ++k) {
        const auto i = static_cast<std::size_t>(k);
        lo[i] = static_cast<int>(std::floor((x[i] - delta_) / h)) - 1;
        hi[i] = static_cast<int>(std::ceil((x[i] + delta_) / h)) + 1;
    }
    Spread s;
    double full = 0.0;
    double inside = 0.0;
    for (int i = lo[0]; i <= hi[0]; ++i) {
        for (int j = lo[1]; j <= hi[1]; ++j) {
            for (int k = lo[2]; k <= hi[2]; ++k) {
                const std::array<int, 3> idx{i, j, k};
                double r2 = 0.0;
                bool in = true;
                for (int a = 0; a < d; ++a) {
                    const auto ia = static_cast<std::size_t>(a);
                    const double c = (idx[ia] + 0.5) * h;
                    r2 += (c - x[ia]) * (c - x[ia]);
                    if (idx[ia] < 0 || idx[ia] >= N) in = false;
                }
                const double q = 1.0 - r2 / (delta_ * delta_);
                if (q <= 0.0) continue;
                const double w = q * q;
                full += w;
                if (!in) continue;
                inside += w;
                s.cells.push_back(grid_.cell_flat(idx));
                s.weights.push_back(w);
            }
        }
    }
    if (full == 0.0 || inside < 0.5 * full)
        throw std::invalid_argument("atom too close to the boundary for this mollification level");
    const double norm = inside * grid_.cell_volume();
    for (double& w : s.weights) w /= norm;
    return s;
}

double MollifiedForcing::time_cdf(double tau) const
{
    const double s = std::clamp(tau / tau_, -1.0, 1.0);
    return (profile_antiderivative(s) + 8.0 / 15.0) / (16.0 / 15.0);
}

double MollifiedForcing::time_fraction(const TimedSpread& a, double t0, double t1) const
{
    t0 = std::max(t0, 0.0);
    t1 = std::min(t1, final_time_);
    if (t1 <= t0) return 0.0;
    return (time_cdf(t1 - a.t) - time_cdf(t0 - a.t)) / a.kept;
}

double MollifiedForcing::accumulate(double t0, double t1, CellField& out) const
{
    double added = 0.0;
    for (const auto& a : atoms_) {
        const double m = a.mass * time_fraction(a, t0, t1);
        if (m == 0.0) continue;
        for (std::size_t k = 0; k < a.space.cells.size(); ++k) out[a.space.cells[k]] += m * a.space.weights[k];
        added += m;
    }
    if (density_) {
        const double scale = density_->amplitude * density_time_overlap(*density_, t0, t1, final_time_);
        if (scale > 0.0) {
            for (std::size_t c = 0; c < out.size(); ++c) out[c] += scale * density_shape_[c];
            added += scale * integrate(density_shape_);
        }
    }
    return added;
}

CellField MollifiedForcing::average(double t0, double t1) const
{
    if (!(t1 > t0)) throw std::invalid_argument("average needs t1 > t0");
    CellField out(grid_);
    accumulate(t0, t1, out);
    for (double& v : out.values()) v /= (t1 - t0);
    return out;
}

CellField MollifiedForcing::initial_state() const { return initial_; }

double MollifiedForcing::total() const
{
    CellField all(grid_);
    accumulate(0.0, final_time_, all);
    return integrate(all);
}

double MollifiedForcing::cylinder_mass(const Point& lo, const Point& hi, double t0, double t1) const
{
    const double h = grid_.h();
    auto cell_overlap = [&](std::size_t c) {
        const auto idx = grid_.cell_index(c);
        double v = 1.0;
        for (int k = 0; k < grid_.dim(); ++k) {
            const auto i = static_cast<std::size_t>(k);
            v *= overlap(idx[i] * h, (idx[i] + 1) * h, lo[i], hi[i]);
            if (v == 0.0) break;
        }
        return v;
    };
    CompensatedSum s;
    for (const auto& a : atoms_) {
        const double m = a.mass * time_fraction(a, t0, t1);
        if (m == 0.0) continue;
        for (std::size_t k = 0; k < a.space.cells.size(); ++k) s.add(m * a.space.weights[k] * cell_overlap(a.space.cells[k]));
    }
    if (density_) {
        const double scale = density_->amplitude * density_time_overlap(*density_, t0, t1, final_time_);
        if (scale > 0.0) {
            for (std::size_t c = 0; c < grid_.cell_count(); ++c) s.add(scale * density_shape_[c] * cell_overlap(c));
        }
    }
    return s.value();
}

double MollifiedForcing::pair_with(const SpaceTimeFunction& phi) const
{
    const double norm = tau_ * 16.0 / 15.0;
    const double hd = grid_.cell_volume();
    CompensatedSum s;
    for (const auto& a : atoms_) {
        const double t0 = std::max(0.0, a.t - tau_);
        const double t1 = std::min(final_time_, a.t + tau_);
        for (std::size_t k = 0; k < a.space.cells.size(); ++k) {
            const Point x = grid_.cell_center(a.space.cells[k]);
            const double time_part = gauss(t0, t1, 4, [&](double t) {
                const double r = (t - a.t) / tau_;
                const double q = std::max(0.0, 1.0 - r * r);
                return q * q / (norm * a.kept) * phi(x, t);
            });
            s.add(a.mass * a.space.weights[k] * hd * time_part);
        }
    }
    if (density_) {
        const double t0 = std::max(density_->t_on, 0.0);
        const double t1 = std::min(density_->t_off, final_time_);
        for (std::size_t c = 0; c < grid_.cell_count(); ++c) {
            if (density_shape_[c] == 0.0) continue;
            const Point x = grid_.cell_center(c);
            s.add(density_->amplitude * density_shape_[c] * hd * gauss(t0, t1, 4, [&](double t) { return phi(x, t); }));
        }
    }
    return s.value();
}

double MollifiedForcing::sup_bound() const
{
    const double peak_time = 1.0 / (tau_ * 16.0 / 15.0);
    double bound = 0.0;
    for (const auto& a : atoms_) {
        double w = 0.0;
        for (double v : a.space.weights) w = std::max(w, v);
        bound += a.mass * w * peak_time / a.kept;
    }
    if (density_) bound += density_->amplitude * density_shape_.max_abs();
    return bound;
}

} // namespace pmlab
