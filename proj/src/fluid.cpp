#include "pmlab/fluid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include <fftw3.h>

namespace pmlab {

std::string to_string(PotentialKind k)
{
    switch (k) {
    case PotentialKind::Constant: return "constant";
    case PotentialKind::Linear: return "linear";
    case PotentialKind::Well: return "well";
    }
    return "?";
}

PotentialKind potential_kind_from_string(const std::string& name)
{
    for (auto k : {PotentialKind::Constant, PotentialKind::Linear, PotentialKind::Well}) {
        if (to_string(k) == name) return k;
    }
    throw std::invalid_argument("unknown potential '" + name + "'");
}

double PotentialSpec::value(const Point& x) const
{
    switch (kind) {
    case PotentialKind::Constant: return 0.0;
    case PotentialKind::Linear: return g * x[1];
    case PotentialKind::Well: {
        const double dx = x[0] - center[0];
        const double dy = x[1] - center[1];
        return 0.5 * g * (dx * dx + dy * dy);
    }
    }
    return 0.0;
}

FaceField PotentialSpec::gradient(const Grid& grid) const
{
    FaceField out(grid);
    if (kind == PotentialKind::Constant) return out;
    const double h = grid.h();
    for (int a = 0; a < grid.dim(); ++a) {
        auto comp = out.component(a);
        for (std::size_t f = 0; f < comp.size(); ++f) {
            Point lo = grid.face_center(a, f);
            Point hi = lo;
            lo[static_cast<std::size_t>(a)] -= 0.5 * h;
            hi[static_cast<std::size_t>(a)] += 0.5 * h;
            comp[f] = (value(hi) - value(lo)) / h;
        }
    }
    return out;
}

namespace {

void require_2d(const Grid& g)
{
    if (g.dim() != 2) throw std::invalid_argument("the fluid module supports d = 2 only");
}

// Index helpers for the 2D MAC layout: x-faces (N+1) x N, y-faces N x (N+1).
struct Mac {
    int n;
    std::size_t xf(int i, int j) const { return static_cast<std::size_t>(i) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j); }
    std::size_t yf(int i, int j) const { return static_cast<std::size_t>(i) * static_cast<std::size_t>(n + 1) + static_cast<std::size_t>(j); }
    std::size_t cell(int i, int j) const { return static_cast<std::size_t>(i) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j); }
};

// Tangential neighbour of a face value across a no-slip wall is the negative
// of the value itself.
double x_tangential(std::span<const double> u, const Mac& M, int i, int j)
{
    if (j < 0) return -u[M.xf(i, 0)];
    if (j >= M.n) return -u[M.xf(i, M.n - 1)];
    return u[M.xf(i, j)];
}

double y_tangential(std::span<const double> w, const Mac& M, int i, int j)
{
    if (i < 0) return -w[M.yf(0, j)];
    if (i >= M.n) return -w[M.yf(M.n - 1, j)];
    return w[M.yf(i, j)];
}

// Laplacian of the velocity on interior faces; boundary faces get 0.
FaceField velocity_laplacian(const FaceField& v)
{
    const Grid& g = v.grid();
    const Mac M{g.cells()};
    const int n = M.n;
    const double inv_h2 = 1.0 / (g.h() * g.h());
    FaceField out(g);
    const auto u = v.component(0);
    const auto w = v.component(1);
    auto lu = out.component(0);
    auto lw = out.component(1);
    for (int i = 1; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double c = u[M.xf(i, j)];
            lu[M.xf(i, j)] = (u[M.xf(i + 1, j)] + u[M.xf(i - 1, j)] + x_tangential(u, M, i, j + 1) +
                              x_tangential(u, M, i, j - 1) - 4.0 * c) * inv_h2;
        }
    }
    for (int i = 0; i < n; ++i) {
        for (int j = 1; j < n; ++j) {
            const double c = w[M.yf(i, j)];
            lw[M.yf(i, j)] = (w[M.yf(i, j + 1)] + w[M.yf(i, j - 1)] + y_tangential(w, M, i + 1, j) +
                              y_tangential(w, M, i - 1, j) - 4.0 * c) * inv_h2;
        }
    }
    return out;
}

double dot(const FaceField& a, const FaceField& b)
{
    CompensatedSum s;
    for (int ax = 0; ax < a.grid().dim(); ++ax) {
        const auto x = a.component(ax);
        const auto y = b.component(ax);
        for (std::size_t f = 0; f < x.size(); ++f) s.add(x[f] * y[f]);
    }
    return s.value() * a.grid().cell_volume();
}

// (A p)_c = div(G p) with G p = (p_R - p_L)/h on interior faces only.
void apply_pressure_operator(const std::vector<double>& p, std::vector<double>& out, int n, double inv_h2)
{
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const std::size_t c = static_cast<std::size_t>(i) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j);
            double s = 0.0;
            if (i > 0) s += p[c - static_cast<std::size_t>(n)] - p[c];
            if (i < n - 1) s += p[c + static_cast<std::size_t>(n)] - p[c];
            if (j > 0) s += p[c - 1] - p[c];
            if (j < n - 1) s += p[c + 1] - p[c];
            out[c] = s * inv_h2;
        }
    }
}

// Exact inverse of the Neumann operator -A on zero-mean data: the cosine
// transform (DCT-II) diagonalises it. Used as the CG preconditioner.
class NeumannInverse {
public:
    explicit NeumannInverse(int n) : n_(n), eig_(static_cast<std::size_t>(n) * static_cast<std::size_t>(n))
    {
        {
            std::lock_guard<std::mutex> lock(plan_mutex());
            auto& cache = plans();
            auto it = cache.find(n);
            if (it == cache.end()) {
                std::vector<double> a(eig_.size()), b(eig_.size());
                const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
                fftw_plan fwd = fftw_plan_r2r_2d(n, n, a.data(), b.data(), FFTW_REDFT10, FFTW_REDFT10, flags);
                fftw_plan bwd = fftw_plan_r2r_2d(n, n, a.data(), b.data(), FFTW_REDFT01, FFTW_REDFT01, flags);
                it = cache.emplace(n, std::make_pair(fwd, bwd)).first;
            }
            fwd_ = it->second.first;
            bwd_ = it->second.second;
        }
        std::vector<double> s(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k) {
            const double x = std::sin(std::numbers::pi * k / (2.0 * n));
            s[static_cast<std::size_t>(k)] = 4.0 * x * x;
        }
        for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l)
                eig_[static_cast<std::size_t>(k) * static_cast<std::size_t>(n) + static_cast<std::size_t>(l)] =
                    s[static_cast<std::size_t>(k)] + s[static_cast<std::size_t>(l)];
    }

    // out = (-A)^+ r for unit spacing; the caller scales by h^2.
    void apply(std::vector<double>& r, std::vector<double>& out) const
    {
        std::vector<double> hat(r.size());
        fftw_execute_r2r(fwd_, r.data(), hat.data());
        const double norm = 4.0 * static_cast<double>(n_) * static_cast<double>(n_);
        hat[0] = 0.0;
        for (std::size_t k = 1; k < hat.size(); ++k) hat[k] /= eig_[k] * norm;
        fftw_execute_r2r(bwd_, hat.data(), out.data());
    }

private:
    static std::mutex& plan_mutex()
    {
        static std::mutex m;
        return m;
    }
    static std::map<int, std::pair<fftw_plan, fftw_plan>>& plans()
    {
        static std::map<int, std::pair<fftw_plan, fftw_plan>> cache;
        return cache;
    }

    int n_;
    std::vector<double> eig_;
    fftw_plan fwd_ = nullptr;
    fftw_plan bwd_ = nullptr;
};

void remove_mean(std::vector<double>& x)
{
    CompensatedSum s;
    for (double v : x) s.add(v);
    const double mean = s.value() / static_cast<double>(x.size());
    for (double& v : x) v -= mean;
}

double dot(const std::vector<double>& a, const std::vector<double>& b)
{
    CompensatedSum s;
    for (std::size_t k = 0; k < a.size(); ++k) s.add(a[k] * b[k]);
    return s.value();
}

double max_abs(const std::vector<double>& a)
{
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

void apply_pressure_gradient(FaceField& v, const CellField& p, double dt)
{
    const Grid& g = v.grid();
    const Mac M{g.cells()};
    const int n = M.n;
    const double scale = dt / g.h();
    auto u = v.component(0);
    auto w = v.component(1);
    for (int i = 1; i < n; ++i)
        for (int j = 0; j < n; ++j) u[M.xf(i, j)] -= scale * (p[M.cell(i, j)] - p[M.cell(i - 1, j)]);
    for (int i = 0; i < n; ++i)
        for (int j = 1; j < n; ++j) w[M.yf(i, j)] -= scale * (p[M.cell(i, j)] - p[M.cell(i, j - 1)]);
}

double relative_div(const FaceField& v)
{
    const double vmax = v.max_abs();
    if (vmax == 0.0) return 0.0;
    return divergence_cells(v).max_abs() / vmax;
}

} // namespace

FluidState make_fluid_state(const Grid& grid)
{
    require_2d(grid);
    return FluidState{FaceField(grid), CellField(grid), 1.0};
}

ProjectionStats project(FaceField& v, CellField& pressure, double dt)
{
    const Grid& g = v.grid();
    require_2d(g);
    if (!(dt > 0.0)) throw std::invalid_argument("projection needs dt > 0");
    const int n = g.cells();
    const double inv_h2 = 1.0 / (g.h() * g.h());
    const std::size_t count = g.cell_count();

    // Boundary normal velocities are walls.
    {
        const Mac M{n};
        auto u = v.component(0);
        auto w = v.component(1);
        for (int j = 0; j < n; ++j) u[M.xf(0, j)] = u[M.xf(n, j)] = 0.0;
        for (int i = 0; i < n; ++i) w[M.yf(i, 0)] = w[M.yf(i, n)] = 0.0;
    }

    ProjectionStats stats;
    if (v.max_abs() == 0.0) return stats;

    const CellField divv = divergence_cells(v);
    std::vector<double> b(count);
    for (std::size_t c = 0; c < count; ++c) b[c] = -divv[c] / dt;  // solve (-A) p = -div v / dt
    remove_mean(b);

    std::vector<double> p(pressure.values().begin(), pressure.values().end());
    remove_mean(p);
    std::vector<double> Ap(count);
    std::vector<double> r(count);
    std::vector<double> d(count);
    const int max_iter = 20 * n;
    const double target = 0.1 * kProjectionTolerance;

    const NeumannInverse precond(n);
    const double h2 = g.h() * g.h();
    std::vector<double> z(count);
    auto precondition = [&]() {
        precond.apply(r, z);
        for (double& x : z) x *= h2;
    };

    for (int restart = 0; restart < 8; ++restart) {
        apply_pressure_operator(p, Ap, n, inv_h2);
        for (std::size_t c = 0; c < count; ++c) r[c] = b[c] + Ap[c];  // b - (-A) p
        remove_mean(r);
        precondition();
        d = z;
        double rz = dot(r, z);
        const double vscale = v.max_abs();
        while (stats.iterations < max_iter) {
            if (dt * max_abs(r) <= target * vscale) break;
            apply_pressure_operator(d, Ap, n, inv_h2);
            for (double& x : Ap) x = -x;
            const double dAd = dot(d, Ap);
            if (!(dAd > 0.0) || !(rz > 0.0)) break;
            const double alpha = rz / dAd;
            for (std::size_t c = 0; c < count; ++c) {
                p[c] += alpha * d[c];
                r[c] -= alpha * Ap[c];
            }
            precondition();
            const double rz_new = dot(r, z);
            const double beta = rz_new / rz;
            rz = rz_new;
            for (std::size_t c = 0; c < count; ++c) d[c] = z[c] + beta * d[c];
            ++stats.iterations;
        }
        FaceField trial = v;
        apply_pressure_gradient(trial, CellField(g, p), dt);
        stats.relative_divergence = relative_div(trial);
        if (stats.relative_divergence <= kProjectionTolerance) {
            v = std::move(trial);
            for (std::size_t c = 0; c < count; ++c) pressure[c] = p[c];
            return stats;
        }
        if (stats.iterations >= max_iter) break;
    }
    throw std::runtime_error("pressure projection did not reach the divergence tolerance");
}

double ns_stable_dt(const FluidState& s, double safety)
{
    const Grid& g = s.v.grid();
    const double h = g.h();
    const double d2 = 2.0 * g.dim();
    return safety / (d2 * s.viscosity / (h * h) + d2 * s.v.max_abs() / h);
}

double kinetic_energy(const FaceField& v) { return dot(v, v); }

double dissipation(const FaceField& v)
{
    const FaceField lap = velocity_laplacian(v);
    return -dot(v, lap);
}

double forcing_work(const FaceField& grad_phi, const CellField& rho, const FaceField& v)
{
    const Grid& g = rho.grid();
    const Mac M{g.cells()};
    const int n = M.n;
    CompensatedSum s;
    const auto gx = grad_phi.component(0);
    const auto gy = grad_phi.component(1);
    for (int i = 1; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const std::size_t f = M.xf(i, j);
            if (gx[f] == 0.0) continue;
            const double r = 0.5 * (rho[M.cell(i - 1, j)] + rho[M.cell(i, j)]);
            s.add(std::abs(gx[f]) * r * std::abs(v.component(0)[f]));
        }
    }
    for (int i = 0; i < n; ++i) {
        for (int j = 1; j < n; ++j) {
            const std::size_t f = M.yf(i, j);
            if (gy[f] == 0.0) continue;
            const double r = 0.5 * (rho[M.cell(i, j - 1)] + rho[M.cell(i, j)]);
            s.add(std::abs(gy[f]) * r * std::abs(v.component(1)[f]));
        }
    }
    return s.value() * g.cell_volume();
}

NsStepResult ns_step(const FluidState& s, const CellField& rho, const FaceField& grad_phi, double dt, double safety)
{
    const Grid& g = s.v.grid();
    require_2d(g);
    if (!(dt > 0.0)) throw std::invalid_argument("ns_step needs dt > 0");
    if (dt > ns_stable_dt(s, safety) * (1.0 + 1e-12)) throw SolverError(SolverError::Kind::Cfl, "fluid time step exceeds the stability bound");

    const Mac M{g.cells()};
    const int n = M.n;
    const double h = g.h();
    const auto u = s.v.component(0);
    const auto w = s.v.component(1);
    const FaceField lap = velocity_laplacian(s.v);
    const auto lu = lap.component(0);
    const auto lw = lap.component(1);
    const auto gx = grad_phi.component(0);
    const auto gy = grad_phi.component(1);

    NsStepResult out;
    out.state = s;
    auto nu_ = out.state.v.component(0);
    auto nw = out.state.v.component(1);

    for (int i = 1; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const std::size_t f = M.xf(i, j);
            const double c = u[f];
            const double vbar = 0.25 * (w[M.yf(i - 1, j)] + w[M.yf(i - 1, j + 1)] + w[M.yf(i, j)] + w[M.yf(i, j + 1)]);
            const double dudx = c > 0.0 ? (c - u[M.xf(i - 1, j)]) / h : (u[M.xf(i + 1, j)] - c) / h;
            const double dudy = vbar > 0.0 ? (c - x_tangential(u, M, i, j - 1)) / h : (x_tangential(u, M, i, j + 1) - c) / h;
            const double r = 0.5 * (rho[M.cell(i - 1, j)] + rho[M.cell(i, j)]);
            nu_[f] = c + dt * (s.viscosity * lu[f] - (c * dudx + vbar * dudy) - gx[f] * r);
        }
    }
    for (int i = 0; i < n; ++i) {
        for (int j = 1; j < n; ++j) {
            const std::size_t f = M.yf(i, j);
            const double c = w[f];
            const double ubar = 0.25 * (u[M.xf(i, j - 1)] + u[M.xf(i + 1, j - 1)] + u[M.xf(i, j)] + u[M.xf(i + 1, j)]);
            const double dwdy = c > 0.0 ? (c - w[M.yf(i, j - 1)]) / h : (w[M.yf(i, j + 1)] - c) / h;
            const double dwdx = ubar > 0.0 ? (c - y_tangential(w, M, i - 1, j)) / h : (y_tangential(w, M, i + 1, j) - c) / h;
            const double r = 0.5 * (rho[M.cell(i, j - 1)] + rho[M.cell(i, j)]);
            nw[f] = c + dt * (s.viscosity * lw[f] - (ubar * dwdx + c * dwdy) - gy[f] * r);
        }
    }
    out.projection = project(out.state.v, out.state.pressure, dt);
    return out;
}

double CoupledRun::max_divergence() const
{
    double m = 0.0;
    for (const auto& r : records) m = std::max(m, r.divergence);
    return m;
}

double CoupledRun::max_energy_ratio() const
{
    double m = 0.0;
    for (const auto& r : records) m = std::max(m, r.energy_ratio);
    return m;
}

bool CoupledRun::kinetic_monotone() const
{
    double prev = initial_kinetic;
    for (const auto& r : records) {
        if (r.kinetic > prev) return false;
        prev = r.kinetic;
    }
    return true;
}

CoupledRun coupled_solve(const Grid& grid, const CoupledConfig& cfg, const MollifiedForcing& forcing,
                         const FaceField& v0, const PotentialSpec& potential, const std::vector<double>& output_times)
{
    require_2d(grid);
    SolverConfig sc;
    sc.m = cfg.m;
    sc.epsilon = cfg.epsilon;
    sc.cfl_safety = cfg.cfl_safety;
    sc.t_end = cfg.t_end;
    sc.validate();
    if (!v0.grid().same_shape(grid)) throw std::invalid_argument("initial velocity grid differs");

    CoupledRun run;
    run.grid = grid;
    run.config = cfg;
    run.forcing_mass = forcing.total();

    FluidState fluid = make_fluid_state(grid);
    fluid.v = v0;
    project(fluid.v, fluid.pressure, 1.0);
    CellField rho = forcing.initial_state();
    run.initial_mass = integrate(rho);
    run.initial_kinetic = kinetic_energy(fluid.v);
    const FaceField grad_phi = potential.gradient(grid);

    std::vector<double> outputs = output_times;
    std::sort(outputs.begin(), outputs.end());
    std::size_t next_out = 0;
    auto snap = [&](double t) {
        while (next_out < outputs.size() && outputs[next_out] <= t) {
            run.rho_snapshots.push_back(Snapshot{outputs[next_out], rho});
            run.v_snapshots.emplace_back(outputs[next_out], fluid.v);
            ++next_out;
        }
    };
    snap(0.0);

    double t = 0.0;
    double kinetic = run.initial_kinetic;
    CompensatedSum diss_cum;
    CompensatedSum work_cum;
    std::size_t steps = 0;
    SliceStore store(cfg.max_stored_slices);
    CellField source(grid);
    while (t < cfg.t_end) {
        if (++steps > cfg.max_steps) throw SolverError(SolverError::Kind::StepLimit, "coupled step limit reached");
        double dt = std::min(stable_dt(rho, fluid.v, sc), ns_stable_dt(fluid, cfg.cfl_safety));
        if (cfg.max_dt > 0.0) dt = std::min(dt, cfg.max_dt);
        double target = cfg.t_end;
        if (next_out < outputs.size()) target = std::min(target, outputs[next_out]);
        dt = forcing_limited_dt(rho, fluid.v, forcing, t, std::min(dt, target - t), sc, source);
        double t_next = t + dt;
        if (!(t_next < target)) t_next = target;

        store.add(t, rho, dt);
        diss_cum.add(dt * dissipation(fluid.v));
        const double mass_before = integrate(rho);
        StepResult rs = step(rho, fluid.v, source, dt, sc);
        const double mass_after = integrate(rs.u);
        BudgetRecord b{t, dt, mass_before, mass_after, rs.forcing, rs.outflux};
        run.max_budget_residual = std::max(run.max_budget_residual, b.relative_residual());
        rho = std::move(rs.u);

        NsStepResult ns = ns_step(fluid, rho, grad_phi, dt, cfg.cfl_safety);
        const double kin_new = kinetic_energy(ns.state.v);
        const double diss_new = dissipation(ns.state.v);
        const double work = forcing_work(grad_phi, rho, ns.state.v);
        work_cum.add(dt * work);
        const double lhs = kin_new + 2.0 * dt * diss_new;
        const double rhs = kinetic + 2.0 * dt * work;

        CoupledRecord rec;
        rec.t = t_next;
        rec.mass = mass_after;
        rec.kinetic = kin_new;
        rec.dissipation_cum = diss_cum.value();
        rec.forcing_cum = work_cum.value();
        rec.divergence = ns.projection.relative_divergence;
        rec.energy_ratio = lhs == 0.0 ? 0.0 : (rhs == 0.0 ? std::numeric_limits<double>::infinity() : lhs / rhs);
        run.records.push_back(rec);

        fluid = std::move(ns.state);
        kinetic = kin_new;
        t = t_next;
        snap(t);
    }
    run.rho = store.finish(t, rho);
    run.final_fluid = std::move(fluid);
    return run;
}

EstimateReport verify_coupled_energy(const CoupledRun& run, double alpha)
{
    if (!(alpha > 0.0 && alpha < 2.0)) throw std::invalid_argument("alpha must lie in (0, 2)");
    double sup = run.initial_mass + run.initial_kinetic;
    for (const auto& r : run.records) sup = std::max(sup, r.mass + r.kinetic);
    const double diss = run.records.empty() ? 0.0 : run.records.back().dissipation_cum;
    const double grad = gradient_power(run.rho, 0.5 * run.config.m, alpha);
    const double lhs = sup + grad + diss;
    const double data = run.initial_mass + run.initial_kinetic + run.forcing_mass;

    EstimateReport r;
    r.id = "coupled_energy";
    r.mode = EstimateMode::RatioTrend;
    r.lhs = lhs;
    r.rhs = data;
    r.ratio = lhs == 0.0 ? 0.0 : (data == 0.0 ? std::numeric_limits<double>::infinity() : lhs / data);
    const double max_ratio = run.max_energy_ratio();
    const double max_div = run.max_divergence();
    r.params = {{"m", run.config.m},
                {"alpha", alpha},
                {"max_step_energy_ratio", max_ratio},
                {"max_relative_divergence", max_div},
                {"kinetic_monotone", run.kinetic_monotone() ? 1.0 : 0.0}};
    const bool steps_ok = max_ratio <= 1.0 + run.config.energy_slack;
    const bool div_ok = max_div <= kProjectionTolerance;
    r.pass = std::isfinite(r.ratio) && steps_ok && div_ok;
    if (!steps_ok) r.note = "kinetic-energy step inequality violated";
    else if (!div_ok) r.note = "projection tolerance violated";
    return r;
}

FaceField taylor_green(const Grid& grid, double amplitude)
{
    require_2d(grid);
    const double L = grid.length();
    const double k = 2.0 * std::numbers::pi / L;
    FaceField v(grid);
    auto u = v.component(0);
    for (std::size_t f = 0; f < u.size(); ++f) {
        const Point x = grid.face_center(0, f);
        u[f] = amplitude * std::sin(k * x[0]) * std::cos(k * x[1]);
    }
    auto w = v.component(1);
    for (std::size_t f = 0; f < w.size(); ++f) {
        const Point x = grid.face_center(1, f);
        w[f] = -amplitude * std::cos(k * x[0]) * std::sin(k * x[1]);
    }
    CellField p(grid);
    project(v, p, 1.0);
    return v;
}

} // namespace pmlab
