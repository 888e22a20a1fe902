#include "pmlab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace pmlab {

void SolverConfig::validate() const
{
    if (!(m > 0.0)) throw SolverError(SolverError::Kind::Config, "m must be positive");
    if (!(epsilon >= 0.0)) throw SolverError(SolverError::Kind::Config, "epsilon must be nonnegative");
    if (m < 1.0 && !(epsilon > 0.0))
        throw SolverError(SolverError::Kind::Config, "fast diffusion (m < 1) requires epsilon > 0");
    if (!(cfl_safety > 0.0 && cfl_safety <= 1.0)) throw SolverError(SolverError::Kind::Config, "cfl_safety must lie in (0, 1]");
    if (!(t_end > 0.0)) throw SolverError(SolverError::Kind::Config, "t_end must be positive");
    if (max_stored_slices < 2) throw SolverError(SolverError::Kind::Config, "max_stored_slices must be >= 2");
    for (double t : output_times) {
        if (t < 0.0 || t > t_end) throw SolverError(SolverError::Kind::Config, "output time outside [0, t_end]");
    }
}

double phi_eps(double s, double m, double eps)
{
    if (m == 1.0) return s;
    return std::pow(s + eps, m) - std::pow(eps, m);
}

double phi_eps_prime(double s, double m, double eps)
{
    if (m == 1.0) return 1.0;
    const double base = s + eps;
    if (base == 0.0) return m < 1.0 ? std::numeric_limits<double>::infinity() : 0.0;
    return m * std::pow(base, m - 1.0);
}

double stable_dt(const CellField& u, const FaceField& V, const SolverConfig& cfg)
{
    const Grid& g = u.grid();
    double dmax = 0.0;
    if (g.boundary() == Boundary::DirichletZero) dmax = phi_eps_prime(0.0, cfg.m, cfg.epsilon);
    if (cfg.m > 1.0) {
        dmax = std::max(dmax, phi_eps_prime(std::max(u.max_abs(), 0.0), cfg.m, cfg.epsilon));
    }
    else if (cfg.m < 1.0) {
        dmax = std::max(dmax, phi_eps_prime(std::max(u.min(), 0.0), cfg.m, cfg.epsilon));
    }
    else {
        dmax = 1.0;
    }
    const double h = g.h();
    const double d2 = 2.0 * g.dim();
    const double rate = d2 * dmax / (h * h) + d2 * V.max_abs() / h;
    if (rate == 0.0) return std::numeric_limits<double>::infinity();
    return cfg.cfl_safety / rate;
}

StepResult step(const CellField& u, const FaceField& V, const CellField& source, double dt, const SolverConfig& cfg)
{
    const Grid& g = u.grid();
    if (!(dt > 0.0)) throw SolverError(SolverError::Kind::Cfl, "time step must be positive");
    const double limit = stable_dt(u, V, cfg);
    if (dt > limit * (1.0 + 1e-12)) throw SolverError(SolverError::Kind::Cfl, "time step exceeds the stability bound");

    const std::size_t count = g.cell_count();
    std::vector<double> phi(count);
    for (std::size_t c = 0; c < count; ++c) phi[c] = phi_eps(u[c], cfg.m, cfg.epsilon);
    const double phi_ghost = 0.0;  // phi_eps(0) = 0

    const bool dirichlet = g.boundary() == Boundary::DirichletZero;
    const int n = g.cells();
    const double h = g.h();
    std::vector<double> acc(count, 0.0);  // sum of outward face fluxes per cell
    CompensatedSum out_flux;

    for (int a = 0; a < g.dim(); ++a) {
        const auto vel = V.component(a);
        for_each_line(g, a, [&](std::size_t cb, std::size_t fb, std::size_t st) {
            for (int k = 0; k <= n; ++k) {
                const auto kk = static_cast<std::size_t>(k);
                const bool lower = k == 0;
                const bool upper = k == n;
                if ((lower || upper) && !dirichlet) continue;
                const double uL = lower ? 0.0 : u[cb + (kk - 1) * st];
                const double uR = upper ? 0.0 : u[cb + kk * st];
                const double pL = lower ? phi_ghost : phi[cb + (kk - 1) * st];
                const double pR = upper ? phi_ghost : phi[cb + kk * st];
                const double v = vel[fb + kk * st];
                const double flux = -(pR - pL) / h + (v > 0.0 ? v * uL : v * uR);
                if (!lower) acc[cb + (kk - 1) * st] += flux;
                if (!upper) acc[cb + kk * st] -= flux;
                if (lower) out_flux.add(-flux);
                if (upper) out_flux.add(flux);
            }
        });
    }

    StepResult r;
    r.u = CellField(g);
    const double ratio = dt / h;
    double umax = 0.0;
    for (std::size_t c = 0; c < count; ++c) {
        r.u[c] = u[c] - ratio * acc[c] + source[c];
        umax = std::max(umax, std::max(u[c], r.u[c]));
    }
    for (std::size_t c = 0; c < count; ++c) {
        if (r.u[c] < 0.0) {
            if (r.u[c] < -1e-14 * umax) throw SolverError(SolverError::Kind::Negativity, "negative density produced by step");
            r.u[c] = 0.0;
        }
    }
    r.forcing = integrate(source);
    r.outflux = dt * out_flux.value() * g.face_area();
    return r;
}

double BudgetRecord::relative_residual() const
{
    const double scale = std::abs(mass_before) + std::abs(forcing) + std::abs(outflux);
    const double res = std::abs(mass_after - mass_before - forcing + outflux);
    if (scale == 0.0) return res;
    return res / scale;
}

double Trajectory::max_budget_residual() const
{
    double r = 0.0;
    for (const auto& b : budget) r = std::max(r, b.relative_residual());
    return r;
}

double Trajectory::cumulative_forcing() const
{
    CompensatedSum s;
    for (const auto& b : budget) s.add(b.forcing);
    return s.value();
}

double Trajectory::cumulative_outflux() const
{
    CompensatedSum s;
    for (const auto& b : budget) s.add(b.outflux);
    return s.value();
}

const Snapshot* Trajectory::snapshot_at(double t) const
{
    for (const auto& s : snapshots) {
        if (std::abs(s.time - t) <= 1e-12 * std::max(1.0, std::abs(t))) return &s;
    }
    return nullptr;
}

namespace {

// Accumulates steps into slices of `stride` steps each and halves the
// resolution when the store is full.
} // namespace

Trajectory solve(const Grid& grid, const SolverConfig& cfg, const MollifiedForcing& forcing, const DriftSpec& drift,
                 const std::optional<CellField>& initial)
{
    cfg.validate();
    if (!forcing.grid().same_shape(grid)) throw SolverError(SolverError::Kind::Config, "forcing grid differs from solver grid");
    if (cfg.t_end > forcing.final_time() * (1.0 + 1e-12))
        throw SolverError(SolverError::Kind::Config, "t_end exceeds the forcing horizon");

    CellField u = initial ? *initial : forcing.initial_state();
    if (!u.grid().same_shape(grid)) throw SolverError(SolverError::Kind::Config, "initial state grid differs from solver grid");
    if (u.min() < 0.0 || !u.all_finite()) throw SolverError(SolverError::Kind::Config, "initial state must be finite and nonnegative");

    FaceField V = drift.sample(grid, 0.0);
    auto check_drift = [&](const FaceField& field) {
        if (!field.all_finite()) throw SolverError(SolverError::Kind::Drift, "drift field is not finite");
        if (drift.divergence_free() && relative_divergence(field) > kDivergenceFreeTolerance)
            throw SolverError(SolverError::Kind::Drift, "drift flagged divergence-free fails the discrete divergence check");
    };
    check_drift(V);

    std::vector<double> outputs = cfg.output_times;
    std::sort(outputs.begin(), outputs.end());
    outputs.erase(std::unique(outputs.begin(), outputs.end()), outputs.end());
    std::size_t next_out = 0;

    Trajectory traj;
    traj.grid = grid;
    traj.m = cfg.m;
    traj.final_time = cfg.t_end;
    traj.initial_mass = integrate(u);

    auto take_snapshots = [&](double t) {
        while (next_out < outputs.size() && outputs[next_out] <= t) {
            traj.snapshots.push_back(Snapshot{outputs[next_out], u});
            ++next_out;
        }
    };
    take_snapshots(0.0);

    SliceStore store(cfg.max_stored_slices);
    double t = 0.0;
    double mass = traj.initial_mass;
    CellField source(grid);
    while (t < cfg.t_end) {
        if (traj.steps >= cfg.max_steps) throw SolverError(SolverError::Kind::StepLimit, "step limit reached before t_end");
        if (drift.time_dependent() && traj.steps > 0) {
            V = drift.sample(grid, t);
            check_drift(V);
        }
        double target = cfg.t_end;
        if (next_out < outputs.size()) target = std::min(target, outputs[next_out]);
        double dt = stable_dt(u, V, cfg);
        if (cfg.max_dt > 0.0) dt = std::min(dt, cfg.max_dt);
        dt = forcing_limited_dt(u, V, forcing, t, std::min(dt, target - t), cfg, source);
        double t_next = t + dt;
        if (!(t_next < target)) t_next = target;
        StepResult r = step(u, V, source, dt, cfg);

        BudgetRecord rec;
        rec.t = t;
        rec.dt = dt;
        rec.mass_before = mass;
        rec.mass_after = integrate(r.u);
        rec.forcing = r.forcing;
        rec.outflux = r.outflux;
        traj.budget.push_back(rec);

        store.add(t, u, dt);
        u = std::move(r.u);
        mass = rec.mass_after;
        t = t_next;
        ++traj.steps;
        take_snapshots(t);
    }
    traj.slices = store.finish(t, u);
    return traj;
}

namespace {

struct Term {
    std::size_t index;
    double coeff;
};

// Terms of (1/h) int_a^{a+h} of the piecewise-linear interpolant.
std::vector<Term> window_terms(const std::vector<double>& times, double a, double h)
{
    std::vector<Term> terms;
    const double b = a + h;
    for (std::size_t j = 0; j + 1 < times.size(); ++j) {
        const double lo = std::max(a, times[j]);
        const double hi = std::min(b, times[j + 1]);
        if (hi <= lo) continue;
        const double span = times[j + 1] - times[j];
        const double theta = (0.5 * (lo + hi) - times[j]) / span;
        terms.push_back({j, (hi - lo) * (1.0 - theta) / h});
        terms.push_back({j + 1, (hi - lo) * theta / h});
    }
    return terms;
}

void check_steklov(const std::vector<double>& times, double h)
{
    if (times.size() < 2) throw std::invalid_argument("Steklov average needs at least two samples");
    for (std::size_t k = 1; k < times.size(); ++k) {
        if (!(times[k] > times[k - 1])) throw std::invalid_argument("sample times must be strictly increasing");
    }
    if (!(h > 0.0 && h < times.back() - times.front())) throw std::invalid_argument("Steklov width must lie in (0, T)");
}

} // namespace

std::vector<double> steklov(const std::vector<double>& times, const std::vector<double>& values, double h)
{
    if (times.size() != values.size()) throw std::invalid_argument("times and values differ in length");
    check_steklov(times, h);
    const double T = times.back();
    std::vector<double> out(times.size(), 0.0);
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (times[k] + h > T * (1.0 + 1e-14)) continue;
        double s = 0.0;
        for (const auto& term : window_terms(times, times[k], h)) s += term.coeff * values[term.index];
        out[k] = s;
    }
    return out;
}

SampledField steklov(const SampledField& f, double h)
{
    std::vector<double> times;
    times.reserve(f.size());
    for (const auto& s : f) times.push_back(s.time);
    check_steklov(times, h);
    const double T = times.back();
    SampledField out;
    out.reserve(f.size());
    for (std::size_t k = 0; k < f.size(); ++k) {
        TimeSlice s{f[k].time, f[k].weight, CellField(f[k].field.grid())};
        if (times[k] + h <= T * (1.0 + 1e-14)) {
            for (const auto& term : window_terms(times, times[k], h)) {
                const auto& src = f[term.index].field;
                for (std::size_t c = 0; c < src.size(); ++c) s.field[c] += term.coeff * src[c];
            }
        }
        out.push_back(std::move(s));
    }
    return out;
}

double forcing_limited_dt(const CellField& u, const FaceField& V, const MollifiedForcing& forcing, double t, double dt,
                          const SolverConfig& cfg, CellField& source)
{
    CellField after(u.grid());
    for (int iter = 0; iter < 64; ++iter) {
        std::fill(source.values().begin(), source.values().end(), 0.0);
        if (forcing.accumulate(t, t + dt, source) == 0.0) return dt;
        for (std::size_t c = 0; c < u.size(); ++c) after[c] = u[c] + source[c];
        const double limit = stable_dt(after, V, cfg);
        if (dt <= limit) return dt;
        dt = std::max(limit, 0.25 * dt);
    }
    throw SolverError(SolverError::Kind::Cfl, "no stable step resolves the forcing");
}

void SliceStore::add(double t, const CellField& u, double dt)
{
    if (count_ == 0) {
        pending_ = TimeSlice{t, 0.0, CellField(u.grid())};
    }
    auto acc = pending_.field.values();
    const auto src = u.values();
    for (std::size_t c = 0; c < acc.size(); ++c) acc[c] += dt * src[c];
    pending_.weight += dt;
    if (++count_ == stride_) flush();
}

SampledField SliceStore::finish(double t, const CellField& u)
{
    if (count_ > 0) flush();
    slices_.push_back(TimeSlice{t, 0.0, u});
    return std::move(slices_);
}

void SliceStore::flush()
{
    // pending_ holds the dt-weighted sum; store the mean
    if (pending_.weight > 0.0)
        for (double& v : pending_.field.values()) v /= pending_.weight;
    slices_.push_back(std::move(pending_));
    count_ = 0;
    if (slices_.size() < capacity_) return;
    SampledField merged;
    merged.reserve(slices_.size() / 2 + 1);
    for (std::size_t k = 0; k < slices_.size(); k += 2) {
        TimeSlice s = std::move(slices_[k]);
        if (k + 1 < slices_.size()) {
            const TimeSlice& b = slices_[k + 1];
            const double w = s.weight + b.weight;
            if (w > 0.0) {
                auto a = s.field.values();
                const auto bv = b.field.values();
                for (std::size_t c = 0; c < a.size(); ++c) a[c] = (s.weight * a[c] + b.weight * bv[c]) / w;
            }
            s.weight = w;
        }
        merged.push_back(std::move(s));
    }
    slices_ = std::move(merged);
    stride_ *= 2;
}

} // namespace pmlab
