#pragma once

// Explicit conservative finite-volume scheme for
//   u_t - Laplace phi_eps(u) + div(u V) = mu_n,  phi_eps(s) = (s + eps)^m - eps^m,
// with upwind advective fluxes on a MAC grid.

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pmlab/drift.hpp"
#include "pmlab/grid.hpp"
#include "pmlab/measure.hpp"
#include "pmlab/mixed_norm.hpp"

namespace pmlab {

struct SolverConfig {
    double m = 1.0;
    double epsilon = 0.0;
    double cfl_safety = 0.9;
    double t_end = 1.0;
    std::size_t max_steps = 20'000'000;
    double max_dt = 0.0;  // 0: no cap beyond stability
    std::vector<double> output_times;
    std::size_t max_stored_slices = 512;

    void validate() const;
};

double phi_eps(double s, double m, double eps);
double phi_eps_prime(double s, double m, double eps);

class SolverError : public std::runtime_error {
public:
    enum class Kind { Cfl, Negativity, StepLimit, Drift, Config };
    SolverError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

struct StepResult {
    CellField u;
    double forcing = 0.0;  // integral of the source increment
    double outflux = 0.0;  // dt * outward boundary flux
};

// safety / (2d max phi'/h^2 + 2d max|V|/h); infinite when both rates vanish.
double stable_dt(const CellField& u, const FaceField& V, const SolverConfig& cfg);

// Largest dt' <= dt for which dt' is also stable at u + int_t^{t+dt'} mu_n,
// so a forcing switching on over a quiet state is resolved in time. Leaves
// that increment in `source`.
double forcing_limited_dt(const CellField& u, const FaceField& V, const MollifiedForcing& forcing, double t, double dt,
                          const SolverConfig& cfg, CellField& source);

// One explicit step. `source` holds the time-integrated forcing over the step
// (dt times the mean of mu_n), so a zero field means no forcing.
StepResult step(const CellField& u, const FaceField& V, const CellField& source, double dt, const SolverConfig& cfg);

struct BudgetRecord {
    double t = 0.0;
    double dt = 0.0;
    double mass_before = 0.0;
    double mass_after = 0.0;
    double forcing = 0.0;
    double outflux = 0.0;

    // |after - before - forcing + outflux| relative to the magnitudes involved.
    double relative_residual() const;
};

struct Snapshot {
    double time = 0.0;
    CellField field;
};

// Bounded store of time slices. Each stored slice is labelled by its left
// endpoint and holds the dt-weighted mean of the step states over its span, so
// the slice sum is the left-endpoint quadrature over solver steps up to
// O(span^2). Once `capacity` slices exist, neighbours merge pairwise.
class SliceStore {
public:
    explicit SliceStore(std::size_t capacity) : capacity_(capacity) {}

    // State u at the start of a step of length dt.
    void add(double t, const CellField& u, double dt);

    // Appends the final state with weight 0 and hands the slices over.
    SampledField finish(double t, const CellField& u);

private:
    void flush();

    std::size_t capacity_;
    std::size_t stride_ = 1;
    std::size_t count_ = 0;
    TimeSlice pending_;
    SampledField slices_;
};

struct Trajectory {
    Grid grid;
    double m = 1.0;
    double final_time = 0.0;
    SampledField slices;  // left-endpoint weights; the final slice has weight 0
    std::vector<Snapshot> snapshots;
    std::vector<BudgetRecord> budget;
    double initial_mass = 0.0;
    std::size_t steps = 0;

    double max_budget_residual() const;
    double cumulative_forcing() const;
    double cumulative_outflux() const;
    const CellField& final_state() const { return slices.back().field; }
    const Snapshot* snapshot_at(double t) const;
};

// Runs to cfg.t_end. The initial state is `initial` when given, otherwise the
// space-mollified initial measure of `forcing`.
Trajectory solve(const Grid& grid, const SolverConfig& cfg, const MollifiedForcing& forcing, const DriftSpec& drift,
                 const std::optional<CellField>& initial = std::nullopt);

// Forward Steklov average [f]_h(t) = (1/h) int_t^{t+h} f for t <= T - h and 0
// beyond, with f interpolated linearly between samples. Evaluated at the
// sample times.
std::vector<double> steklov(const std::vector<double>& times, const std::vector<double>& values, double h);

// The same average applied cell by cell to a sampled field; weights are kept.
SampledField steklov(const SampledField& f, double h);

} // namespace pmlab
