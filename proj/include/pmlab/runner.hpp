#pragma once

// Scenario orchestration: classify, solve over the refinement ladder, verify,
// and couple where requested; report bundles, CSV series and trajectory dumps.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "pmlab/estimates.hpp"
#include "pmlab/fluid.hpp"
#include "pmlab/scenario.hpp"
#include "pmlab/solver.hpp"

namespace pmlab {

// Worker cap from PMLAB_WORKERS, else the hardware concurrency (at least 1).
int worker_count();

// Classifier verdict for the scenario's drift claim as JSON.
nlohmann::json classification_json(double m, int d, const ExponentPair& e, bool divergence_free);

// The scenario's density run on an n-cell grid.
Trajectory solve_scenario(const Scenario& s, int n);

// The scenario's coupled run on an n-cell grid; requires a couple section.
CoupledRun couple_scenario(const Scenario& s, int n);

// L1 distance of the final state to the scenario's closed-form solution.
std::optional<double> oracle_error(const Scenario& s, const Trajectory& traj);

// Evaluates one request. Invalid parameters for this trajectory produce a
// NotApplicable report carrying the reason.
EstimateReport evaluate(const EstimateRequest& req, const EstimateInput& in);

std::vector<EstimateReport> evaluate_all(const std::vector<EstimateRequest>& reqs, const EstimateInput& in);

struct GridRun {
    int cells = 0;
    double runtime = 0.0;  // seconds; kept out of the report bundle
    std::size_t steps = 0;
    double budget_residual = 0.0;
    std::optional<double> oracle_error;
    std::vector<EstimateReport> reports;
    std::vector<EstimateReport> coupled;  // one per alpha, then coupled_mass
    double coupled_runtime = 0.0;
};

struct ScenarioResult {
    std::string id;
    nlohmann::json classification;
    std::vector<GridRun> grids;
    std::vector<EstimateReport> combined;          // per request, over the ladder
    std::vector<EstimateReport> coupled_combined;  // per alpha, then coupled_mass
    std::string error;                             // solver or setup failure
    bool coupled_step_failure = false;             // some grid broke the kinetic-energy step check

    // An applicable Literal check failed (including the coupled step check).
    bool literal_failure() const;
    nlohmann::json to_json() const;
};

struct RunOptions {
    std::filesystem::path out_dir;  // empty: no files written
    int workers = 0;                // 0: worker_count()
    bool strict = true;             // off: E_V reports for inadmissible drifts are dropped, not flagged
};

ScenarioResult run_scenario(const Scenario& s, const RunOptions& opt);

struct SuiteResult {
    std::vector<ScenarioResult> scenarios;  // ordered by id
    nlohmann::json bundle;
    int exit_status = 0;  // nonzero iff a Literal check failed or a run errored
};

// Runs scenarios concurrently; writes <out>/report.json and per-scenario CSVs.
SuiteResult run_suite(const Suite& suite, const RunOptions& opt);

struct ConvergenceRow {
    int cells = 0;
    std::optional<double> oracle_error;
    std::vector<std::pair<std::string, double>> ratios;  // report label, ratio
    double runtime = 0.0;
};

std::vector<ConvergenceRow> convergence_study(const Scenario& s, const std::vector<int>& ladder);

void write_convergence_csv(const std::vector<ConvergenceRow>& rows, const std::filesystem::path& path);

// Label distinguishing repeated estimate ids: id plus sorted parameters.
std::string report_label(const EstimateRequest& req);

// Mass-budget CSV: t, mass, forcing_cum, outflux_cum.
void write_budget_csv(const Trajectory& traj, const std::filesystem::path& path);

// Energy-budget CSV: t, mass, kinetic, dissipation_cum, forcing_cum, divergence, energy_ratio.
void write_energy_csv(const CoupledRun& run, const std::filesystem::path& path);

// Face velocity CSV: axis, i, j, value (face indices in the MAC layout).
void write_velocity_csv(const FaceField& v, const std::filesystem::path& path);

// Sup of the density mass against rho0 mass + mu(Omega_T), Literal.
EstimateReport verify_coupled_mass(const CoupledRun& run);

// Trajectory dump: "PMLT", u64 header length, JSON header (grid, budget,
// slice times and weights, scenario text), then every slice's cell values as
// little-endian f64.
void save_trajectory(const std::filesystem::path& path, const Trajectory& traj, const std::string& scenario_text);

struct LoadedTrajectory {
    Trajectory traj;
    std::string scenario_text;
};

LoadedTrajectory load_trajectory(const std::filesystem::path& path);

} // namespace pmlab
