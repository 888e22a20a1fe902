#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "pmlab/classifier.hpp"
#include "pmlab/runner.hpp"
#include "pmlab/scenario.hpp"

using namespace pmlab;
namespace fs = std::filesystem;

namespace {

const Scenario& pick(const Suite& suite, const std::string& id)
{
    if (!id.empty()) return suite.find(id);
    if (suite.scenarios.size() != 1) throw std::invalid_argument("the config holds several scenarios; pass --scenario");
    return suite.scenarios.front();
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, sep);)
        if (!item.empty()) out.push_back(item);
    return out;
}

void write_text(const fs::path& path, const std::string& text)
{
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

void write_cells(const CellField& f, const fs::path& path)
{
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    write_csv(out, f);
}

std::string join_labels(const std::set<Admissibility>& labels)
{
    std::string s;
    for (auto a : labels) s += (s.empty() ? "" : "|") + to_string(a);
    return s.empty() ? "None" : s;
}

int cmd_classify(double m, int d, const std::string& q1, const std::string& q2, bool divfree)
{
    const ExponentPair e(parse_exponent(q1), parse_exponent(q2));
    std::cout << classification_json(m, d, e, divfree).dump(2) << "\n";
    return 0;
}

int cmd_region_sweep(double m, int d, bool divfree, int steps, double extent, const std::string& out_path)
{
    const auto samples = region_sweep(DiffusionParams{m, d}, divfree, steps, extent);
    std::ostringstream out;
    out << "inv_q1,inv_q2,valid,scaling_sum,plain,sigma,theorems\n";
    for (const auto& s : samples) {
        out << s.inv_q1 << "," << s.inv_q2 << "," << (s.valid ? 1 : 0) << ",";
        if (s.valid) {
            out << s.verdict.scaling_sum << "," << to_string(s.verdict.plain) << "," << to_string(s.verdict.sigma) << ","
                << join_labels(s.verdict.theorems);
        }
        else {
            out << ",,,";
        }
        out << "\n";
    }
    if (out_path.empty()) std::cout << out.str();
    else write_text(out_path, out.str());
    return 0;
}

int cmd_solve(const std::string& config, const std::string& id, int cells, const fs::path& out_dir)
{
    const Suite suite = load_suite(config);
    const Scenario& s = pick(suite, id);
    const int n = cells > 0 ? cells : s.ladder.back();
    const Trajectory traj = solve_scenario(s, n);
    for (std::size_t k = 0; k < traj.snapshots.size(); ++k) write_cells(traj.snapshots[k].field, out_dir / ("u_" + std::to_string(k) + ".csv"));
    write_budget_csv(traj, out_dir / "budget.csv");
    save_trajectory(out_dir / "trajectory.pmlt", traj, s.source);
    nlohmann::json meta;
    meta["scenario"] = s.id;
    meta["cells"] = n;
    meta["dim"] = s.domain.dim;
    meta["length"] = s.domain.length;
    meta["boundary"] = to_string(s.domain.boundary);
    meta["m"] = s.solver.m;
    meta["epsilon"] = s.solver.epsilon;
    meta["t_end"] = traj.final_time;
    meta["steps"] = traj.steps;
    meta["initial_mass"] = traj.initial_mass;
    meta["final_mass"] = integrate(traj.final_state());
    meta["forcing_cum"] = traj.cumulative_forcing();
    meta["outflux_cum"] = traj.cumulative_outflux();
    meta["max_budget_residual"] = traj.max_budget_residual();
    nlohmann::json times = nlohmann::json::array();
    for (const auto& snap : traj.snapshots) times.push_back(snap.time);
    meta["snapshot_times"] = times;
    if (const auto err = oracle_error(s, traj)) meta["oracle_error"] = *err;
    write_text(out_dir / "run.json", meta.dump(2) + "\n");
    std::cout << meta.dump(2) << "\n";
    return 0;
}

int cmd_verify(const std::string& traj_path, const std::string& which)
{
    const LoadedTrajectory loaded = load_trajectory(traj_path);
    const Scenario s = parse_scenario(loaded.scenario_text, traj_path);
    std::vector<EstimateRequest> reqs;
    if (which == "all") {
        reqs = s.estimates.empty() ? default_estimates() : s.estimates;
    }
    else {
        const auto defaults = default_estimates();
        for (const auto& id : split(which, ',')) {
            if (!known_estimate(id)) throw std::invalid_argument("unknown estimate '" + id + "'");
            bool found = false;
            for (const auto& r : s.estimates) {
                if (r.id == id) {
                    reqs.push_back(r);
                    found = true;
                }
            }
            if (!found)
                for (const auto& r : defaults)
                    if (r.id == id) reqs.push_back(r);
        }
    }
    const DriftSpec drift = s.drift_for(loaded.traj.grid.cells());
    const auto reports = evaluate_all(reqs, EstimateInput{loaded.traj, s.measure, drift});
    nlohmann::json out = nlohmann::json::array();
    bool failed = false;
    for (const auto& r : reports) {
        out.push_back(to_json(r));
        failed = failed || (r.mode == EstimateMode::Literal && r.applicable && !r.pass);
    }
    std::cout << out.dump(2) << "\n";
    return failed ? 1 : 0;
}

int cmd_couple(const std::string& config, const std::string& id, int cells, const fs::path& out_dir)
{
    const Suite suite = load_suite(config);
    const Scenario& s = pick(suite, id);
    if (!s.couple) throw std::invalid_argument("scenario '" + s.id + "' has no couple section");
    const int n = cells > 0 ? cells : s.ladder.back();
    const CoupledRun run = couple_scenario(s, n);
    write_energy_csv(run, out_dir / "energy.csv");
    for (std::size_t k = 0; k < run.rho_snapshots.size(); ++k) write_cells(run.rho_snapshots[k].field, out_dir / ("rho_" + std::to_string(k) + ".csv"));
    for (std::size_t k = 0; k < run.v_snapshots.size(); ++k) write_velocity_csv(run.v_snapshots[k].second, out_dir / ("v_" + std::to_string(k) + ".csv"));
    nlohmann::json reports = nlohmann::json::array();
    bool failed = false;
    for (double a : s.couple->alphas) {
        const EstimateReport r = verify_coupled_energy(run, a);
        failed = failed || !r.pass;
        reports.push_back(to_json(r));
    }
    const EstimateReport mass = verify_coupled_mass(run);
    failed = failed || !mass.pass;
    reports.push_back(to_json(mass));
    write_text(out_dir / "report.json", reports.dump(2) + "\n");
    std::cout << reports.dump(2) << "\n";
    return failed ? 1 : 0;
}

int cmd_convergence(const std::string& config, const std::string& id, const std::string& ladder_text, const fs::path& out_dir)
{
    const Suite suite = load_suite(config);
    const Scenario& s = pick(suite, id);
    std::vector<int> ladder = s.ladder;
    if (!ladder_text.empty()) {
        ladder.clear();
        for (const auto& item : split(ladder_text, ',')) ladder.push_back(std::stoi(item));
    }
    const auto rows = convergence_study(s, ladder);
    const fs::path path = out_dir / (s.id + "_convergence.csv");
    write_convergence_csv(rows, path);
    std::ifstream in(path);
    std::cout << in.rdbuf();
    return 0;
}

int cmd_suite(const std::string& config, const fs::path& out_dir, int workers)
{
    const Suite suite = load_suite(config);
    RunOptions opt;
    opt.out_dir = out_dir;
    opt.workers = workers;
    const SuiteResult res = run_suite(suite, opt);
    for (const auto& r : res.scenarios) {
        std::printf("%-32s %s\n", r.id.c_str(), !r.error.empty() ? "ERROR" : (r.literal_failure() ? "FAIL" : "ok"));
        if (!r.error.empty()) std::printf("  %s\n", r.error.c_str());
    }
    std::printf("report: %s\n", (out_dir / "report.json").string().c_str());
    return res.exit_status;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"pmlab: porous-medium equations with drift and measure data"};
    app.require_subcommand(1);

    double m = 1.5;
    int d = 2;
    std::string q1 = "inf";
    std::string q2 = "inf";
    bool divfree = false;
    auto* classify_cmd = app.add_subcommand("classify", "Classify a drift exponent pair");
    classify_cmd->add_option("--m", m, "Diffusion exponent")->required();
    classify_cmd->add_option("--d", d, "Space dimension")->required();
    classify_cmd->add_option("--q1", q1, "Space exponent (number or inf)")->required();
    classify_cmd->add_option("--q2", q2, "Time exponent (number or inf)")->required();
    classify_cmd->add_flag("--divfree", divfree, "Drift is divergence-free");

    int steps = 60;
    double extent = 1.5;
    std::string csv_out;
    auto* sweep_cmd = app.add_subcommand("region-sweep", "Sweep (1/q1, 1/q2) and emit verdicts as CSV");
    sweep_cmd->add_option("--m", m, "Diffusion exponent")->required();
    sweep_cmd->add_option("--d", d, "Space dimension")->required();
    sweep_cmd->add_flag("--divfree", divfree, "Drift is divergence-free");
    sweep_cmd->add_option("--steps", steps, "Intervals per axis")->check(CLI::PositiveNumber);
    sweep_cmd->add_option("--extent", extent, "Upper end of each reciprocal axis")->check(CLI::PositiveNumber);
    sweep_cmd->add_option("--out", csv_out, "CSV path (stdout if omitted)");

    std::string config;
    std::string scenario;
    std::string out_dir = "out";
    int cells = 0;
    auto add_run_options = [&](CLI::App* cmd) {
        cmd->add_option("--config", config, "Scenario file (YAML, schema 1)")->required()->check(CLI::ExistingFile);
        cmd->add_option("--scenario", scenario, "Scenario id (needed when the file holds several)");
        cmd->add_option("--out", out_dir, "Output directory");
    };
    auto* solve_cmd = app.add_subcommand("solve", "Run one scenario on one grid");
    add_run_options(solve_cmd);
    solve_cmd->add_option("--cells", cells, "Cells per axis (default: finest ladder entry)");

    std::string traj_path;
    std::string estimates = "all";
    auto* verify_cmd = app.add_subcommand("verify", "Evaluate estimates on a trajectory dump");
    verify_cmd->add_option("--traj", traj_path, "Trajectory dump written by solve")->required()->check(CLI::ExistingFile);
    verify_cmd->add_option("--estimates", estimates, "all or a comma-separated id list");

    auto* couple_cmd = app.add_subcommand("couple", "Run a coupled density/Navier-Stokes scenario");
    add_run_options(couple_cmd);
    couple_cmd->add_option("--cells", cells, "Cells per axis (default: finest ladder entry)");

    std::string ladder;
    auto* conv_cmd = app.add_subcommand("convergence", "Oracle errors and estimate ratios over a ladder");
    add_run_options(conv_cmd);
    conv_cmd->add_option("--ladder", ladder, "Comma-separated cell counts (default: the scenario's ladder)");

    int workers = 0;
    auto* suite_cmd = app.add_subcommand("suite", "Run every scenario of a suite");
    suite_cmd->add_option("--config", config, "Suite file (YAML, schema 1)")->required()->check(CLI::ExistingFile);
    suite_cmd->add_option("--out", out_dir, "Output directory");
    suite_cmd->add_option("--workers", workers, "Concurrent scenarios (default: PMLAB_WORKERS or hardware)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*classify_cmd) return cmd_classify(m, d, q1, q2, divfree);
        if (*sweep_cmd) return cmd_region_sweep(m, d, divfree, steps, extent, csv_out);
        if (*solve_cmd) return cmd_solve(config, scenario, cells, out_dir);
        if (*verify_cmd) return cmd_verify(traj_path, estimates);
        if (*couple_cmd) return cmd_couple(config, scenario, cells, out_dir);
        if (*conv_cmd) return cmd_convergence(config, scenario, ladder, out_dir);
        if (*suite_cmd) return cmd_suite(config, out_dir, workers);
    }
    catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
