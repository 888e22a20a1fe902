#include "pmlab/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "pmlab/classifier.hpp"
#include "pmlab/reference.hpp"

namespace pmlab {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string short_fmt(double v)
{
    if (v == kInfinity) return "inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::ofstream open_out(const std::filesystem::path& path)
{
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

nlohmann::json number_or_null(double v)
{
    if (std::isfinite(v)) return v;
    return nullptr;
}

double param(const EstimateRequest& req, const std::string& key, double fallback)
{
    const auto it = req.params.find(key);
    return it == req.params.end() ? fallback : it->second;
}

EstimateMode mode_of(const std::string& id)
{
    return id == "Estimate01" || id == "Estimate02" || id == "interpolation" ? EstimateMode::Literal : EstimateMode::RatioTrend;
}

EstimateReport rejected(const EstimateRequest& req, const std::string& why)
{
    EstimateReport r;
    r.id = req.id;
    r.mode = mode_of(req.id);
    r.params = req.params;
    r.applicable = false;
    r.note = why;
    return r;
}

InterpolationParams interpolation_params(const EstimateRequest& req, double m, int d)
{
    const double alpha = param(req, "alpha", 1.5);
    const bool has_r1 = req.params.count("r1") > 0;
    const bool has_r2 = req.params.count("r2") > 0;
    if (has_r1 && has_r2) return {alpha, req.params.at("r1"), req.params.at("r2")};
    if (has_r2) return interpolation_for_r2(alpha, req.params.at("r2"), m, d);
    if (has_r1) {
        const double r1 = req.params.at("r1");
        const double slope = alpha * (2.0 + m * d) - 2.0 * d;
        if (slope == 0.0) throw std::invalid_argument("r2 is undetermined at this alpha");
        const double inv_r2 = 2.0 * d * (1.0 - 1.0 / r1) / slope;
        return {alpha, r1, inv_r2 == 0.0 ? kInfinity : 1.0 / inv_r2};
    }
    return diagonal_interpolation(alpha, m, d);
}

// Cell-averaged closed-form solution at the final time.
CellField oracle_field(const Scenario& s, const Grid& grid, double t)
{
    const InitialAtom& a = s.measure.initial_atoms.front();
    if (s.oracle == OracleKind::Heat) {
        return sample_cell_average(grid, [&](const Point& x) { return heat_kernel(x, t, a.x, grid.dim(), a.mass); });
    }
    BarenblattProfile b{s.solver.m, grid.dim(), a.mass, a.x};
    return sample_cell_average(grid, [&](const Point& x) { return b(x, t); });
}

CoupledConfig coupled_config(const Scenario& s)
{
    CoupledConfig c;
    c.m = s.solver.m;
    c.epsilon = s.solver.epsilon;
    c.t_end = s.solver.t_end;
    c.cfl_safety = s.couple->cfl_safety;
    c.max_steps = s.solver.max_steps;
    c.max_dt = s.solver.max_dt;
    c.max_stored_slices = s.solver.max_stored_slices;
    c.energy_slack = s.couple->energy_slack;
    return c;
}

std::filesystem::path scenario_dir(const RunOptions& opt, const std::string& id) { return opt.out_dir / id; }

std::string tag(int n, std::size_t k) { return "N" + std::to_string(n) + "_" + std::to_string(k); }

void write_field(const CellField& f, const std::filesystem::path& path)
{
    auto out = open_out(path);
    write_csv(out, f);
}

bool step_check_failed(const EstimateReport& r)
{
    if (r.id != "coupled_energy") return false;
    const auto ratio = r.params.find("max_step_energy_ratio");
    const auto slack = r.params.find("energy_slack");
    const auto div = r.params.find("max_relative_divergence");
    const double allowed = 1.0 + (slack == r.params.end() ? 0.05 : slack->second);
    return (ratio != r.params.end() && ratio->second > allowed) || (div != r.params.end() && div->second > kProjectionTolerance);
}

} // namespace

int worker_count()
{
    if (const char* env = std::getenv("PMLAB_WORKERS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

nlohmann::json classification_json(double m, int d, const ExponentPair& e, bool divergence_free)
{
    const DiffusionParams p{m, d};
    nlohmann::json j;
    j["m"] = m;
    j["d"] = d;
    j["q1"] = format_exponent(e.q1());
    j["q2"] = format_exponent(e.q2());
    j["divergence_free"] = divergence_free;
    if (!p.plain_valid() && !(divergence_free && p.sigma_valid())) {
        j["plain"] = to_string(LineVerdict::NotApplicable);
        j["theorems"] = nlohmann::json::array({"None"});
        return j;
    }
    const ClassVerdict v = classify(p, e, divergence_free && p.sigma_valid());
    j["scaling_sum"] = number_or_null(v.scaling_sum);
    j["plain"] = to_string(v.plain);
    if (divergence_free) j["sigma"] = to_string(v.sigma);
    nlohmann::json labels = nlohmann::json::array();
    for (auto a : v.theorems) labels.push_back(to_string(a));
    if (labels.empty()) labels.push_back("None");
    j["theorems"] = labels;
    j["near_boundary"] = v.near_boundary;
    return j;
}

Trajectory solve_scenario(const Scenario& s, int n)
{
    const Grid grid = s.grid(n);
    const MollifiedForcing forcing(s.measure, s.mollification, grid, s.solver.t_end);
    return solve(grid, s.solver, forcing, s.drift_for(n));
}

CoupledRun couple_scenario(const Scenario& s, int n)
{
    if (!s.couple) throw std::invalid_argument("scenario '" + s.id + "' has no couple section");
    const Grid grid = s.grid(n);
    const MollifiedForcing forcing(s.measure, s.mollification, grid, s.solver.t_end);
    const FaceField v0 = s.couple->v0 == "taylor_green" ? taylor_green(grid, s.couple->v0_amplitude) : FaceField(grid);
    return coupled_solve(grid, coupled_config(s), forcing, v0, s.couple->potential, s.solver.output_times);
}

std::optional<double> oracle_error(const Scenario& s, const Trajectory& traj)
{
    if (s.oracle == OracleKind::None) return std::nullopt;
    return l1_distance(traj.final_state(), oracle_field(s, traj.grid, traj.final_time));
}

EstimateReport evaluate(const EstimateRequest& req, const EstimateInput& in)
{
    const double m = in.traj.m;
    const int d = in.traj.grid.dim();
    try {
        if (req.id == "Estimate01") return verify_mass(in);
        if (req.id == "Estimate02")
            return verify_weighted_gradient(in, {param(req, "A", 1.0), param(req, "xi", 2.0), param(req, "q", 2.0)});
        if (req.id == "Estimate03") return verify_alpha_gradient(in, {param(req, "q", 1.5), param(req, "alpha", 1.0)});
        if (req.id == "Estimate04") return verify_alpha_gradient(in, {1.0, param(req, "alpha", 1.0)});
        if (req.id == "E_V") return verify_theorem_estimate(in, param(req, "alpha", 1.5));
        if (req.id == "interpolation") return verify_interpolation(in, interpolation_params(req, m, d));
        if (req.id == "parabolic_embedding") return verify_parabolic_embedding(in, {param(req, "p", 1.5), param(req, "q", 1.0)});
    }
    catch (const std::invalid_argument& e) {
        return rejected(req, e.what());
    }
    throw std::invalid_argument("unknown estimate '" + req.id + "'");
}

std::vector<EstimateReport> evaluate_all(const std::vector<EstimateRequest>& reqs, const EstimateInput& in)
{
    std::vector<EstimateReport> out;
    out.reserve(reqs.size());
    for (const auto& r : reqs) out.push_back(evaluate(r, in));
    return out;
}

std::string report_label(const EstimateRequest& req)
{
    std::string s = req.id;
    if (req.params.empty()) return s;
    s += "[";
    bool first = true;
    for (const auto& [k, v] : req.params) {
        if (!first) s += ";";
        first = false;
        s += k + "=" + short_fmt(v);
    }
    return s + "]";
}

EstimateReport verify_coupled_mass(const CoupledRun& run)
{
    double sup = run.initial_mass;
    for (const auto& r : run.records) sup = std::max(sup, r.mass);
    const double nu = run.initial_mass + run.forcing_mass;
    EstimateReport r;
    r.id = "coupled_mass";
    r.mode = EstimateMode::Literal;
    r.lhs = sup;
    r.rhs = nu;
    r.ratio = sup == 0.0 ? 0.0 : (nu == 0.0 ? std::numeric_limits<double>::infinity() : sup / nu);
    r.params = {{"m", run.config.m}, {"budget_residual", run.max_budget_residual}};
    r.pass = sup <= nu * (1.0 + kMassTolerance);
    return r;
}

bool ScenarioResult::literal_failure() const
{
    auto literal_fail = [](const EstimateReport& r) { return r.mode == EstimateMode::Literal && r.applicable && !r.pass; };
    return coupled_step_failure || std::any_of(combined.begin(), combined.end(), literal_fail) ||
           std::any_of(coupled_combined.begin(), coupled_combined.end(), literal_fail);
}

nlohmann::json ScenarioResult::to_json() const
{
    nlohmann::json j;
    j["id"] = id;
    j["classification"] = classification;
    nlohmann::json grid_list = nlohmann::json::array();
    for (const auto& g : grids) {
        nlohmann::json gj;
        gj["cells"] = g.cells;
        gj["steps"] = g.steps;
        gj["budget_residual"] = g.budget_residual;
        gj["oracle_error"] = g.oracle_error ? nlohmann::json(*g.oracle_error) : nlohmann::json(nullptr);
        grid_list.push_back(gj);
    }
    j["grids"] = grid_list;
    nlohmann::json est = nlohmann::json::array();
    for (const auto& r : combined) est.push_back(pmlab::to_json(r));
    j["estimates"] = est;
    if (!coupled_combined.empty()) {
        nlohmann::json c = nlohmann::json::array();
        for (const auto& r : coupled_combined) c.push_back(pmlab::to_json(r));
        j["coupled"] = c;
    }
    j["literal_failure"] = literal_failure();
    if (!error.empty()) j["error"] = error;
    return j;
}

namespace {

EstimateReport combine_column(const std::vector<GridRun>& grids, std::size_t k, bool coupled)
{
    std::vector<std::pair<int, EstimateReport>> ladder;
    for (const auto& g : grids) ladder.emplace_back(g.cells, coupled ? g.coupled[k] : g.reports[k]);
    EstimateReport out = combine_refinement(ladder);
    if (out.id == "coupled_energy" && out.applicable) {
        // the step inequality is checked on every grid, not only the finest
        out.pass = out.pass && std::all_of(ladder.begin(), ladder.end(), [](const auto& e) { return e.second.pass; });
    }
    return out;
}

} // namespace

ScenarioResult run_scenario(const Scenario& s, const RunOptions& opt)
{
    ScenarioResult res;
    res.id = s.id;
    res.classification = classification_json(s.solver.m, s.domain.dim, s.drift.exponents, s.drift.divergence_free());
    const bool files = !opt.out_dir.empty();
    const auto dir = scenario_dir(opt, s.id);
    try {
        for (int n : s.ladder) {
            GridRun g;
            g.cells = n;
            if (!s.estimates.empty() || s.oracle != OracleKind::None || !s.couple) {
                const auto t0 = Clock::now();
                const DriftSpec drift = s.drift_for(n);
                const Grid grid = s.grid(n);
                const MollifiedForcing forcing(s.measure, s.mollification, grid, s.solver.t_end);
                const Trajectory traj = solve(grid, s.solver, forcing, drift);
                g.steps = traj.steps;
                g.budget_residual = traj.max_budget_residual();
                g.oracle_error = oracle_error(s, traj);
                g.reports = evaluate_all(s.estimates, EstimateInput{traj, s.measure, drift});
                g.runtime = seconds_since(t0);
                if (files) {
                    write_budget_csv(traj, dir / ("budget_N" + std::to_string(n) + ".csv"));
                    for (std::size_t k = 0; k < traj.snapshots.size(); ++k)
                        write_field(traj.snapshots[k].field, dir / ("u_" + tag(n, k) + ".csv"));
                }
            }
            if (s.couple) {
                const auto t0 = Clock::now();
                const CoupledRun run = couple_scenario(s, n);
                for (double a : s.couple->alphas) {
                    EstimateReport r = verify_coupled_energy(run, a);
                    r.params["energy_slack"] = s.couple->energy_slack;
                    if (step_check_failed(r)) res.coupled_step_failure = true;
                    g.coupled.push_back(std::move(r));
                }
                g.coupled.push_back(verify_coupled_mass(run));
                g.coupled_runtime = seconds_since(t0);
                if (files) {
                    write_energy_csv(run, dir / ("energy_N" + std::to_string(n) + ".csv"));
                    for (std::size_t k = 0; k < run.rho_snapshots.size(); ++k)
                        write_field(run.rho_snapshots[k].field, dir / ("rho_" + tag(n, k) + ".csv"));
                    for (std::size_t k = 0; k < run.v_snapshots.size(); ++k)
                        write_velocity_csv(run.v_snapshots[k].second, dir / ("v_" + tag(n, k) + ".csv"));
                }
            }
            res.grids.push_back(std::move(g));
        }
    }
    catch (const std::exception& e) {
        res.error = e.what();
        return res;
    }

    if (!res.grids.empty() && !res.grids.front().reports.empty()) {
        for (std::size_t k = 0; k < s.estimates.size(); ++k) {
            EstimateReport r = combine_column(res.grids, k, false);
            if (!opt.strict && !r.applicable && (r.id == "E_V" || r.id == "E_V_divfree")) continue;
            res.combined.push_back(std::move(r));
        }
    }
    if (s.couple && !res.grids.empty()) {
        for (std::size_t k = 0; k < res.grids.front().coupled.size(); ++k) res.coupled_combined.push_back(combine_column(res.grids, k, true));
    }

    if (files) {
        std::vector<ConvergenceRow> rows;
        for (const auto& g : res.grids) {
            ConvergenceRow row;
            row.cells = g.cells;
            row.oracle_error = g.oracle_error;
            row.runtime = g.runtime + g.coupled_runtime;
            for (std::size_t k = 0; k < g.reports.size(); ++k) row.ratios.emplace_back(report_label(s.estimates[k]), g.reports[k].ratio);
            for (const auto& r : g.coupled) {
                std::string label = r.id;
                if (const auto a = r.params.find("alpha"); a != r.params.end()) label += "[alpha=" + short_fmt(a->second) + "]";
                row.ratios.emplace_back(label, r.ratio);
            }
            rows.push_back(std::move(row));
        }
        write_convergence_csv(rows, dir / "convergence.csv");
    }
    return res;
}

SuiteResult run_suite(const Suite& suite, const RunOptions& opt)
{
    SuiteResult out;
    std::vector<const Scenario*> order;
    for (const auto& s : suite.scenarios) order.push_back(&s);
    std::sort(order.begin(), order.end(), [](const Scenario* a, const Scenario* b) { return a->id < b->id; });

    out.scenarios.resize(order.size());
    RunOptions local = opt;
    local.strict = opt.strict && suite.strict;
    const int workers = std::max(1, std::min<int>(opt.workers > 0 ? opt.workers : worker_count(), static_cast<int>(order.size())));
    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        for (std::size_t k = next++; k < order.size(); k = next++) out.scenarios[k] = run_scenario(*order[k], local);
    };
    if (workers <= 1) {
        work();
    }
    else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }

    nlohmann::json list = nlohmann::json::array();
    bool failed = false;
    for (const auto& r : out.scenarios) {
        list.push_back(r.to_json());
        failed = failed || r.literal_failure() || !r.error.empty();
    }
    out.bundle = {{"schema", suite.schema}, {"scenarios", list}, {"status", failed ? "fail" : "pass"}};
    out.exit_status = failed ? 1 : 0;
    if (!opt.out_dir.empty()) {
        auto f = open_out(opt.out_dir / "report.json");
        f << out.bundle.dump(2) << "\n";
    }
    return out;
}

std::vector<ConvergenceRow> convergence_study(const Scenario& s, const std::vector<int>& ladder)
{
    for (std::size_t k = 1; k < ladder.size(); ++k)
        if (ladder[k] <= ladder[k - 1]) throw std::invalid_argument("ladder must be strictly increasing");
    std::vector<ConvergenceRow> rows;
    for (int n : ladder) {
        const auto t0 = Clock::now();
        const DriftSpec drift = s.drift_for(n);
        const Trajectory traj = solve_scenario(s, n);
        ConvergenceRow row;
        row.cells = n;
        row.oracle_error = oracle_error(s, traj);
        const auto reports = evaluate_all(s.estimates, EstimateInput{traj, s.measure, drift});
        for (std::size_t k = 0; k < reports.size(); ++k) row.ratios.emplace_back(report_label(s.estimates[k]), reports[k].ratio);
        row.runtime = seconds_since(t0);
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_convergence_csv(const std::vector<ConvergenceRow>& rows, const std::filesystem::path& path)
{
    auto out = open_out(path);
    out << "cells,runtime_s,oracle_error";
    if (!rows.empty())
        for (const auto& [label, ratio] : rows.front().ratios) out << "," << label;
    out << "\n";
    for (const auto& r : rows) {
        out << r.cells << "," << fmt(r.runtime) << "," << (r.oracle_error ? fmt(*r.oracle_error) : "");
        for (const auto& [label, ratio] : r.ratios) out << "," << fmt(ratio);
        out << "\n";
    }
}

void write_budget_csv(const Trajectory& traj, const std::filesystem::path& path)
{
    auto out = open_out(path);
    out << "t,mass,forcing_cum,outflux_cum\n";
    out << "0," << fmt(traj.initial_mass) << ",0,0\n";
    CompensatedSum forcing;
    CompensatedSum outflux;
    for (const auto& b : traj.budget) {
        forcing.add(b.forcing);
        outflux.add(b.outflux);
        out << fmt(b.t + b.dt) << "," << fmt(b.mass_after) << "," << fmt(forcing.value()) << "," << fmt(outflux.value()) << "\n";
    }
}

void write_energy_csv(const CoupledRun& run, const std::filesystem::path& path)
{
    auto out = open_out(path);
    out << "t,mass,kinetic,dissipation_cum,forcing_cum,divergence,energy_ratio\n";
    out << "0," << fmt(run.initial_mass) << "," << fmt(run.initial_kinetic) << ",0,0,0,0\n";
    for (const auto& r : run.records) {
        out << fmt(r.t) << "," << fmt(r.mass) << "," << fmt(r.kinetic) << "," << fmt(r.dissipation_cum) << ","
            << fmt(r.forcing_cum) << "," << fmt(r.divergence) << "," << fmt(r.energy_ratio) << "\n";
    }
}

void write_velocity_csv(const FaceField& v, const std::filesystem::path& path)
{
    const Grid& g = v.grid();
    const int n = g.cells();
    auto out = open_out(path);
    out << "axis,i,j,value\n";
    for (int a = 0; a < g.dim(); ++a) {
        const auto comp = v.component(a);
        const int ni = a == 0 ? n + 1 : n;
        const int nj = a == 0 ? n : n + 1;
        for (int i = 0; i < ni; ++i)
            for (int j = 0; j < nj; ++j)
                out << a << "," << i << "," << j << "," << fmt(comp[static_cast<std::size_t>(i) * static_cast<std::size_t>(nj) + static_cast<std::size_t>(j)]) << "\n";
    }
}

void save_trajectory(const std::filesystem::path& path, const Trajectory& traj, const std::string& scenario_text)
{
    nlohmann::json h;
    h["format"] = "pmlab-trajectory";
    h["version"] = 1;
    h["dim"] = traj.grid.dim();
    h["cells"] = traj.grid.cells();
    h["length"] = traj.grid.length();
    h["boundary"] = to_string(traj.grid.boundary());
    h["m"] = traj.m;
    h["final_time"] = traj.final_time;
    h["initial_mass"] = traj.initial_mass;
    h["steps"] = traj.steps;
    nlohmann::json budget = nlohmann::json::array();
    for (const auto& b : traj.budget) budget.push_back({b.t, b.dt, b.mass_before, b.mass_after, b.forcing, b.outflux});
    h["budget"] = budget;
    nlohmann::json slices = nlohmann::json::array();
    for (const auto& s : traj.slices) slices.push_back({s.time, s.weight});
    h["slices"] = slices;
    nlohmann::json snaps = nlohmann::json::array();
    for (const auto& s : traj.snapshots) snaps.push_back(s.time);
    h["snapshots"] = snaps;
    h["scenario"] = scenario_text;
    const std::string header = h.dump();

    auto out = open_out(path);
    out.write("PMLT", 4);
    const std::uint64_t len = header.size();
    for (int b = 0; b < 8; ++b) out.put(static_cast<char>((len >> (8 * b)) & 0xff));
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    for (const auto& s : traj.slices) write_binary(out, s.field.values());
    for (const auto& s : traj.snapshots) write_binary(out, s.field.values());
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

LoadedTrajectory load_trajectory(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    char magic[4];
    in.read(magic, 4);
    if (!in || std::string(magic, 4) != "PMLT") throw std::runtime_error(path.string() + " is not a trajectory dump");
    std::uint64_t len = 0;
    for (int b = 0; b < 8; ++b) len |= static_cast<std::uint64_t>(static_cast<unsigned char>(in.get())) << (8 * b);
    if (!in || len > (1ull << 32)) throw std::runtime_error("corrupt trajectory header");
    std::string header(len, '\0');
    in.read(header.data(), static_cast<std::streamsize>(len));
    if (!in) throw std::runtime_error("truncated trajectory header");
    const auto h = nlohmann::json::parse(header);
    if (h.at("format") != "pmlab-trajectory" || h.at("version") != 1) throw std::runtime_error("unsupported trajectory format");

    LoadedTrajectory out;
    Trajectory& t = out.traj;
    t.grid = Grid(h.at("dim").get<int>(), h.at("cells").get<int>(), h.at("length").get<double>(),
                  boundary_from_string(h.at("boundary").get<std::string>()));
    t.m = h.at("m").get<double>();
    t.final_time = h.at("final_time").get<double>();
    t.initial_mass = h.at("initial_mass").get<double>();
    t.steps = h.at("steps").get<std::size_t>();
    for (const auto& b : h.at("budget"))
        t.budget.push_back(BudgetRecord{b[0].get<double>(), b[1].get<double>(), b[2].get<double>(), b[3].get<double>(),
                                        b[4].get<double>(), b[5].get<double>()});
    const std::size_t count = t.grid.cell_count();
    for (const auto& s : h.at("slices"))
        t.slices.push_back(TimeSlice{s[0].get<double>(), s[1].get<double>(), CellField(t.grid, read_binary(in, count))});
    for (const auto& s : h.at("snapshots")) t.snapshots.push_back(Snapshot{s.get<double>(), CellField(t.grid, read_binary(in, count))});
    out.scenario_text = h.at("scenario").get<std::string>();
    return out;
}

} // namespace pmlab
