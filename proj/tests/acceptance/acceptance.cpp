// Acceptance run: executes the suite once, then checks criteria 1-10 against
// the results and a few independent recomputations. One PASS/FAIL line each.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "oracles.hpp"
#include "pmlab/classifier.hpp"
#include "pmlab/drift.hpp"
#include "pmlab/measure.hpp"
#include "pmlab/mixed_norm.hpp"
#include "pmlab/runner.hpp"

using namespace pmlab;

namespace {

using Clock = std::chrono::steady_clock;

struct Verdict {
    bool pass = true;
    std::vector<std::string> notes;

    void require(bool ok, const std::string& what)
    {
        if (!ok) {
            pass = false;
            notes.push_back(what);
        }
    }
};

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

const ScenarioResult* result_for(const SuiteResult& r, const std::string& id)
{
    for (const auto& s : r.scenarios)
        if (s.id == id) return &s;
    return nullptr;
}

const EstimateReport* find_report(const std::vector<EstimateReport>& rs, const std::string& id)
{
    for (const auto& r : rs)
        if (r.id == id) return &r;
    return nullptr;
}

bool drift_is_zero(const Scenario& s) { return s.drift.preset == DriftPreset::Zero || s.drift.amplitude == 0.0; }

std::vector<double> as_rows(const CellField& f)
{
    const Grid& g = f.grid();
    const int n = g.cells();
    std::vector<double> out(g.cell_count());
    for (std::size_t c = 0; c < g.cell_count(); ++c) {
        const auto idx = g.cell_index(c);
        out[static_cast<std::size_t>(idx[0] * n + idx[1])] = f[c];
    }
    return out;
}

// Oracle errors over the ladder from a fresh solve and the test oracles.
std::vector<double> oracle_series(const Scenario& s, const std::function<std::vector<double>(int, double)>& exact,
                                  std::vector<double>* outflux = nullptr)
{
    std::vector<double> errs;
    for (int n : s.ladder) {
        const Trajectory traj = solve_scenario(s, n);
        const double h = traj.grid.h();
        errs.push_back(oracle::l1(as_rows(traj.final_state()), exact(n, h), h));
        if (outflux) outflux->push_back(traj.cumulative_outflux());
    }
    return errs;
}

std::string series(const std::vector<double>& v)
{
    std::string s;
    for (double x : v) s += (s.empty() ? "" : " ") + fmt(x);
    return s;
}

Verdict criterion1(const Suite& suite, const SuiteResult& res)
{
    Verdict v;
    std::set<double> ms;
    std::set<Boundary> bcs;
    bool atoms = false, density = false;
    int count = 0;
    for (const auto& s : suite.scenarios) {
        if (s.couple) continue;
        const ScenarioResult* r = result_for(res, s.id);
        if (!r || !r->error.empty()) {
            v.require(false, s.id + ": run failed " + (r ? r->error : ""));
            continue;
        }
        ++count;
        ms.insert(s.solver.m);
        bcs.insert(s.domain.boundary);
        atoms = atoms || !s.measure.atoms.empty();
        density = density || s.measure.density.has_value();
        const EstimateReport* e = find_report(r->combined, "Estimate01");
        v.require(e && e->applicable && e->pass, s.id + ": Estimate01");
        if (e) {
            for (const auto& p : e->refinement)
                v.require(p.lhs <= p.rhs * (1.0 + 1e-10), s.id + ": mass " + fmt(p.lhs) + " > " + fmt(p.rhs));
        }
        for (const auto& g : r->grids) {
            v.require(g.budget_residual <= 1e-12, s.id + ": budget residual " + fmt(g.budget_residual));
            if (g.cells == 64) v.require(g.runtime < 120.0, s.id + ": N=64 runtime " + fmt(g.runtime) + "s");
        }
        if (std::find(s.ladder.begin(), s.ladder.end(), 64) == s.ladder.end()) v.require(false, s.id + ": no N=64 run");
    }
    v.require(count >= 10, "only " + std::to_string(count) + " scenarios");
    for (double m : {0.8, 1.0, 1.5, 2.0}) v.require(ms.count(m) == 1, "no scenario with m=" + fmt(m));
    v.require(bcs.size() == 2, "both boundary kinds needed");
    v.require(atoms && density, "atom and density forcing needed");
    return v;
}

const Scenario* find_oracle(const Suite& suite, OracleKind k)
{
    for (const auto& s : suite.scenarios)
        if (s.oracle == k) return &s;
    return nullptr;
}

Verdict criterion2(const Suite& suite)
{
    Verdict v;
    const Scenario* s = find_oracle(suite, OracleKind::Heat);
    if (!s) {
        v.require(false, "no heat oracle scenario");
        return v;
    }
    v.require(s->ladder == std::vector<int>{32, 64, 128}, "ladder must be 32,64,128");
    const auto& a = s->measure.initial_atoms.at(0);
    std::vector<double> outflux;
    auto errs = oracle_series(*s, [&](int n, double h) { return oracle::heat_cell_averages(n, h, a.x[0], a.x[1], s->solver.t_end); },
                              &outflux);
    for (std::size_t k = 1; k < errs.size(); ++k) v.require(errs[k] < errs[k - 1], "not strictly decreasing: " + series(errs));
    v.require(errs.back() < 1e-2, "N=128 error " + fmt(errs.back()));
    for (double o : outflux) v.require(o < 1e-6, "boundary loss " + fmt(o));
    v.notes.push_back("L1 " + series(errs));
    return v;
}

Verdict criterion3(const Suite& suite)
{
    Verdict v;
    const Scenario* s = find_oracle(suite, OracleKind::Barenblatt);
    if (!s) {
        v.require(false, "no Barenblatt oracle scenario");
        return v;
    }
    v.require(s->solver.m == 2.0 && s->domain.dim == 2, "needs m=2, d=2");
    v.require(s->solver.t_end == 0.5, "needs t=0.5");
    Scenario two = *s;
    two.ladder = {64, 128};
    const auto& a = s->measure.initial_atoms.at(0);
    v.require(a.mass == 1.0, "needs a unit atom");
    auto errs = oracle_series(two, [&](int n, double h) { return oracle::barenblatt_cell_averages(n, h, a.x[0], a.x[1], 0.5); });
    v.require(errs[0] / errs[1] >= 1.5, "reduction factor " + fmt(errs[0] / errs[1]));
    v.require(errs[1] < 5e-2, "N=128 error " + fmt(errs[1]));
    v.notes.push_back("L1 " + series(errs));
    return v;
}

Verdict criterion4()
{
    Verdict v;
    for (double m : {1.2, 1.5, 2.0}) {
        for (int d : {2, 3}) {
            DiffusionParams p{m, d};
            const ExponentPair anchor(2.0 / (m - 1.0), 2.0);
            v.require(classify(p, anchor, false).plain == LineVerdict::OnLine, "anchor A off the line at m=" + fmt(m));
            v.require(theorem_admissible(p, anchor, false).labels.count(Admissibility::PmeAdmissible) == 1,
                      "anchor A not admissible at m=" + fmt(m));
            const ExponentPair endpoint(kInfinity, 1.0);
            v.require(classify(p, endpoint, true).sigma == LineVerdict::OnLine, "sigma endpoint off the line at m=" + fmt(m));
        }
    }
    struct Pin {
        double m;
        int d;
        double q1, q2;
        bool divfree;
        LineVerdict plain, sigma;
    };
    const auto S = LineVerdict::Subclass, O = LineVerdict::OnLine, X = LineVerdict::Supercritical,
               N = LineVerdict::NotApplicable;
    // scaling sums worked by hand: d/q1 + (2 + d(m-1))/q2 against 1 + d(m-1) and 2 + d(m-1)
    const std::vector<Pin> pins = {
        {2.0, 2, 4.0, 2.0, false, S, N},          // 0.5 + 2 = 2.5 < 3
        {2.0, 2, 2.0, 2.0, false, O, N},          // 1 + 2 = 3
        {2.0, 2, 1.0, 2.0, false, X, N},          // 2 + 2 = 4 > 3
        {2.0, 2, 1.0, 1.0, true, X, X},           // 2 + 4 = 6 > 4
        {1.5, 2, kInfinity, 1.5, false, O, N},    // 3/1.5 = 2
        {1.5, 3, 6.0, 2.0, false, S, N},          // 0.5 + 1.75 = 2.25 < 2.5
        {1.0, 2, 4.0, 4.0, false, O, N},          // 0.5 + 0.5 = 1
        {1.0, 2, 8.0, 4.0, true, S, S},           // 0.75 < 1 < 2
        {0.8, 2, 4.0, 2.0, false, X, N},          // 0.5 + 0.8 = 1.3 > 0.6
        {0.4, 2, kInfinity, 2.0, true, N, S},     // plain invalid; 0.4 < 0.8
        {1.5, 2, 2.0, 1.5, true, X, O},           // 1 + 2 = 3: above 2, equal to 3
    };
    for (const auto& p : pins) {
        const DiffusionParams dp{p.m, p.d};
        const auto c = classify(dp, ExponentPair(p.q1, p.q2), p.divfree);
        std::ostringstream id;
        id << "pin m=" << p.m << " d=" << p.d << " (" << format_exponent(p.q1) << "," << format_exponent(p.q2) << ")";
        v.require(c.plain == p.plain, id.str() + " plain " + to_string(c.plain));
        if (p.divfree) v.require(c.sigma == p.sigma, id.str() + " sigma " + to_string(c.sigma));
    }
    return v;
}

bool literal_gate(const EstimateReport& r, std::string& why)
{
    if (!r.applicable) {
        why = "not applicable: " + r.note;
        return false;
    }
    std::vector<int> cells;
    for (const auto& p : r.refinement) cells.push_back(p.cells);
    if (cells != std::vector<int>{32, 64, 128}) {
        why = "ladder is not 32,64,128";
        return false;
    }
    std::vector<double> ratios;
    for (const auto& p : r.refinement) ratios.push_back(p.ratio);
    for (std::size_t k = 1; k < ratios.size(); ++k) {
        if (ratios[k] > ratios[k - 1]) {
            why = "ratio increases: " + series(ratios);
            return false;
        }
    }
    const auto& fin = r.refinement.back();
    if (!(fin.lhs <= fin.rhs * 1.05)) {
        why = "lhs " + fmt(fin.lhs) + " > 1.05 rhs " + fmt(fin.rhs);
        return false;
    }
    return r.pass;
}

// Atoms spread over max(2h, L/n): the same width on every grid of the ladder
// only when L/n >= 2h at the coarsest grid.
bool grid_independent_data(const Scenario& s)
{
    if (s.measure.atoms.empty() && s.measure.initial_atoms.empty()) return true;
    const int coarsest = *std::min_element(s.ladder.begin(), s.ladder.end());
    return s.domain.length / s.mollification >= 2.0 * s.domain.length / coarsest;
}

Verdict criterion5(const Suite& suite, const SuiteResult& res)
{
    Verdict v;
    int zero_v = 0, general = 0;
    std::vector<std::string> skipped;
    for (const auto& s : suite.scenarios) {
        if (s.couple) continue;
        const ScenarioResult* r = result_for(res, s.id);
        if (!r) continue;
        if (!grid_independent_data(s)) {
            skipped.push_back(s.id);
            continue;
        }
        const bool still = drift_is_zero(s);
        const EstimateReport* e = find_report(r->combined, still ? "Estimate02_divfree" : "Estimate02");
        if (still) {
            v.require(e != nullptr, s.id + ": no Estimate02");
            if (!e) continue;
            std::string why;
            const bool ok = literal_gate(*e, why);
            v.require(ok, s.id + ": " + why);
            ++zero_v;
        }
        else if (e && e->applicable) {
            std::string why;
            const bool ok = literal_gate(*e, why);
            v.require(ok, s.id + ": " + why);
            ++general;
        }
    }
    v.require(zero_v > 0, "no V=0 scenarios");
    v.require(general >= 2, "only " + std::to_string(general) + " non-zero-V scenarios with the general form");
    if (!skipped.empty()) {
        std::string ids;
        for (const auto& id : skipped) ids += (ids.empty() ? "" : ",") + id;
        v.notes.push_back("data shrink with h, not a refinement study: " + ids);
    }
    return v;
}

Verdict criterion6(const Suite& suite, const SuiteResult& res)
{
    Verdict v;
    for (OracleKind k : {OracleKind::Heat, OracleKind::Barenblatt}) {
        const Scenario* s = find_oracle(suite, k);
        const ScenarioResult* r = s ? result_for(res, s->id) : nullptr;
        if (!r) {
            v.require(false, "missing " + to_string(k) + " trajectory");
            continue;
        }
        std::set<std::pair<double, double>> seen;
        int ok = 0;
        for (const auto& e : r->combined) {
            if (e.id != "interpolation") continue;
            const double a = e.params.at("alpha"), r1 = e.params.at("r1"), r2 = e.params.at("r2");
            const int d = s->domain.dim;
            const double m = s->solver.m;
            const double resid = d / r1 + (a * (2.0 + m * d) - 2.0 * d) / (2.0 * r2) - d;
            v.require(std::abs(resid) < 1e-9, s->id + ": triple off the relation");
            v.require(e.applicable && e.pass, s->id + ": interpolation alpha=" + fmt(a) + " r2=" + fmt(r2) + " " + e.note);
            if (e.applicable && e.pass) {
                bool all = true;
                for (const auto& p : e.refinement) all = all && p.lhs <= p.rhs * 1.05;
                v.require(all, s->id + ": slack exceeded on some grid");
            }
            seen.insert({a, r1});
            ++ok;
        }
        v.require(ok >= 5 && seen.size() >= 5, s->id + ": needs 5 distinct triples");
    }
    return v;
}

Verdict criterion7(const Suite& suite, const SuiteResult& res)
{
    Verdict v;
    std::set<std::string> kinds;
    for (const auto& s : suite.scenarios) {
        const ScenarioResult* r = result_for(res, s.id);
        if (!r) continue;
        int trended = 0;
        auto check = [&](const EstimateReport& e) {
            if (e.mode != EstimateMode::RatioTrend || !e.applicable) return;
            double lo = 1e300, hi = 0.0;
            for (const auto& p : e.refinement) {
                lo = std::min(lo, p.ratio);
                hi = std::max(hi, p.ratio);
            }
            v.require(e.refinement.size() >= 3, s.id + ": " + e.id + " short ladder");
            v.require(std::isfinite(hi) && hi <= 2.0 * lo, s.id + ": " + e.id + " ratios spread " + fmt(lo) + ".." + fmt(hi));
            kinds.insert(e.id);
            ++trended;
        };
        for (const auto& e : r->combined) check(e);
        for (const auto& e : r->coupled_combined) check(e);
        v.require(trended > 0, s.id + ": no trend-gated estimate");
    }
    for (const char* id : {"Estimate03", "Estimate04", "E_V", "E_V_divfree", "parabolic_embedding", "coupled_energy"})
        v.require(kinds.count(id) == 1, std::string("no applicable ") + id + " in the suite");
    return v;
}

// |V| of a rescaled bump on its own support window, sampled at cell centres.
double rescaled_norm(const DriftSpec& bump, double r, const DiffusionParams& p, const ExponentPair& e, int n, int slices)
{
    VectorFunction V = [&bump](const std::array<double, 3>& x, double t) {
        const Point v = bump.value(x, t);
        return std::array<double, 3>{v[0], v[1], v[2]};
    };
    VectorFunction Vr = rescale_drift(V, r, p);
    const double L = 1.0 / r;
    const double T = 1.0 / std::pow(r, p.sigma_level());
    Grid g(2, n, L);
    SampledField f;
    const double dt = T / slices;
    for (int k = 0; k < slices; ++k) {
        TimeSlice s{(k + 0.5) * dt, dt, CellField(g)};
        for (std::size_t c = 0; c < g.cell_count(); ++c) {
            const auto x = g.cell_center(c);
            const auto v = Vr({x[0], x[1], 0.0}, s.time);
            s.field[c] = std::hypot(v[0], v[1]);
        }
        f.push_back(std::move(s));
    }
    return mixed_norm(f, e);
}

Verdict criterion8()
{
    Verdict v;
    const DiffusionParams p{1.5, 2};
    const ExponentPair e(4.0, 2.0);
    v.require(classify(p, e, false).plain == LineVerdict::OnLine, "(4,2) is not on the line");
    DriftSpec bump;
    bump.preset = DriftPreset::Bump;
    bump.amplitude = 1.0;
    bump.center = {0.5, 0.5, 0.0};
    bump.radius = 0.25;
    bump.t_center = 0.5;
    bump.t_width = 0.25;
    bump.exponents = e;
    const double base = rescaled_norm(bump, 1.0, p, e, 256, 256);
    v.require(base > 0.0, "zero base norm");
    const auto labels = theorem_admissible(p, e, false).labels;
    for (double r : {0.5, 2.0}) {
        const double nr = rescaled_norm(bump, r, p, e, 256, 256);
        v.require(std::abs(nr / base - 1.0) <= 0.02, "r=" + fmt(r) + " norm ratio " + fmt(nr / base));
        // the exponent pair of the rescaled field is unchanged, so is the verdict
        v.require(theorem_admissible(p, e, false).labels == labels, "verdict changes under r=" + fmt(r));
    }
    v.notes.push_back("base norm " + fmt(base));
    return v;
}

Verdict criterion9(const Suite& suite, const SuiteResult& res)
{
    Verdict v;
    std::set<double> buoyant_m;
    bool constant_seen = false;
    for (const auto& s : suite.scenarios) {
        if (!s.couple) continue;
        const ScenarioResult* r = result_for(res, s.id);
        v.require(r && r->error.empty(), s.id + ": run failed");
        if (!r || !r->error.empty()) continue;
        v.require(!r->coupled_step_failure, s.id + ": step check failed");
        for (const auto& e : r->coupled_combined) v.require(e.pass, s.id + ": " + e.id + " " + e.note);
        const bool constant = s.couple->potential.kind == PotentialKind::Constant;
        if (s.couple->potential.kind == PotentialKind::Linear) buoyant_m.insert(s.solver.m);
        constant_seen = constant_seen || constant;
        for (int n : s.ladder) {
            const auto t0 = Clock::now();
            const CoupledRun run = couple_scenario(s, n);
            const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
            if (n == 64) v.require(secs < 300.0, s.id + ": N=64 runtime " + fmt(secs) + "s");
            for (const auto& rec : run.records) {
                v.require(rec.divergence <= kProjectionTolerance, s.id + ": divergence " + fmt(rec.divergence));
                v.require(rec.energy_ratio <= 1.05, s.id + ": step energy ratio " + fmt(rec.energy_ratio));
                if (!v.pass) break;
            }
            if (constant) {
                for (std::size_t k = 1; k < run.records.size(); ++k)
                    v.require(run.records[k].kinetic <= run.records[k - 1].kinetic, s.id + ": kinetic energy grew");
            }
            if (!v.pass) break;
        }
    }
    v.require(buoyant_m.count(1.0) && buoyant_m.count(1.5), "buoyant runs at m=1 and m=1.5 needed");
    v.require(constant_seen, "constant-potential run needed");
    return v;
}

Verdict criterion10(const Suite& suite)
{
    Verdict v;
    // mass for every n on every scenario's data
    for (const auto& s : suite.scenarios) {
        const Grid g = s.grid(64);
        const double exact = total_mass(s.measure, g, s.solver.t_end, false);
        const double exact0 = total_mass(s.measure, g, s.solver.t_end, true) - exact;
        for (int n = 4; n <= 64; ++n) {
            const MollifiedForcing f(s.measure, n, g, s.solver.t_end);
            const double tot = f.total();
            v.require(std::abs(tot - exact) <= 1e-12 * std::max(1.0, exact), s.id + ": forcing mass at n=" + std::to_string(n));
            const double init = integrate(f.initial_state());
            v.require(std::abs(init - exact0) <= 1e-12 * std::max(1.0, exact0), s.id + ": initial mass at n=" + std::to_string(n));
            if (!v.pass) return v;
        }
    }

    Grid g(2, 256, 1.0);
    MeasureSpec ms;
    ms.atoms.push_back({{0.4, 0.55, 0.0}, 0.45, 1.0});
    ms.atoms.push_back({{0.62, 0.3, 0.0}, 0.7, 0.5});
    ms.density = DensityPreset{DensityKind::SineBump, 2.0, 0.1, 0.6};
    const SpaceTimeFunction phi = [](const Point& x, double t) { return std::cos(2.0 * x[0]) * std::exp(x[1]) * (1.0 + t * t); };
    const double exact = exact_pairing(ms, g, 1.0, phi);
    std::vector<double> errs;
    for (int n : {4, 8, 16, 32}) errs.push_back(std::abs(MollifiedForcing(ms, n, g, 1.0).pair_with(phi) - exact));
    for (std::size_t k = 1; k < errs.size(); ++k) v.require(errs[k] < errs[k - 1], "surrogate not decreasing: " + series(errs));

    // limsup_n mu_n(Q) <= mu(Q) on closed cylinders, tail n = 32..64
    MeasureSpec atoms;
    atoms.atoms = ms.atoms;
    Grid gc(2, 128, 1.0);
    struct Cyl {
        Point lo, hi;
        double t0, t1;
    };
    const std::vector<Cyl> family = {
        {{0.3, 0.45, 0}, {0.5, 0.65, 0}, 0.35, 0.55},   // around the first atom
        {{0.4, 0.55, 0}, {0.5, 0.65, 0}, 0.45, 0.6},    // atom on a corner
        {{0.55, 0.2, 0}, {0.7, 0.4, 0}, 0.0, 1.0},      // second atom, full time
        {{0.0, 0.0, 0}, {1.0, 1.0, 0}, 0.5, 0.65},      // a time window holding neither
        {{0.4, 0.55, 0}, {0.4, 0.55, 0}, 0.45, 0.45},   // the atom itself
    };
    for (std::size_t k = 0; k < family.size(); ++k) {
        const auto& c = family[k];
        const double bound = exact_cylinder_mass(atoms, gc, 1.0, c.lo, c.hi, c.t0, c.t1);
        double sup = 0.0;
        for (int n = 32; n <= 64; ++n) sup = std::max(sup, MollifiedForcing(atoms, n, gc, 1.0).cylinder_mass(c.lo, c.hi, c.t0, c.t1));
        v.require(sup <= bound + 1e-9, "cylinder " + std::to_string(k) + ": " + fmt(sup) + " > " + fmt(bound));
    }
    v.notes.push_back("surrogate " + series(errs));
    return v;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"acceptance criteria"};
    std::string config = PMLAB_SOURCE_DIR "/configs/acceptance.yaml";
    std::string out;
    app.add_option("--config", config, "suite file");
    app.add_option("--out", out, "output directory");
    CLI11_PARSE(app, argc, argv);

    Suite suite;
    try {
        suite = load_suite(config);
    }
    catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }
    const auto t0 = Clock::now();
    const SuiteResult res = run_suite(suite, {out, 0, true});
    std::cerr << "suite: " << fmt(std::chrono::duration<double>(Clock::now() - t0).count()) << "s, exit status "
              << res.exit_status << "\n";
    for (const auto& s : res.scenarios)
        if (!s.error.empty()) std::cerr << "  " << s.id << ": " << s.error << "\n";

    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
        {"1 mass bound and budget", [&] { return criterion1(suite, res); }},
        {"2 heat-kernel oracle", [&] { return criterion2(suite); }},
        {"3 Barenblatt oracle", [&] { return criterion3(suite); }},
        {"4 classifier anchors", [&] { return criterion4(); }},
        {"5 Estimate02 literal", [&] { return criterion5(suite, res); }},
        {"6 interpolation literal", [&] { return criterion6(suite, res); }},
        {"7 ratio-trend gates", [&] { return criterion7(suite, res); }},
        {"8 scaling invariance", [&] { return criterion8(); }},
        {"9 coupled run", [&] { return criterion9(suite, res); }},
        {"10 measure approximation", [&] { return criterion10(suite); }},
    };
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        Verdict v;
        try {
            v = run();
        }
        catch (const std::exception& e) {
            v.require(false, std::string("threw: ") + e.what());
        }
        std::cout << (v.pass ? "PASS " : "FAIL ") << name;
        if (!v.notes.empty()) {
            std::cout << " (";
            for (std::size_t k = 0; k < v.notes.size() && k < 4; ++k) std::cout << (k ? "; " : "") << v.notes[k];
            if (v.notes.size() > 4) std::cout << "; +" << v.notes.size() - 4 << " more";
            std::cout << ")";
        }
        std::cout << std::endl;
        if (!v.pass) ++failed;
    }
    return failed == 0 ? 0 : 1;
}
