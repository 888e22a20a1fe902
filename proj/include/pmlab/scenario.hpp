#pragma once

// Scenario suites read from YAML (schema 1). See docs/config.md for the keys.

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pmlab/drift.hpp"
#include "pmlab/fluid.hpp"
#include "pmlab/grid.hpp"
#include "pmlab/measure.hpp"
#include "pmlab/solver.hpp"

namespace pmlab {

inline constexpr int kSchemaVersion = 1;

class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& origin, int line, const std::string& key, const std::string& message);
    int line() const { return line_; }
    const std::string& key() const { return key_; }

private:
    int line_;
    std::string key_;
};

struct DomainSpec {
    int dim = 2;
    double length = 1.0;
    Boundary boundary = Boundary::DirichletZero;
};

// One estimate evaluation; parameters not given take the documented defaults.
struct EstimateRequest {
    std::string id;
    std::map<std::string, double> params;
};

// The estimate set used for `estimates: all`.
std::vector<EstimateRequest> default_estimates();

// Known ids: Estimate01, Estimate02, Estimate03, Estimate04, E_V,
// interpolation, parabolic_embedding.
bool known_estimate(const std::string& id);

enum class OracleKind { None, Heat, Barenblatt };

std::string to_string(OracleKind k);

struct CoupleSpec {
    PotentialSpec potential;
    std::string v0 = "zero";  // zero | taylor_green
    double v0_amplitude = 1.0;
    std::vector<double> alphas{1.0, 1.5, 1.9};
    double energy_slack = 0.05;
    double cfl_safety = 0.5;
};

struct Scenario {
    std::string id;
    DomainSpec domain;
    int cells = 64;            // single-grid runs
    std::vector<int> ladder;   // refinement runs; defaults to {cells}
    SolverConfig solver;
    int mollification = 8;
    MeasureSpec measure;
    DriftSpec drift;
    std::string drift_file;    // sampled drift path; "{N}" is replaced by the cell count
    std::vector<EstimateRequest> estimates;
    OracleKind oracle = OracleKind::None;
    std::optional<CoupleSpec> couple;
    std::string source;        // the scenario's YAML text, kept for trajectory dumps

    Grid grid(int n) const { return Grid(domain.dim, n, domain.length, domain.boundary); }

    // The drift with a sampled field loaded for grid size n when needed.
    DriftSpec drift_for(int n) const;
};

struct Suite {
    int schema = kSchemaVersion;
    bool strict = true;
    std::vector<Scenario> scenarios;

    const Scenario& find(const std::string& id) const;
};

Suite parse_suite(const std::string& text, const std::string& origin = "<config>");
Suite load_suite(const std::string& path);

// A single scenario mapping, as stored in trajectory dumps.
Scenario parse_scenario(const std::string& text, const std::string& origin = "<scenario>");

} // namespace pmlab
