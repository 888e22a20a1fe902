#pragma once

// Both sides of the a priori inequalities evaluated on computed trajectories.
//
// Literal reports compare against a fully explicit right-hand side. RatioTrend
// reports carry an unknown multiplicative constant, so only the boundedness of
// lhs / rhs under grid refinement is meaningful.

#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "pmlab/drift.hpp"
#include "pmlab/measure.hpp"
#include "pmlab/solver.hpp"

namespace pmlab {

enum class EstimateMode { Literal, RatioTrend };

std::string to_string(EstimateMode m);

struct RefinementPoint {
    int cells = 0;
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
};

struct EstimateReport {
    std::string id;
    std::map<std::string, double> params;
    double lhs = 0.0;
    double rhs = 0.0;  // rhs without the unknown constant for RatioTrend
    double ratio = 0.0;
    EstimateMode mode = EstimateMode::Literal;
    bool pass = false;
    bool applicable = true;
    std::string note;
    std::vector<RefinementPoint> refinement;
};

nlohmann::json to_json(const EstimateReport& r);

// Everything an estimate needs besides its own parameters.
struct EstimateInput {
    const Trajectory& traj;
    const MeasureSpec& measure;
    const DriftSpec& drift;
};

// nu = mu(Omega_T) + mu0(Omega).
double data_mass(const EstimateInput& in);

// |Omega_T| = L^d T.
double cylinder_volume(const Trajectory& traj);

// int int u^{2-m} |V|^2 over the stored slices.
double drift_energy(const EstimateInput& in);

// ||V||_{L^{q1,q2}} over the trajectory's time samples.
double drift_norm(const EstimateInput& in, const ExponentPair& e);

inline constexpr double kLiteralSlack = 0.05;
inline constexpr double kMassTolerance = 1e-10;
inline constexpr double kTrendFactor = 2.0;

EstimateReport verify_mass(const EstimateInput& in);

struct WeightedGradientParams {
    double A = 1.0;
    double xi = 2.0;
    double q = 2.0;
};

// Uses the divergence-free right-hand side when the drift is flagged so.
EstimateReport verify_weighted_gradient(const EstimateInput& in, const WeightedGradientParams& p);

struct AlphaGradientParams {
    double q = 1.0;  // q == 1 selects the q -> 1 form
    double alpha = 1.0;
};

// Upper limit on alpha for q > 1: 2(2 + md)/(2 + d(m + q - 1)).
double alpha_limit(double m, int d, double q);

EstimateReport verify_alpha_gradient(const EstimateInput& in, const AlphaGradientParams& p);

// Exponents of the drift term in the energy bound.
double sigma1(double alpha, double q2);
double sigma2(double alpha, double q2, double m);

EstimateReport verify_theorem_estimate(const EstimateInput& in, double alpha);

struct InterpolationParams {
    double alpha = 1.5;
    double r1 = 2.25;
    double r2 = 2.25;
};

// Residual of d/r1 + (alpha(2 + md) - 2d)/(2 r2) = d.
double interpolation_relation(double alpha, double r1, double r2, double m, int d);

// Throws unless (alpha, r1, r2) satisfy the relation to 1e-9 and the ranges.
void check_interpolation(const InterpolationParams& p, double m, int d);

// The diagonal point r1 = r2 = alpha(2 + md)/(2d).
InterpolationParams diagonal_interpolation(double alpha, double m, int d);

// Point on the relation with a given r2 (r2 = inf allowed).
InterpolationParams interpolation_for_r2(double alpha, double r2, double m, int d);

EstimateReport verify_interpolation(const EstimateInput& in, const InterpolationParams& p);

struct EmbeddingParams {
    double p = 1.5;
    double q = 1.0;
};

// v = u: int int |u|^{p(d+q)/d} against the constant-free right-hand side.
EstimateReport verify_parabolic_embedding(const EstimateInput& in, const EmbeddingParams& p);

// Literal estimates whose pass also needs a non-increasing ratio under refinement.
bool trend_gated(const std::string& id);

// Merges reports of one estimate over a refinement ladder (ascending cells).
// Trend-gated Literal: the finest grid passes and the ratio is non-increasing.
// Other Literal: every grid passes. RatioTrend: max ratio <= kTrendFactor * min ratio.
EstimateReport combine_refinement(const std::vector<std::pair<int, EstimateReport>>& ladder);

} // namespace pmlab
