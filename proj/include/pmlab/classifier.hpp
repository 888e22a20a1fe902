#pragma once

// Scaling classes of drift fields and the admissibility regions of the
// existence theorems, expressed on exponent pairs (q1, q2).
//
// Plain line:  d/q1 + (2 + d(m-1))/q2 = 1 + d(m-1), needs m > 1 - 1/d.
// Sigma line:  d/q1 + (2 + d(m-1))/q2 = 2 + d(m-1), needs 2 + d(m-1) > 0.

#include <array>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "pmlab/exponents.hpp"

namespace pmlab {

struct DiffusionParams {
    double m = 1.0;
    int d = 2;

    bool plain_valid() const;  // m > 1 - 1/d
    bool sigma_valid() const;  // 2 + d(m-1) > 0
    double plain_level() const { return 1.0 + d * (m - 1.0); }
    double sigma_level() const { return 2.0 + d * (m - 1.0); }
};

enum class ClassFamily { Plain, Sigma };

enum class LineVerdict { OnLine, Subclass, Supercritical, NotApplicable };

enum class Admissibility {
    PmeAdmissible,
    FdeAdmissible,
    DivFreePmeAdmissible,
    DivFreeFdeAdmissible,
    CompactnessAdmissible,
};

std::string to_string(LineVerdict v);
std::string to_string(Admissibility a);

inline constexpr double kLineTolerance = 1e-12;
inline constexpr double kBoundaryTolerance = 1e-9;

struct ClassVerdict {
    double scaling_sum = 0.0;
    LineVerdict plain = LineVerdict::NotApplicable;
    LineVerdict sigma = LineVerdict::NotApplicable;
    std::set<Admissibility> theorems;
    bool near_boundary = false;  // some defining inequality within kBoundaryTolerance of equality
};

// d/q1 + (2 + d(m-1))/q2, rejecting m outside the family's range.
double scaling_sum(const DiffusionParams& p, const ExponentPair& e, ClassFamily family = ClassFamily::Plain);

// Plain verdict always (NotApplicable if m <= 1 - 1/d); sigma verdict only
// when divergence_free. Throws if the requested family is invalid for m.
ClassVerdict classify(const DiffusionParams& p, const ExponentPair& e, bool divergence_free);

struct AdmissibilityResult {
    std::set<Admissibility> labels;
    bool near_boundary = false;
};

AdmissibilityResult theorem_admissible(const DiffusionParams& p, const ExponentPair& e, bool divergence_free);

bool compactness_admissible(const DiffusionParams& p, const ExponentPair& e);

// Bound of the (q1,q2) norm by the (tq1,tq2) norm on a bounded cylinder:
// |Omega|^{1/q1 - 1/tq1} T^{1/q2 - 1/tq2} * norm. Requires q <= tq componentwise.
double embed_norm(double norm, const ExponentPair& from_larger, const ExponentPair& to_smaller,
                  double omega_measure, double final_time);

// L1-scaling of densities and drifts: u_r(x,t) = r^d u(r x, r^{2+d(m-1)} t),
// V_r(x,t) = r^{1+d(m-1)} V(r x, r^{2+d(m-1)} t).
using ScalarFunction = std::function<double(const std::array<double, 3>&, double)>;
using VectorFunction = std::function<std::array<double, 3>(const std::array<double, 3>&, double)>;

ScalarFunction rescale_density(ScalarFunction u, double r, const DiffusionParams& p);
VectorFunction rescale_drift(VectorFunction V, double r, const DiffusionParams& p);

struct RegionSample {
    double inv_q1 = 0.0;
    double inv_q2 = 0.0;
    bool valid = false;  // both reciprocals in [0, 1]
    ClassVerdict verdict;
};

// Lattice sweep over (1/q1, 1/q2) in [0, extent]^2 with `steps` intervals per axis.
std::vector<RegionSample> region_sweep(const DiffusionParams& p, bool divergence_free, int steps, double extent = 1.5);

} // namespace pmlab
