#pragma once

// Space-time functionals over time-sampled cell fields.
//
// A SampledField is a sequence of slices; slice k carries the weight used by
// the left-endpoint time quadrature (the length of time it represents).

#include <vector>

#include "pmlab/exponents.hpp"
#include "pmlab/grid.hpp"

namespace pmlab {

struct TimeSlice {
    double time = 0.0;
    double weight = 0.0;
    CellField field;
};

using SampledField = std::vector<TimeSlice>;

// Sum of slice weights (the represented time span).
double time_span(const SampledField& f);

// (sum_t dt (h^d sum_x |f|^q1)^{q2/q1})^{1/q2}; q1 = inf uses the slice max,
// q2 = inf the max over slices.
double mixed_norm(const SampledField& f, const ExponentPair& e);

// Max over slices of the slice integral.
double sup_l1(const SampledField& u);

// sum_t dt h^d sum_cells |grad (u_+^power)|^alpha with the per-cell magnitude
// assembled from averaged face components.
double gradient_power(const SampledField& u, double power, double alpha);

// int int |grad u^{(m+q-1)/2}|^alpha.
double grad_power_alpha(const SampledField& u, double m, double q, double alpha);

struct GradientFunctionalParams {
    double m = 1.0;
    double q = 2.0;
    double alpha = 1.0;
    double xi = 2.0;
    double A = 1.0;

    void validate() const;
};

// int int |grad u^{(m+q-1)/2}|^2 / (A^{q-1} + u^{q-1})^xi, summed per face with
// u in the denominator averaged over the two cells of the face.
double weighted_gradient(const SampledField& u, const GradientFunctionalParams& p);

// sum_t dt h^d sum_cells |f|^p.
double space_time_power(const SampledField& f, double p);

} // namespace pmlab
