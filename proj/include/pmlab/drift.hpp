#pragma once

// Drift fields V: analytic presets sampled at face centres, or a sampled face
// field loaded from a binary dump.
//
// Divergence-free presets (shear, vortex) are sampled as discrete curls of a
// stream function evaluated at face corners, so their discrete divergence
// vanishes to rounding.

#include <array>
#include <optional>
#include <string>

#include "pmlab/exponents.hpp"
#include "pmlab/grid.hpp"

namespace pmlab {

enum class DriftPreset { Zero, Constant, Shear, Vortex, Radial, ScaledSingular, Bump, Sampled };

std::string to_string(DriftPreset p);
DriftPreset drift_preset_from_string(const std::string& name);

struct DriftSpec {
    DriftPreset preset = DriftPreset::Zero;
    double amplitude = 0.0;
    Point vector{};          // Constant
    Point center{};          // Radial, ScaledSingular, Bump, Shear/Vortex offsets are box-relative
    double gamma = 0.5;      // ScaledSingular: |x - c|^{-gamma}
    double radius = 1.0;     // Bump spatial radius
    double t_center = 0.0;   // Bump time centre
    double t_width = 0.0;    // Bump time half-width; 0 means time-independent
    std::optional<FaceField> sampled;
    bool declared_divergence_free = false;  // only consulted for Sampled
    ExponentPair exponents{kInfinity, kInfinity};  // the class claim checked by the classifier

    bool divergence_free() const;
    bool time_dependent() const { return preset == DriftPreset::Bump && t_width > 0.0; }

    // Face-sampled field on `grid` at time t.
    FaceField sample(const Grid& grid, double t) const;

    // Pointwise analytic value (not available for Sampled).
    Point value(const Point& x, double t) const;
};

// max over cells of |discrete divergence| relative to max |V|.
double relative_divergence(const FaceField& V);

inline constexpr double kDivergenceFreeTolerance = 1e-10;

FaceField load_face_field(const std::string& path, const Grid& grid);
void save_face_field(const std::string& path, const FaceField& V);

} // namespace pmlab
