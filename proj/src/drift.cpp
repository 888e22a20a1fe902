#include "pmlab/drift.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>

namespace pmlab {

std::string to_string(DriftPreset p)
{
    switch (p) {
    case DriftPreset::Zero: return "zero";
    case DriftPreset::Constant: return "constant";
    case DriftPreset::Shear: return "shear";
    case DriftPreset::Vortex: return "vortex";
    case DriftPreset::Radial: return "radial";
    case DriftPreset::ScaledSingular: return "scaled_singular";
    case DriftPreset::Bump: return "bump";
    case DriftPreset::Sampled: return "sampled";
    }
    return "?";
}

DriftPreset drift_preset_from_string(const std::string& name)
{
    for (auto p : {DriftPreset::Zero, DriftPreset::Constant, DriftPreset::Shear, DriftPreset::Vortex,
                   DriftPreset::Radial, DriftPreset::ScaledSingular, DriftPreset::Bump, DriftPreset::Sampled}) {
        if (to_string(p) == name) return p;
    }
    throw std::invalid_argument("unknown drift preset '" + name + "'");
}

bool DriftSpec::divergence_free() const
{
    switch (preset) {
    case DriftPreset::Zero:
    case DriftPreset::Constant:
    case DriftPreset::Shear:
    case DriftPreset::Vortex: return true;
    case DriftPreset::Sampled: return declared_divergence_free;
    default: return false;
    }
}

namespace {

double bump3(double s2) { return s2 < 1.0 ? std::pow(1.0 - s2, 3) : 0.0; }

// Stream function of the planar divergence-free presets; acts on axes 0 and 1.
double stream(const DriftSpec& spec, double L, double x, double y)
{
    if (spec.preset == DriftPreset::Shear) {
        const double s = y - 0.5 * L;
        return 0.5 * spec.amplitude * s * s;
    }
    const double k = std::numbers::pi / L;
    return spec.amplitude / k * std::sin(k * x) * std::sin(k * y);
}

} // namespace

Point DriftSpec::value(const Point& x, double t) const
{
    Point v{};
    switch (preset) {
    case DriftPreset::Zero: break;
    case DriftPreset::Constant: v = vector; break;
    case DriftPreset::Shear:
        // L is not known pointwise; shear is centred on the box through `center[1]`.
        v[0] = amplitude * (x[1] - center[1]);
        break;
    case DriftPreset::Vortex: {
        const double L = center[0] > 0.0 ? 2.0 * center[0] : 1.0;
        const double k = std::numbers::pi / L;
        v[0] = amplitude * std::sin(k * x[0]) * std::cos(k * x[1]);
        v[1] = -amplitude * std::cos(k * x[0]) * std::sin(k * x[1]);
        break;
    }
    case DriftPreset::Radial:
        for (std::size_t a = 0; a < 3; ++a) v[a] = amplitude * (x[a] - center[a]);
        break;
    case DriftPreset::ScaledSingular: {
        double r2 = 0.0;
        for (std::size_t a = 0; a < 3; ++a) r2 += (x[a] - center[a]) * (x[a] - center[a]);
        if (r2 == 0.0) break;
        const double scale = amplitude * std::pow(r2, -0.5 * (gamma + 1.0));
        for (std::size_t a = 0; a < 3; ++a) v[a] = scale * (x[a] - center[a]);
        break;
    }
    case DriftPreset::Bump: {
        double r2 = 0.0;
        for (std::size_t a = 0; a < 3; ++a) r2 += (x[a] - center[a]) * (x[a] - center[a]);
        double profile = bump3(r2 / (radius * radius));
        if (t_width > 0.0) {
            const double s = (t - t_center) / t_width;
            profile *= bump3(s * s);
        }
        v[0] = amplitude * profile;
        break;
    }
    case DriftPreset::Sampled: throw std::logic_error("sampled drift has no pointwise value");
    }
    return v;
}

FaceField DriftSpec::sample(const Grid& grid, double t) const
{
    if (preset == DriftPreset::Sampled) {
        if (!sampled || !sampled->grid().same_shape(grid)) throw std::invalid_argument("sampled drift does not match the grid");
        return *sampled;
    }
    FaceField V(grid);
    if (preset == DriftPreset::Zero) return V;
    const double h = grid.h();
    if (preset == DriftPreset::Shear || preset == DriftPreset::Vortex) {
        const double L = grid.length();
        auto vx = V.component(0);
        for (std::size_t f = 0; f < vx.size(); ++f) {
            const Point c = grid.face_center(0, f);
            vx[f] = (stream(*this, L, c[0], c[1] + 0.5 * h) - stream(*this, L, c[0], c[1] - 0.5 * h)) / h;
        }
        auto vy = V.component(1);
        for (std::size_t f = 0; f < vy.size(); ++f) {
            const Point c = grid.face_center(1, f);
            vy[f] = -(stream(*this, L, c[0] + 0.5 * h, c[1]) - stream(*this, L, c[0] - 0.5 * h, c[1])) / h;
        }
        return V;
    }
    for (int a = 0; a < grid.dim(); ++a) {
        auto comp = V.component(a);
        for (std::size_t f = 0; f < comp.size(); ++f) comp[f] = value(grid.face_center(a, f), t)[static_cast<std::size_t>(a)];
    }
    return V;
}

double relative_divergence(const FaceField& V)
{
    const double vmax = V.max_abs();
    if (vmax == 0.0) return 0.0;
    return divergence_cells(V).max_abs() / vmax;
}

FaceField load_face_field(const std::string& path, const Grid& grid)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open face field '" + path + "'");
    FaceField V(grid);
    for (int a = 0; a < grid.dim(); ++a) {
        const auto values = read_binary(in, grid.face_count(a));
        auto comp = V.component(a);
        std::copy(values.begin(), values.end(), comp.begin());
    }
    return V;
}

void save_face_field(const std::string& path, const FaceField& V)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write face field '" + path + "'");
    for (int a = 0; a < V.grid().dim(); ++a) write_binary(out, V.component(a));
}

} // namespace pmlab
