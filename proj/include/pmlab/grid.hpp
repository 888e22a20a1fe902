#pragma once

// Uniform cell-centred grid on the box [0, L]^d with marker-and-cell face layout.
//
// Cells are stored row-major with axis 0 slowest. Faces normal to axis a are
// stored row-major over the extents (N, .., N+1, .., N) where the N+1 extent
// sits in slot a; face k along a line separates cells k-1 and k.

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace pmlab {

enum class Boundary { DirichletZero, NoFlux };

std::string to_string(Boundary b);
Boundary boundary_from_string(const std::string& name);

using Point = std::array<double, 3>;

class Grid {
public:
    Grid() = default;
    Grid(int dim, int cells, double length, Boundary boundary = Boundary::DirichletZero);

    int dim() const { return dim_; }
    int cells() const { return cells_; }
    double length() const { return length_; }
    Boundary boundary() const { return boundary_; }

    double h() const { return length_ / cells_; }
    double cell_volume() const;
    double face_area() const;
    double volume() const;

    std::size_t cell_count() const { return cell_count_; }
    std::size_t face_count(int axis) const;

    // Cell stride along an axis. Along a line of axis a, consecutive faces are
    // separated by the same stride.
    std::size_t stride(int axis) const { return strides_[static_cast<std::size_t>(axis)]; }

    std::array<int, 3> cell_index(std::size_t flat) const;
    std::size_t cell_flat(const std::array<int, 3>& idx) const;
    Point cell_center(std::size_t flat) const;
    Point face_center(int axis, std::size_t flat) const;

    bool same_shape(const Grid& other) const;

private:
    int dim_ = 2;
    int cells_ = 4;
    double length_ = 1.0;
    Boundary boundary_ = Boundary::DirichletZero;
    std::size_t cell_count_ = 16;
    std::array<std::size_t, 3> strides_{};
};

// Invokes fn(cell_base, face_base, stride) once per grid line parallel to `axis`.
// Cell k of the line is cell_base + k*stride (k < N); face k is
// face_base + k*stride (k <= N).
template <class Fn>
void for_each_line(const Grid& grid, int axis, Fn&& fn)
{
    const std::size_t n = static_cast<std::size_t>(grid.cells());
    const std::size_t s = grid.stride(axis);
    std::size_t outer_count = 1;
    for (int a = 0; a < axis; ++a) outer_count *= n;
    for (std::size_t outer = 0; outer < outer_count; ++outer) {
        for (std::size_t inner = 0; inner < s; ++inner) {
            fn(outer * n * s + inner, outer * (n + 1) * s + inner, s);
        }
    }
}

class CellField {
public:
    CellField() = default;
    explicit CellField(const Grid& grid, double value = 0.0);
    CellField(const Grid& grid, std::vector<double> values);

    const Grid& grid() const { return grid_; }
    std::size_t size() const { return values_.size(); }
    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }
    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }

    double max_abs() const;
    double min() const;
    bool all_finite() const;

private:
    Grid grid_;
    std::vector<double> values_;
};

class FaceField {
public:
    FaceField() = default;
    explicit FaceField(const Grid& grid, double value = 0.0);

    const Grid& grid() const { return grid_; }
    std::span<double> component(int axis) { return components_[static_cast<std::size_t>(axis)]; }
    std::span<const double> component(int axis) const { return components_[static_cast<std::size_t>(axis)]; }

    double max_abs() const;
    bool all_finite() const;

private:
    Grid grid_;
    std::vector<std::vector<double>> components_;
};

// Face differences (f_right - f_left)/h. Boundary ghosts: zero for
// DirichletZero, mirror of the adjacent cell for NoFlux.
FaceField gradient_faces(const CellField& f);

// Sum of outward face fluxes over each cell divided by h.
CellField divergence_cells(const FaceField& F);

// h^d times the sum of cell values, with compensated summation.
double integrate(const CellField& f);

// h^{d-1} times the sum of outward normal components over boundary faces.
double boundary_flux(const FaceField& F);

// Per-cell |F| from averaging the two opposing face components on each axis.
CellField cell_magnitude(const FaceField& F);

// Neumaier-compensated accumulator; the sum is independent of chunking only if
// inputs are fed in the same order, which all callers do.
class CompensatedSum {
public:
    void add(double x);
    double value() const { return sum_ + carry_; }

private:
    double sum_ = 0.0;
    double carry_ = 0.0;
};

// Snapshot formats: CSV rows "i,j[,k],value"; binary is raw little-endian f64
// in row-major cell order.
void write_csv(std::ostream& out, const CellField& f);
void write_binary(std::ostream& out, std::span<const double> values);
std::vector<double> read_binary(std::istream& in, std::size_t count);

} // namespace pmlab
