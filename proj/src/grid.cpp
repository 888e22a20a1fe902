#include "pmlab/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace pmlab {

std::string to_string(Boundary b)
{
    return b == Boundary::DirichletZero ? "dirichlet" : "noflux";
}

Boundary boundary_from_string(const std::string& name)
{
    if (name == "dirichlet" || name == "DirichletZero") return Boundary::DirichletZero;
    if (name == "noflux" || name == "NoFlux") return Boundary::NoFlux;
    throw std::invalid_argument("unknown boundary type '" + name + "'");
}

Grid::Grid(int dim, int cells, double length, Boundary boundary)
    : dim_(dim), cells_(cells), length_(length), boundary_(boundary)
{
    if (dim < 2 || dim > 3) throw std::invalid_argument("grid dimension must be 2 or 3");
    if (cells < 4) throw std::invalid_argument("grid needs at least 4 cells per axis");
    if (!(length > 0.0) || !std::isfinite(length)) throw std::invalid_argument("box length must be positive");
    cell_count_ = 1;
    for (int a = 0; a < dim; ++a) cell_count_ *= static_cast<std::size_t>(cells);
    std::size_t s = 1;
    for (int a = dim - 1; a >= 0; --a) {
        strides_[static_cast<std::size_t>(a)] = s;
        s *= static_cast<std::size_t>(cells);
    }
}

double Grid::cell_volume() const { return std::pow(h(), dim_); }
double Grid::face_area() const { return std::pow(h(), dim_ - 1); }
double Grid::volume() const { return std::pow(length_, dim_); }

std::size_t Grid::face_count(int axis) const
{
    (void)axis;
    return cell_count_ / static_cast<std::size_t>(cells_) * static_cast<std::size_t>(cells_ + 1);
}

std::array<int, 3> Grid::cell_index(std::size_t flat) const
{
    std::array<int, 3> idx{};
    for (int a = 0; a < dim_; ++a) {
        const std::size_t s = strides_[static_cast<std::size_t>(a)];
        idx[static_cast<std::size_t>(a)] = static_cast<int>(flat / s);
        flat %= s;
    }
    return idx;
}

std::size_t Grid::cell_flat(const std::array<int, 3>& idx) const
{
    std::size_t flat = 0;
    for (int a = 0; a < dim_; ++a) flat += static_cast<std::size_t>(idx[static_cast<std::size_t>(a)]) * strides_[static_cast<std::size_t>(a)];
    return flat;
}

Point Grid::cell_center(std::size_t flat) const
{
    const auto idx = cell_index(flat);
    Point x{};
    for (int a = 0; a < dim_; ++a) x[static_cast<std::size_t>(a)] = (idx[static_cast<std::size_t>(a)] + 0.5) * h();
    return x;
}

Point Grid::face_center(int axis, std::size_t flat) const
{
    Point x{};
    for (int a = dim_ - 1; a >= 0; --a) {
        const std::size_t extent = static_cast<std::size_t>(cells_ + (a == axis ? 1 : 0));
        const auto i = static_cast<double>(flat % extent);
        flat /= extent;
        x[static_cast<std::size_t>(a)] = (a == axis ? i : i + 0.5) * h();
    }
    return x;
}

bool Grid::same_shape(const Grid& other) const
{
    return dim_ == other.dim_ && cells_ == other.cells_ && length_ == other.length_;
}

CellField::CellField(const Grid& grid, double value) : grid_(grid), values_(grid.cell_count(), value) {}

CellField::CellField(const Grid& grid, std::vector<double> values) : grid_(grid), values_(std::move(values))
{
    if (values_.size() != grid_.cell_count()) throw std::invalid_argument("cell field size does not match grid");
}

double CellField::max_abs() const
{
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

double CellField::min() const
{
    return values_.empty() ? 0.0 : *std::min_element(values_.begin(), values_.end());
}

bool CellField::all_finite() const
{
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

FaceField::FaceField(const Grid& grid, double value) : grid_(grid)
{
    components_.resize(static_cast<std::size_t>(grid.dim()));
    for (int a = 0; a < grid.dim(); ++a) components_[static_cast<std::size_t>(a)].assign(grid.face_count(a), value);
}

double FaceField::max_abs() const
{
    double m = 0.0;
    for (const auto& c : components_)
        for (double v : c) m = std::max(m, std::abs(v));
    return m;
}

bool FaceField::all_finite() const
{
    for (const auto& c : components_)
        if (!std::all_of(c.begin(), c.end(), [](double v) { return std::isfinite(v); })) return false;
    return true;
}

FaceField gradient_faces(const CellField& f)
{
    const Grid& g = f.grid();
    FaceField grad(g);
    const int n = g.cells();
    const double inv_h = 1.0 / g.h();
    const bool mirror = g.boundary() == Boundary::NoFlux;
    for (int a = 0; a < g.dim(); ++a) {
        auto comp = grad.component(a);
        for_each_line(g, a, [&](std::size_t cb, std::size_t fb, std::size_t s) {
            const double first = f[cb];
            const double last = f[cb + static_cast<std::size_t>(n - 1) * s];
            comp[fb] = (first - (mirror ? first : 0.0)) * inv_h;
            for (int k = 1; k < n; ++k) {
                const std::size_t kk = static_cast<std::size_t>(k);
                comp[fb + kk * s] = (f[cb + kk * s] - f[cb + (kk - 1) * s]) * inv_h;
            }
            comp[fb + static_cast<std::size_t>(n) * s] = ((mirror ? last : 0.0) - last) * inv_h;
        });
    }
    return grad;
}

CellField divergence_cells(const FaceField& F)
{
    const Grid& g = F.grid();
    CellField div(g);
    const int n = g.cells();
    const double inv_h = 1.0 / g.h();
    for (int a = 0; a < g.dim(); ++a) {
        auto comp = F.component(a);
        for_each_line(g, a, [&](std::size_t cb, std::size_t fb, std::size_t s) {
            for (int k = 0; k < n; ++k) {
                const std::size_t kk = static_cast<std::size_t>(k);
                div[cb + kk * s] += (comp[fb + (kk + 1) * s] - comp[fb + kk * s]) * inv_h;
            }
        });
    }
    return div;
}

void CompensatedSum::add(double x)
{
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
        carry_ += (sum_ - t) + x;
    else
        carry_ += (x - t) + sum_;
    sum_ = t;
}

double integrate(const CellField& f)
{
    CompensatedSum s;
    for (double v : f.values()) s.add(v);
    return s.value() * f.grid().cell_volume();
}

double boundary_flux(const FaceField& F)
{
    const Grid& g = F.grid();
    const std::size_t n = static_cast<std::size_t>(g.cells());
    CompensatedSum s;
    for (int a = 0; a < g.dim(); ++a) {
        auto comp = F.component(a);
        for_each_line(g, a, [&](std::size_t, std::size_t fb, std::size_t st) {
            s.add(comp[fb + n * st]);
            s.add(-comp[fb]);
        });
    }
    return s.value() * g.face_area();
}

CellField cell_magnitude(const FaceField& F)
{
    const Grid& g = F.grid();
    CellField sq(g);
    const int n = g.cells();
    for (int a = 0; a < g.dim(); ++a) {
        auto comp = F.component(a);
        for_each_line(g, a, [&](std::size_t cb, std::size_t fb, std::size_t s) {
            for (int k = 0; k < n; ++k) {
                const std::size_t kk = static_cast<std::size_t>(k);
                const double avg = 0.5 * (comp[fb + kk * s] + comp[fb + (kk + 1) * s]);
                sq[cb + kk * s] += avg * avg;
            }
        });
    }
    for (auto& v : sq.values()) v = std::sqrt(v);
    return sq;
}

void write_csv(std::ostream& out, const CellField& f)
{
    const Grid& g = f.grid();
    out << (g.dim() == 2 ? "i,j,value\n" : "i,j,k,value\n");
    char buf[64];
    for (std::size_t c = 0; c < f.size(); ++c) {
        const auto idx = g.cell_index(c);
        for (int a = 0; a < g.dim(); ++a) out << idx[static_cast<std::size_t>(a)] << ',';
        std::snprintf(buf, sizeof buf, "%.17g", f[c]);
        out << buf << '\n';
    }
}

namespace {
std::uint64_t to_little(std::uint64_t bits)
{
    if constexpr (std::endian::native == std::endian::big) {
        std::uint64_t r = 0;
        for (int i = 0; i < 8; ++i) r |= ((bits >> (8 * i)) & 0xffu) << (8 * (7 - i));
        return r;
    }
    return bits;
}
} // namespace

void write_binary(std::ostream& out, std::span<const double> values)
{
    for (double v : values) {
        const std::uint64_t bits = to_little(std::bit_cast<std::uint64_t>(v));
        char bytes[8];
        std::memcpy(bytes, &bits, 8);
        out.write(bytes, 8);
    }
}

std::vector<double> read_binary(std::istream& in, std::size_t count)
{
    std::vector<double> values(count);
    for (auto& v : values) {
        char bytes[8];
        if (!in.read(bytes, 8)) throw std::runtime_error("binary field truncated");
        std::uint64_t bits;
        std::memcpy(&bits, bytes, 8);
        v = std::bit_cast<double>(to_little(bits));
    }
    return values;
}

} // namespace pmlab
