#ifndef TOMOLAB_GRID_HPP
#define TOMOLAB_GRID_HPP

#include <array>
#include <complex>
#include <cstdint>
#include <vector>

#include "tomolab/common.hpp"

namespace tomolab {

// Uniform grid on [-L, L]^dim, cell centers at -L + i*h, h = 2L/(n-1).
struct GridSpec {
    int dim = 2;
    int n_per_axis = 0;
    double extent = 1.0;  // L

    double spacing() const { return 2.0 * extent / (n_per_axis - 1); }
    std::size_t point_count() const {
        std::size_t n = static_cast<std::size_t>(n_per_axis);
        return dim == 2 ? n * n : n * n * n;
    }
    double coord(int i) const { return -extent + i * spacing(); }

    // Raveling: x fastest, then y, then z.
    std::size_t index(int ix, int iy, int iz = 0) const {
        std::size_t n = static_cast<std::size_t>(n_per_axis);
        return (static_cast<std::size_t>(iz) * n + static_cast<std::size_t>(iy)) * n +
               static_cast<std::size_t>(ix);
    }

    bool operator==(const GridSpec&) const = default;
};

GridSpec make_grid(int dim, int n_per_axis, double extent = 1.0);

struct ScalarField {
    GridSpec grid;
    std::vector<double> values;

    ScalarField() = default;
    explicit ScalarField(const GridSpec& g) : grid(g), values(g.point_count(), 0.0) {}

    double& at(int ix, int iy, int iz = 0) { return values[grid.index(ix, iy, iz)]; }
    double at(int ix, int iy, int iz = 0) const { return values[grid.index(ix, iy, iz)]; }

    double max_abs() const;
};

struct ComplexField {
    GridSpec grid;
    std::vector<std::complex<double>> values;

    ComplexField() = default;
    explicit ComplexField(const GridSpec& g) : grid(g), values(g.point_count(), 0.0) {}

    ScalarField real_part() const;
    ScalarField imag_part() const;
    double max_abs() const;
};

struct VectorField {
    GridSpec grid;
    std::vector<ScalarField> components;  // grid.dim entries

    VectorField() = default;
    explicit VectorField(const GridSpec& g) : grid(g), components(g.dim, ScalarField(g)) {}

    double max_abs() const;
};

struct RegionMask {
    GridSpec grid;
    std::vector<std::uint8_t> inside;

    RegionMask() = default;
    explicit RegionMask(const GridSpec& g) : grid(g), inside(g.point_count(), 0) {}

    std::size_t count() const;
    bool is_connected() const;  // 2*dim neighborhood over true cells
    std::string digest() const;
};

// Disk (or ball) of given radius about center, in world units.
RegionMask make_disk_mask(const GridSpec& grid, const std::array<double, 3>& center, double radius);
// Axis-aligned block of cells [i0, i0+w) per axis.
RegionMask make_block_mask(const GridSpec& grid, const std::array<int, 3>& i0, int width);
RegionMask make_full_mask(const GridSpec& grid);

void check_same_grid(const GridSpec& a, const GridSpec& b, const char* where);

}  // namespace tomolab

#endif
