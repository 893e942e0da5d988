#ifndef TOMOLAB_XRAY_HPP
#define TOMOLAB_XRAY_HPP

#include "tomolab/fields.hpp"

namespace tomolab {

// Parallel-beam line set. (theta, s) names the undirected line
// { s*omega(theta) + t*omega_perp(theta) }, omega = (cos, sin),
// omega_perp = (-sin, cos). The factory produces theta uniform in [0, pi) and
// offsets symmetric about 0; tests may extend angles up to 2*pi.
struct LineSet {
    std::vector<double> angles;
    std::vector<double> offsets;

    int n_angles() const { return static_cast<int>(angles.size()); }
    int n_offsets() const { return static_cast<int>(offsets.size()); }
    double offset_step() const { return offsets[1] - offsets[0]; }
    // Weight of one stored line in the directed-line measure on S^1 x R.
    // Each undirected line stands for both orientations, hence 2*pi.
    double angle_weight() const { return 2.0 * 3.14159265358979323846 / n_angles(); }
};

LineSet make_uniform_lines(int n_angles, int n_offsets, double extent);

struct Sinogram {
    LineSet lines;
    std::vector<double> values;  // n_angles x n_offsets, offset fastest

    Sinogram() = default;
    explicit Sinogram(const LineSet& l)
        : lines(l), values(static_cast<std::size_t>(l.n_angles()) * l.n_offsets(), 0.0) {}

    double& at(int k, int l) { return values[static_cast<std::size_t>(k) * lines.n_offsets() + l]; }
    double at(int k, int l) const {
        return values[static_cast<std::size_t>(k) * lines.n_offsets() + l];
    }
    double max_abs() const;
};

// Inner product in the directed-line measure (angle_weight x offset_step).
// NaN entries count as missing and are skipped.
double sinogram_inner(const Sinogram& a, const Sinogram& b);
double sinogram_norm(const Sinogram& g);

// Line integrals: composite trapezoid with step h/2 and bilinear interpolation,
// clipped to the grid square.
Sinogram xray_forward(const ScalarField& f, const LineSet& lines);

// Adjoint under the directed-line measure: sums g(theta_k, x.omega_k) over all
// angles with weight angle_weight(), linear interpolation in offset.
ScalarField backproject(const Sinogram& g, const GridSpec& grid);

// N0 = backproject(xray_forward(.)).
ScalarField normal_scalar(const ScalarField& f, const LineSet& lines);

// Ram-Lak filtered back-projection (no apodization), pi/n_angles normalization.
ScalarField fbp_reconstruct(const Sinogram& g, const GridSpec& grid);

// A line is flagged iff one of its quadrature samples (step h/2) lands in a
// true cell of V.
std::vector<std::uint8_t> lines_through_region(const LineSet& lines, const RegionMask& V);

// Quadrature sample positions and weights of one line clipped to the square;
// shared by the forward transform, the region predicate and matrix assembly.
struct LineSamples {
    std::vector<std::array<double, 2>> points;
    std::vector<double> weights;  // trapezoid weights (sum = chord length)
};
LineSamples sample_line(const GridSpec& grid, double theta, double offset);

double bilinear(const ScalarField& f, double x, double y);

// Sinogram file format: CSV with a header row of offsets and one row per
// angle, plus a JSON sidecar {angles, offsets, grid}.
void write_sinogram_csv(const Sinogram& g, const std::string& path, const GridSpec& grid);
Sinogram read_sinogram_csv(const std::string& path);

}  // namespace tomolab

#endif
