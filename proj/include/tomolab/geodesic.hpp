#ifndef TOMOLAB_GEODESIC_HPP
#define TOMOLAB_GEODESIC_HPP

#include "tomolab/vectorfield.hpp"
#include "tomolab/xray.hpp"

namespace tomolab {

// Radial sound speed c(r) as a polynomial of degree <= 6 on [0, R];
// positivity on [0, R] is checked at construction.
struct RadialProfile {
    std::vector<double> coeffs;  // c(r) = sum coeffs[k] r^k
    double radius = 1.0;

    double value(double r) const;
    double derivative(double r) const;
};

RadialProfile make_radial_profile(const std::vector<double>& coeffs, double radius);

struct HerglotzResult {
    bool satisfied = false;
    double margin = 0.0;  // min over [0, R] of d/dr (r / c(r))
};
HerglotzResult herglotz_check(const RadialProfile& c);

struct PathSample {
    std::array<double, 2> x;
    std::array<double, 2> p;  // momentum covector
    double t;
};

struct GeodesicPath {
    std::vector<PathSample> samples;
    bool exited = false;
    double hamiltonian_drift = 0.0;  // max relative drift of c^2 |p|^2 / 2

    std::array<double, 2> velocity(std::size_t k, const RadialProfile& c) const;
};

// Hamiltonian ray tracing of g = c^-2 e: dx/dt = c^2 p, dp/dt = -grad(c^2)|p|^2/2,
// 4th-order explicit steps with step halving until the drift is below 1e-8,
// boundary exit located by bisection to 1e-10.
GeodesicPath trace_geodesic(const RadialProfile& c, const std::array<double, 2>& x0,
                            const std::array<double, 2>& direction, double step);

struct TravelTimeResult {
    double time = 0.0;
    GeodesicPath path;
};

// Shooting over the launch angle, bisection on the exit-angle mismatch to
// 1e-8 rad; T is the parameter length at the H = 1/2 normalization.
TravelTimeResult travel_time(const RadialProfile& c, double boundary_angle_from,
                             double boundary_angle_to, double step = 0.0);

struct BoundaryDistanceMap {
    double radius = 1.0;
    std::vector<double> angles;   // m uniform boundary points
    std::vector<double> d;        // row-major m x m, d(i -> j)

    int size() const { return static_cast<int>(angles.size()); }
    double at(int i, int j) const { return d[static_cast<std::size_t>(i) * angles.size() + j]; }
    double symmetric_part(int i, int j) const { return 0.5 * (at(i, j) + at(j, i)); }
    double antisymmetric_part(int i, int j) const { return 0.5 * (at(i, j) - at(j, i)); }
};

BoundaryDistanceMap boundary_distance_map(const RadialProfile& c, int m_points);

struct HerglotzInversion {
    std::vector<double> r;  // sample radii
    std::vector<double> c;  // recovered speed at those radii
};

// Classical Abel-type inversion: p = dT/dDelta by finite differences, then
// r(p) = R exp(-(1/pi) integral of arccosh(p(D')/p) dD'); the integral is
// evaluated in closed form on the piecewise-linear ray parameter.
HerglotzInversion herglotz_invert(const std::vector<double>& separations,
                                  const std::vector<double>& times, double radius);

// General 2-tensor field on the grid (mixings break index symmetry).
struct Tensor2Field {
    GridSpec grid;
    std::array<ScalarField, 4> comp;  // t11, t12, t21, t22

    Tensor2Field() = default;
    explicit Tensor2Field(const GridSpec& g)
        : grid(g), comp{ScalarField(g), ScalarField(g), ScalarField(g), ScalarField(g)} {}
    static Tensor2Field symmetric(const ScalarField& t11, const ScalarField& t12,
                                  const ScalarField& t22);
    double max_abs() const;
};

using GeodesicFan = std::vector<GeodesicPath>;

GeodesicFan make_boundary_fan(const RadialProfile& c, int n_entry_points, int n_directions,
                              double step = 0.0);
// One geodesic per line of the set that meets the disk, traced so that the
// initial velocity is the negative of the line's direction vector omega_perp.
GeodesicFan make_fan_from_lines(const RadialProfile& c, const LineSet& lines, double step = 0.0);

std::vector<double> geodesic_ray_transform(const ScalarField& f, const RadialProfile& c,
                                           const GeodesicFan& fan);
std::vector<double> geodesic_ray_transform(const VectorField& h, const RadialProfile& c,
                                           const GeodesicFan& fan);
std::vector<double> geodesic_ray_transform(const Tensor2Field& h, const RadialProfile& c,
                                           const GeodesicFan& fan);

// Mixing of degree m: pointwise invertible matrices per tensor slot.
struct Mixing2 {
    MatrixWeight a1;
    MatrixWeight a2;  // ignored for m = 1
};

VectorField apply_mixing(const Mixing2& A, const VectorField& h);
Tensor2Field apply_mixing(const Mixing2& A, const Tensor2Field& h);

std::vector<double> mixing_ray_transform(const VectorField& h, const Mixing2& A,
                                         const RadialProfile& c, const GeodesicFan& fan);
std::vector<double> mixing_ray_transform(const Tensor2Field& h, const Mixing2& A,
                                         const RadialProfile& c, const GeodesicFan& fan);

// Generalized symmetrization A^{-1} sigma A; the identity map for m = 1.
Tensor2Field symmetrize_mixing(const Tensor2Field& h, const Mixing2& A);

// 1-form on the disk grid; `closed` is verified against the discrete curl.
struct OneForm {
    ScalarField b1, b2;
    bool closed = false;
};
OneForm make_one_form(const ScalarField& b1, const ScalarField& b2);

// d_F(x, x') = d_g(x, x') + integral of beta along the g-geodesic; requires
// the closed flag (projective equivalence) and the dual-norm bound
// max c|beta| < 1.
BoundaryDistanceMap randers_boundary_map(const RadialProfile& c, const OneForm& beta,
                                         int m_points);

// beta = -W/c^2; closed flag set iff the discrete curl of W/c^2 vanishes.
OneForm zermelo_first_order(const RadialProfile& c, const VectorField& W);

// Line integral of a one-form along a traced path (cubic Hermite in the path,
// bicubic interpolation of the components).
double one_form_path_integral(const OneForm& beta, const GeodesicPath& path,
                              const RadialProfile& c);

double bicubic(const ScalarField& f, double x, double y);

}  // namespace tomolab

#endif
