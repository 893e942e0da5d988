#ifndef TOMOLAB_FIELDS_HPP
#define TOMOLAB_FIELDS_HPP

#include <complex>
#include <map>
#include <string>

#include "tomolab/grid.hpp"

namespace tomolab {

// Constant-coefficient polynomial in the symbol variables, total order <= 2.
// P(xi) = sum a_alpha xi^alpha acts on fields as P(D), D_j = -i d_j.
class PolyOperator {
public:
    using MultiIndex = std::array<int, 3>;

    PolyOperator() = default;
    explicit PolyOperator(std::map<MultiIndex, std::complex<double>> coeffs);

    static PolyOperator one();
    static PolyOperator coordinate(int axis);      // P(xi) = xi_axis
    static PolyOperator laplacian_symbol(int dim); // P(xi) = |xi|^2, i.e. P(D) = -Laplace

    const std::map<MultiIndex, std::complex<double>>& coefficients() const { return coeffs_; }
    int order() const;
    std::string describe() const;

private:
    std::map<MultiIndex, std::complex<double>> coeffs_;
};

enum class PhantomKind { gaussian_bumps, ellipse_sum, divergence_free_swirl };

PhantomKind phantom_kind_from_string(const std::string& name);

// Deterministic in (kind, seed); supported strictly inside radius 0.9*L.
ScalarField make_scalar_phantom(const GridSpec& grid, PhantomKind kind, std::uint64_t seed);
VectorField make_swirl_phantom(const GridSpec& grid, std::uint64_t seed);

// Smooth radial cutoff: 1 for r <= 0.75*L, 0 for r >= 0.9*L.
double support_cutoff(double r, double extent);

// Discrete L2 pairing with trapezoid weights (h^dim, halved on boundary layers).
double quadrature_weight(const GridSpec& grid, int ix, int iy, int iz = 0);
double l2_norm(const ScalarField& f);
double inner(const ScalarField& f, const ScalarField& g);
double l2_norm(const VectorField& h);

// Second-order finite differences, one-sided at the grid edges.
ScalarField derivative(const ScalarField& f, int axis);         // d/dx_axis
ScalarField second_derivative(const ScalarField& f, int axis);  // d^2/dx_axis^2
VectorField gradient(const ScalarField& f);

ComplexField apply_poly_operator(const ScalarField& f, const PolyOperator& p);

}  // namespace tomolab

#endif
