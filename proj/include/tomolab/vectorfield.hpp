#ifndef TOMOLAB_VECTORFIELD_HPP
#define TOMOLAB_VECTORFIELD_HPP

#include "tomolab/fractional.hpp"
#include "tomolab/xray.hpp"

namespace tomolab {

// One scalar per line: the integrand is h . omega_perp.
struct VectorSinogram {
    LineSet lines;
    std::vector<double> values;

    VectorSinogram() = default;
    explicit VectorSinogram(const LineSet& l)
        : lines(l), values(static_cast<std::size_t>(l.n_angles()) * l.n_offsets(), 0.0) {}

    double& at(int k, int l) { return values[static_cast<std::size_t>(k) * lines.n_offsets() + l]; }
    double at(int k, int l) const {
        return values[static_cast<std::size_t>(k) * lines.n_offsets() + l];
    }
    double max_abs() const;
};

// Pointwise 2x2 matrices A(x), sampled on the grid; det bounded away from 0.
struct MatrixWeight {
    GridSpec grid;
    std::array<ScalarField, 4> entries;  // a11, a12, a21, a22

    explicit MatrixWeight(const GridSpec& g);
    void validate() const;  // min |det| >= 1e-6
};

MatrixWeight identity_weight(const GridSpec& grid);
MatrixWeight rotation_weight(const GridSpec& grid, double angle_rad);

VectorSinogram xray_vector(const VectorField& h, const LineSet& lines);

// 2-D curl d_1 h_2 - d_2 h_1 with the same central stencils as gradient(),
// so curl(gradient(phi)) vanishes identically.
ScalarField curl2d(const VectorField& h);

struct HelmholtzParts {
    VectorField solenoidal;
    ScalarField potential;
    VectorField grad_potential;  // gradient taken on the torus, then cropped,
                                 // so h = solenoidal + grad_potential exactly
};
HelmholtzParts helmholtz(const VectorField& h, const SpectralPlan& plan);

// Max spectral divergence of the solenoidal projection, evaluated on the
// plan's torus (projector and divergence composed without the intermediate
// crop). This is the oracle for the projector itself.
double helmholtz_divergence_residual(const VectorField& h, const SpectralPlan& plan);

// Spectral gradient/divergence on the padded torus (the oracles for the
// decomposition identities).
VectorField gradient_spectral(const ScalarField& f, const SpectralPlan& plan);
ScalarField divergence_spectral(const VectorField& h, const SpectralPlan& plan);

// X1* X1: the adjoint back-projects each line value along omega_perp.
VectorField normal_vector(const VectorField& h, const LineSet& lines);
VectorField backproject_vector(const VectorSinogram& g, const GridSpec& grid);

// X_A = X1 (A h): apply the matrix weight pointwise, then the line transform.
// A = rotation by 90 degrees gives the Euclidean transverse ray transform.
VectorSinogram xray_matrix_weighted(const VectorField& h, const MatrixWeight& A,
                                    const LineSet& lines);

}  // namespace tomolab

#endif
