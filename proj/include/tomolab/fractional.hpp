#ifndef TOMOLAB_FRACTIONAL_HPP
#define TOMOLAB_FRACTIONAL_HPP

#include "tomolab/fields.hpp"

namespace tomolab {

// Exponent of (-Delta)^s, s in (-dim/2, 4]. Integer s is admitted but flagged:
// those are the local cases, and the rank experiments treat them with local
// stencils rather than the periodized multiplier.
struct FracExponent {
    double s = 0.5;
    bool is_integer = false;

    FracExponent(double s_, int dim);
};

enum class ZeroModeRule { zero, subtract_mean };

// Periodization plan: fields are zero-padded to pad_factor*n (rounded even)
// before the Fourier multiplier is applied.
struct SpectralPlan {
    GridSpec grid;
    int pad_factor = 4;
    ZeroModeRule zero_mode = ZeroModeRule::subtract_mean;

    int padded_size() const {
        int m = grid.n_per_axis * pad_factor;
        return m % 2 == 0 ? m : m + 1;
    }
};

SpectralPlan make_spectral_plan(const GridSpec& grid, int pad_factor = 4,
                                ZeroModeRule rule = ZeroModeRule::subtract_mean);

struct FracInfo {
    bool zero_mode_warning = false;  // s < 0, rule "zero", nonzero mean
};

// (-Delta)^s f via |xi|^(2s) on the padded frequency lattice; crop back.
ScalarField fractional_laplacian(const ScalarField& f, const FracExponent& s,
                                 const SpectralPlan& plan, FracInfo* info = nullptr);

// The periodic core without padding or cropping: the field is taken as one
// period of an m-point torus with the given step. Exact on eigenfunctions.
struct TorusField {
    int dim = 2;
    int n = 0;
    double step = 0.0;
    std::vector<double> values;
};
void fractional_laplacian_torus(TorusField& f, double s, ZeroModeRule rule);
double torus_l2_norm(const TorusField& f);

// I_alpha f = f * |x|^(-alpha), 0 < alpha < dim. Padded discrete convolution;
// the singular cell holds the analytic cell average of the kernel; the kernel
// is truncated beyond every realizable source-target separation so the
// circular convolution is exactly linear at pad_factor >= 3.
ScalarField riesz_potential(const ScalarField& f, double alpha, const SpectralPlan& plan);

// N_d realized spectrally as (-Delta)^(-d/2), up to the paper-level constant.
ScalarField normal_dplane(const ScalarField& f, int d, const SpectralPlan& plan);

// Max undivided central-difference magnitude per derivative order 0..k_max at
// grid point x0 (all mixed multi-indices of that total order).
std::vector<double> vanishing_order_probe(const ScalarField& f, const std::array<int, 3>& x0,
                                          int k_max);

// ||(-Delta)^(t/2) f|| / ||(-Delta)^(s/2) f|| on the padded torus, s >= t >= 0.
double poincare_ratio(const ScalarField& f, double s, double t, const SpectralPlan& plan);

struct UcpRankReport {
    double sigma_min = 0.0;
    double sigma_max = 0.0;
    int n_unknowns = 0;
    int n_equations = 0;
    std::string mask_digest;
};

// Stacks [ ((-Delta)^s e_j)|_V ; (P(D) e_j)|_V ] over all grid basis vectors
// and reports the extreme singular values of the constraint system. Complex
// constraint rows are split into real and imaginary parts; identically zero
// rows impose nothing and are dropped. Negative s is realized through the
// Riesz convolution with alpha = dim + 2s; positive integer s through the
// local finite-difference Laplacian (the local contrast case).
UcpRankReport ucp_rank_experiment(const GridSpec& grid, const FracExponent& s, const RegionMask& V,
                                  const PolyOperator& constraint, const SpectralPlan& plan);

// Dense matrix of the operator used by ucp_rank_experiment (column j = op e_j),
// also the building block for the Calderon module ((-Delta)^s only there).
std::vector<double> dense_fractional_matrix(const GridSpec& grid, const FracExponent& s,
                                            const SpectralPlan& plan);

}  // namespace tomolab

#endif
