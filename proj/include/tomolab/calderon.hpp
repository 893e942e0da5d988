#ifndef TOMOLAB_CALDERON_HPP
#define TOMOLAB_CALDERON_HPP

#include "tomolab/fractional.hpp"

namespace tomolab {

// Dense symmetric realization of (-Delta)^s on a small 2-D grid, assembled
// column by column from the spectral operator and symmetrized by averaging.
struct FracOperatorMatrix {
    GridSpec grid;
    FracExponent s;
    SpectralPlan plan;
    std::vector<double> matrix;  // column-major N x N
    double symmetry_defect = 0.0;

    std::size_t size() const { return grid.point_count(); }
    double entry(std::size_t i, std::size_t j) const { return matrix[j * size() + i]; }
};

FracOperatorMatrix assemble_fractional_matrix(const GridSpec& grid, const FracExponent& s,
                                              const SpectralPlan& plan);

// Omega strictly inside the grid; W1, W2 in the exterior and disjoint from it.
struct DomainSplit {
    GridSpec grid;
    RegionMask omega;
    RegionMask w1;
    RegionMask w2;

    std::vector<std::size_t> omega_cells() const;
    std::vector<std::size_t> exterior_cells() const;
    std::vector<std::size_t> w1_cells() const;
    std::vector<std::size_t> w2_cells() const;
};

DomainSplit make_domain_split(const GridSpec& grid, const RegionMask& omega, const RegionMask& w1,
                              const RegionMask& w2);

// Lower-order local perturbation: order 0 carries the potential q on Omega;
// order 1 adds the real drift b . grad with coefficients supported on Omega
// (requires 2s > 1).
struct Perturbation {
    int order = 0;
    ScalarField q;
    ScalarField b1, b2;

    static Perturbation none(const GridSpec& grid);
    static Perturbation potential(const ScalarField& q, const RegionMask& omega);
    static Perturbation drift(const ScalarField& b1, const ScalarField& b2,
                              const RegionMask& omega, double s);
};

// u = f on the exterior, interior block solves the Dirichlet problem;
// throws the dirichlet-eigenvalue error when the interior block is singular.
ScalarField solve_exterior_problem(const FracOperatorMatrix& As, const DomainSplit& split,
                                   const Perturbation& pert,
                                   const std::vector<double>& exterior_values);

// Columns: exterior currents ((As + pert) u_f) on W2 for the basis exterior
// values f = e_j on W1.
struct DnMap {
    std::vector<double> matrix;  // column-major, |W2| x |W1|
    std::size_t n_w1 = 0;
    std::size_t n_w2 = 0;
    double entry(std::size_t i, std::size_t j) const { return matrix[j * n_w2 + i]; }
};

DnMap dn_map(const FracOperatorMatrix& As, const DomainSplit& split, const Perturbation& pert);

// max over the trial pairs of |<(L1-L2)f1, f2> - <(q1-q2) u1, u2>_Omega|
// relative to the pair scale; both sides through independent code paths.
double alessandrini_residual(const FracOperatorMatrix& As, const DomainSplit& split,
                             const Perturbation& pert1, const Perturbation& pert2,
                             const std::vector<std::pair<std::vector<double>,
                                                         std::vector<double>>>& trial_pairs);

// Nonincreasing least-squares errors of the target against spans of
// { u_{e_j}|_Omega : j < k } for k = 1..n_exterior_basis.
std::vector<double> runge_demo(const FracOperatorMatrix& As, const DomainSplit& split,
                               const ScalarField& target, int n_exterior_basis);

struct PotentialRecovery {
    ScalarField q;          // estimate on Omega (zero outside)
    double residual = 0.0;  // relative linear-system residual
};

// Linearized recovery: solves M q = vec(L_measured - L_0) in Tikhonov least
// squares, rows of M being the Omega-pointwise products of q = 0 solutions.
PotentialRecovery recover_potential_linearized(const FracOperatorMatrix& As,
                                               const DomainSplit& split, const DnMap& measured,
                                               double lambda_reg);

// Exterior value supported on W1 from a coefficient vector over w1_cells().
std::vector<double> exterior_from_w1(const DomainSplit& split, const std::vector<double>& coeffs);

}  // namespace tomolab

#endif
