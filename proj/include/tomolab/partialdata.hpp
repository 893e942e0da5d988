#ifndef TOMOLAB_PARTIALDATA_HPP
#define TOMOLAB_PARTIALDATA_HPP

#include "tomolab/vectorfield.hpp"

namespace tomolab {

enum class ProblemKind { scalar, vector };

// Partial-data setting: data on the lines through V only, plus the constraint
// P(D)f = 0 (scalar) or P(D)(curl h) = 0 (vector) sampled on V. The vector
// unknown is a stream function, so "dh = 0" is rank-testable without
// quotienting by gradients. mu is pinned to 1e4 * lambda.
struct PartialProblem {
    GridSpec grid;
    RegionMask V;
    LineSet lines;
    std::vector<std::uint8_t> through_flags;
    PolyOperator constraint;
    ProblemKind kind = ProblemKind::scalar;
    double lambda = 0.0;

    double mu() const { return 1e4 * lambda; }
    std::size_t flagged_count() const;
};

PartialProblem make_partial_problem(const GridSpec& grid, const RegionMask& V,
                                    const LineSet& lines, const PolyOperator& constraint,
                                    ProblemKind kind, double lambda);

// Entries on lines not through V become NaN (missing), never zero.
Sinogram restrict_sinogram(const Sinogram& g, const RegionMask& V);
std::size_t masked_count(const Sinogram& g);

struct CombinedRankReport {
    double sigma_min = 0.0;
    double sigma_max = 0.0;
    int rank_deficiency = 0;  // n_unknowns minus numerical rank
    int n_rows = 0;
    int n_cols = 0;
};

CombinedRankReport combined_rank_test(const PartialProblem& p);

struct ReconstructionReport {
    ScalarField scalar_solution;       // scalar kind
    VectorField vector_solution;       // vector kind (h = rot of the stream)
    ScalarField stream_function;       // vector kind
    double data_residual = 0.0;        // sinogram-norm of X f - g on flagged lines
    double constraint_residual = 0.0;  // L2 norm of P(D)f (resp. P(D) curl h) on V
    int iterations = 0;
};

// min ||X f - g||^2 + mu ||P(D) f||^2_V + lambda ||f||^2_H1 by conjugate
// gradients on the normal equations.
ReconstructionReport reconstruct_partial(const PartialProblem& p, const Sinogram& data,
                                         int max_iterations = 5000, double tolerance = 1e-12);

// Dense row assembly shared with the rank test and the test-side oracles:
// X rows (scalar: line transform; vector: line transform of rot(psi)) for the
// flagged lines, then constraint rows, then the gauge row (vector only).
struct StackedSystem {
    std::vector<std::vector<double>> rows;
    std::vector<double> rhs;           // data entries for the X rows, 0 elsewhere
    std::size_t n_data_rows = 0;
    std::size_t n_constraint_rows = 0;
};
StackedSystem assemble_partial_system(const PartialProblem& p, const Sinogram* data);

}  // namespace tomolab

#endif
