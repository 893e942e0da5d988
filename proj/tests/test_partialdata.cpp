#include <doctest.h>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <limits>

#include "tomolab/partialdata.hpp"

using namespace tomolab;

namespace {

ScalarField offset_bump(const GridSpec& g, double cx, double cy, double sigma) {
    ScalarField f(g);
    for (int iy = 0; iy < g.n_per_axis; ++iy)
        for (int ix = 0; ix < g.n_per_axis; ++ix) {
            double x = g.coord(ix) - cx, y = g.coord(iy) - cy;
            f.at(ix, iy) = std::exp(-(x * x + y * y) / (2.0 * sigma * sigma));
        }
    return f;
}

double rel_l2_error(const std::vector<double>& got, const std::vector<double>& want) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < got.size(); ++i) {
        num += (got[i] - want[i]) * (got[i] - want[i]);
        den += want[i] * want[i];
    }
    return std::sqrt(num / den);
}

}  // namespace

TEST_CASE("sinogram restriction") {
    GridSpec g = make_grid(2, 16, 1.0);
    LineSet lines = make_uniform_lines(24, 25, 1.0);
    ScalarField f = make_scalar_phantom(g, PhantomKind::gaussian_bumps, 1);
    Sinogram full = xray_forward(f, lines);

    SUBCASE("full grid masks nothing that meets the square") {
        Sinogram r = restrict_sinogram(full, make_full_mask(g));
        for (int k = 0; k < lines.n_angles(); ++k)
            for (int l = 0; l < lines.n_offsets(); ++l) {
                bool touches = !sample_line(g, lines.angles[k], lines.offsets[l]).points.empty();
                CHECK(std::isnan(r.at(k, l)) == !touches);
            }
    }

    SUBCASE("masked count equals the region predicate") {
        RegionMask V = make_disk_mask(g, {0.2, -0.1, 0.0}, 0.3);
        Sinogram r = restrict_sinogram(full, V);
        auto flags = lines_through_region(lines, V);
        std::size_t unflagged = 0;
        for (auto b : flags) unflagged += b ? 0 : 1;
        CHECK(masked_count(r) == unflagged);
        for (std::size_t i = 0; i < r.values.size(); ++i)
            if (!flags[i]) CHECK(std::isnan(r.values[i]));  // missing, never zero
    }
}

TEST_CASE("combined rank tests") {
    GridSpec g = make_grid(2, 16, 1.0);
    LineSet lines = make_uniform_lines(60, 33, 1.0);

    SUBCASE("scalar partial data with f|_V = 0 has no rank deficiency") {
        RegionMask V = make_block_mask(g, {6, 6, 0}, 3);
        auto p = make_partial_problem(g, V, lines, PolyOperator::one(), ProblemKind::scalar, 1e-8);
        auto rep = combined_rank_test(p);
        CHECK(rep.rank_deficiency == 0);
        CHECK(rep.sigma_min > 0.0);

        // full data keeps full rank and strictly improves sigma_min
        PartialProblem full = p;
        std::fill(full.through_flags.begin(), full.through_flags.end(), 1);
        auto rep_full = combined_rank_test(full);
        CHECK(rep_full.rank_deficiency == 0);
        CHECK(rep_full.sigma_min > rep.sigma_min);
    }

    SUBCASE("a corner block leaves numerically invisible cells") {
        // The restricted fan through an extreme corner block conditions so
        // badly that cells far from the fan fall below machine rank; the
        // uniqueness statement survives in the continuum, the conditioning
        // does not. Kept as the documented negative geometry.
        RegionMask V = make_block_mask(g, {0, 0, 0}, 3);
        auto p = make_partial_problem(g, V, lines, PolyOperator::one(), ProblemKind::scalar, 1e-8);
        auto rep = combined_rank_test(p);
        CHECK(rep.rank_deficiency > 0);
    }

    SUBCASE("vector problem on the stream function has no rank deficiency") {
        GridSpec g12 = make_grid(2, 12, 1.0);
        RegionMask V = make_block_mask(g12, {0, 0, 0}, 3);
        LineSet lines12 = make_uniform_lines(60, 25, 1.0);
        auto p =
            make_partial_problem(g12, V, lines12, PolyOperator::one(), ProblemKind::vector, 1e-8);
        auto rep = combined_rank_test(p);
        CHECK(rep.rank_deficiency == 0);
        CHECK(rep.sigma_min > 0.0);
    }

    SUBCASE("sigma_min is monotone under nested masks") {
        RegionMask v1 = make_block_mask(g, {6, 6, 0}, 3);
        RegionMask v2 = make_block_mask(g, {5, 5, 0}, 5);
        RegionMask v3 = make_block_mask(g, {4, 4, 0}, 7);
        auto r1 = combined_rank_test(
            make_partial_problem(g, v1, lines, PolyOperator::one(), ProblemKind::scalar, 0.0));
        auto r2 = combined_rank_test(
            make_partial_problem(g, v2, lines, PolyOperator::one(), ProblemKind::scalar, 0.0));
        auto r3 = combined_rank_test(
            make_partial_problem(g, v3, lines, PolyOperator::one(), ProblemKind::scalar, 0.0));
        CHECK(r2.sigma_min >= r1.sigma_min * (1.0 - 1e-9));
        CHECK(r3.sigma_min >= r2.sigma_min * (1.0 - 1e-9));
    }

    SUBCASE("for P = 1 the constraint rows are plain restriction rows") {
        RegionMask V = make_block_mask(g, {6, 6, 0}, 3);
        auto p = make_partial_problem(g, V, lines, PolyOperator::one(), ProblemKind::scalar, 0.0);
        StackedSystem sys = assemble_partial_system(p, nullptr);
        CHECK(sys.n_constraint_rows == 9);
        double w_cell = g.spacing();
        for (std::size_t i = sys.n_data_rows; i < sys.rows.size(); ++i) {
            int nonzero = 0;
            for (std::size_t j = 0; j < sys.rows[i].size(); ++j)
                if (sys.rows[i][j] != 0.0) {
                    ++nonzero;
                    CHECK(sys.rows[i][j] == doctest::Approx(w_cell));
                    CHECK(V.inside[j]);
                }
            CHECK(nonzero == 1);
        }
    }

    SUBCASE("oversized grids are rejected") {
        GridSpec big = make_grid(2, 32, 1.0);
        RegionMask V = make_block_mask(big, {0, 0, 0}, 3);
        auto p = make_partial_problem(big, V, lines, PolyOperator::one(), ProblemKind::scalar, 0.0);
        CHECK_THROWS_AS(combined_rank_test(p), error);
    }
}

TEST_CASE("constrained reconstruction, scalar") {
    GridSpec g = make_grid(2, 16, 1.0);
    LineSet lines = make_uniform_lines(60, 33, 1.0);
    RegionMask V = make_block_mask(g, {6, 6, 0}, 3);
    auto p = make_partial_problem(g, V, lines, PolyOperator::one(), ProblemKind::scalar, 1e-8);

    ScalarField truth = offset_bump(g, 0.45, 0.25, 0.12);
    Sinogram data = restrict_sinogram(xray_forward(truth, lines), V);

    SUBCASE("noise-free recovery within the frozen 20% bound") {
        auto rec = reconstruct_partial(p, data);
        CHECK(rel_l2_error(rec.scalar_solution.values, truth.values) <= 0.20);

        // SVD pseudo-inverse oracle on the same stacked system
        StackedSystem sys = assemble_partial_system(p, &data);
        double sqrt_mu = std::sqrt(p.mu());
        for (std::size_t i = sys.n_data_rows; i < sys.rows.size(); ++i)
            for (double& v : sys.rows[i]) v *= sqrt_mu;
        Eigen::MatrixXd M(static_cast<Eigen::Index>(sys.rows.size()), 256);
        Eigen::VectorXd b(static_cast<Eigen::Index>(sys.rows.size()));
        for (std::size_t i = 0; i < sys.rows.size(); ++i) {
            b(static_cast<Eigen::Index>(i)) = sys.rhs[i];
            for (std::size_t j = 0; j < 256; ++j)
                M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = sys.rows[i][j];
        }
        Eigen::BDCSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
        svd.setThreshold(1e-10);
        Eigen::VectorXd oracle = svd.solve(b);
        std::vector<double> ovec(oracle.data(), oracle.data() + oracle.size());
        CHECK(rel_l2_error(ovec, truth.values) <= 0.20);
    }

    SUBCASE("zero data reconstructs zero") {
        Sinogram zero = data;
        for (auto& v : zero.values)
            if (std::isfinite(v)) v = 0.0;
        auto rec = reconstruct_partial(p, zero);
        CHECK(rec.scalar_solution.max_abs() <= 1e-6);
    }

    SUBCASE("doubling lambda never decreases the data residual") {
        auto p2 = make_partial_problem(g, V, lines, PolyOperator::one(), ProblemKind::scalar, 2e-8);
        auto p4 = make_partial_problem(g, V, lines, PolyOperator::one(), ProblemKind::scalar, 4e-8);
        double r1 = reconstruct_partial(p, data).data_residual;
        double r2 = reconstruct_partial(p2, data).data_residual;
        double r4 = reconstruct_partial(p4, data).data_residual;
        CHECK(r2 >= r1 * (1.0 - 1e-9));
        CHECK(r4 >= r2 * (1.0 - 1e-9));
    }

    SUBCASE("descent against the zero field") {
        auto rec = reconstruct_partial(p, data);
        double zero_res = 0.0;
        double w = lines.angle_weight() * lines.offset_step();
        for (double v : data.values)
            if (std::isfinite(v)) zero_res += w * v * v;
        CHECK(rec.data_residual <= std::sqrt(zero_res));
    }

    SUBCASE("missing data on a flagged line is rejected") {
        Sinogram bad(lines);
        for (auto& v : bad.values) v = std::numeric_limits<double>::quiet_NaN();
        CHECK_THROWS_AS(reconstruct_partial(p, bad), error);
    }
}

TEST_CASE("constrained reconstruction, vector via stream function") {
    GridSpec g = make_grid(2, 12, 1.0);
    LineSet lines = make_uniform_lines(60, 25, 1.0);
    RegionMask V = make_block_mask(g, {0, 0, 0}, 3);
    auto p = make_partial_problem(g, V, lines, PolyOperator::one(), ProblemKind::vector, 1e-8);

    // Truth built through the same stream-function parametrization the solver
    // uses, with the stream supported away from V so curl h vanishes there.
    ScalarField psi = offset_bump(g, 0.3, 0.2, 0.25);
    VectorField truth(g);
    {
        ScalarField d1 = derivative(psi, 0), d2 = derivative(psi, 1);
        for (std::size_t i = 0; i < psi.values.size(); ++i) {
            truth.components[0].values[i] = -d2.values[i];
            truth.components[1].values[i] = d1.values[i];
        }
    }
    Sinogram data(lines);
    {
        VectorSinogram vs = xray_vector(truth, lines);
        data.values = vs.values;
    }
    auto flags = lines_through_region(lines, V);
    for (std::size_t i = 0; i < data.values.size(); ++i)
        if (!flags[i]) data.values[i] = std::numeric_limits<double>::quiet_NaN();

    auto rec = reconstruct_partial(p, data);

    SUBCASE("solenoidal truth is recovered") {
        CHECK(rel_l2_error(rec.vector_solution.components[0].values,
                           truth.components[0].values) <= 0.20);
        CHECK(rel_l2_error(rec.vector_solution.components[1].values,
                           truth.components[1].values) <= 0.20);
    }

    SUBCASE("the recovered curl vanishes on V") {
        ScalarField curl = curl2d(rec.vector_solution);
        double scale = curl.max_abs();
        double worst_on_v = 0.0;
        for (std::size_t i = 0; i < curl.values.size(); ++i)
            if (V.inside[i]) worst_on_v = std::max(worst_on_v, std::abs(curl.values[i]));
        CHECK(worst_on_v <= 1e-3 * scale);
    }
}
