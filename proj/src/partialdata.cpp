#include "tomolab/partialdata.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <limits>

namespace tomolab {

namespace {
const double kNaN = std::numeric_limits<double>::quiet_NaN();
}

std::size_t PartialProblem::flagged_count() const {
    std::size_t c = 0;
    for (auto b : through_flags) c += b ? 1 : 0;
    return c;
}

PartialProblem make_partial_problem(const GridSpec& grid, const RegionMask& V,
                                    const LineSet& lines, const PolyOperator& constraint,
                                    ProblemKind kind, double lambda) {
    require(grid.dim == 2, errc::unsupported_dimension, "partial-data problems are 2-D");
    require(lambda >= 0.0, errc::config, "lambda must be nonnegative");
    check_same_grid(grid, V.grid, "make_partial_problem");
    require(V.count() > 0, errc::domain, "constraint region V is empty");
    PartialProblem p{grid, V, lines, lines_through_region(lines, V), constraint, kind, lambda};
    require(p.flagged_count() > 0, errc::insufficient_data, "no line passes through V");
    return p;
}

Sinogram restrict_sinogram(const Sinogram& g, const RegionMask& V) {
    auto flags = lines_through_region(g.lines, V);
    Sinogram out = g;
    for (std::size_t i = 0; i < out.values.size(); ++i)
        if (!flags[i]) out.values[i] = kNaN;
    return out;
}

std::size_t masked_count(const Sinogram& g) {
    std::size_t c = 0;
    for (double v : g.values) c += std::isnan(v) ? 1 : 0;
    return c;
}

namespace {

// Line-transform row of the vector transform over (hx, hy) unknowns.
void accumulate_vector_row(const GridSpec& grid, double theta, double offset, double scale,
                           double* row_hx, double* row_hy) {
    LineSamples samples = sample_line(grid, theta, offset);
    int n = grid.n_per_axis;
    double h = grid.spacing();
    double px = -std::sin(theta), py = std::cos(theta);
    for (std::size_t q = 0; q < samples.points.size(); ++q) {
        double gx = (samples.points[q][0] + grid.extent) / h;
        double gy = (samples.points[q][1] + grid.extent) / h;
        if (gx < 0 || gy < 0 || gx > n - 1 || gy > n - 1) continue;
        int ix = std::min(static_cast<int>(gx), n - 2);
        int iy = std::min(static_cast<int>(gy), n - 2);
        double tx = gx - ix, ty = gy - iy;
        double w = samples.weights[q] * scale;
        double hat[4] = {(1 - tx) * (1 - ty), tx * (1 - ty), (1 - tx) * ty, tx * ty};
        std::size_t idx[4] = {grid.index(ix, iy), grid.index(ix + 1, iy), grid.index(ix, iy + 1),
                              grid.index(ix + 1, iy + 1)};
        for (int c = 0; c < 4; ++c) {
            row_hx[idx[c]] += w * hat[c] * px;
            row_hy[idx[c]] += w * hat[c] * py;
        }
    }
}

void accumulate_scalar_row(const GridSpec& grid, double theta, double offset, double scale,
                           double* row) {
    LineSamples samples = sample_line(grid, theta, offset);
    int n = grid.n_per_axis;
    double h = grid.spacing();
    for (std::size_t q = 0; q < samples.points.size(); ++q) {
        double gx = (samples.points[q][0] + grid.extent) / h;
        double gy = (samples.points[q][1] + grid.extent) / h;
        if (gx < 0 || gy < 0 || gx > n - 1 || gy > n - 1) continue;
        int ix = std::min(static_cast<int>(gx), n - 2);
        int iy = std::min(static_cast<int>(gy), n - 2);
        double tx = gx - ix, ty = gy - iy;
        double w = samples.weights[q] * scale;
        row[grid.index(ix, iy)] += w * (1 - tx) * (1 - ty);
        row[grid.index(ix + 1, iy)] += w * tx * (1 - ty);
        row[grid.index(ix, iy + 1)] += w * (1 - tx) * ty;
        row[grid.index(ix + 1, iy + 1)] += w * tx * ty;
    }
}

// Stream function to vector field, h = (-d2 psi, d1 psi), as dense blocks.
std::pair<std::vector<double>, std::vector<double>> rot_matrix(const GridSpec& grid) {
    std::size_t n = grid.point_count();
    std::vector<double> rx(n * n, 0.0), ry(n * n, 0.0);  // column-major
    parallel_for(n, [&](std::size_t j) {
        ScalarField e(grid);
        e.values[j] = 1.0;
        ScalarField d1 = derivative(e, 0);
        ScalarField d2 = derivative(e, 1);
        for (std::size_t i = 0; i < n; ++i) {
            rx[j * n + i] = -d2.values[i];
            ry[j * n + i] = d1.values[i];
        }
    });
    return {std::move(rx), std::move(ry)};
}

}  // namespace

StackedSystem assemble_partial_system(const PartialProblem& p, const Sinogram* data) {
    require(p.grid.n_per_axis <= 24, errc::size, "dense assembly capped at n_per_axis = 24");
    std::size_t n = p.grid.point_count();
    StackedSystem sys;
    double w_line = std::sqrt(p.lines.angle_weight() * p.lines.offset_step());
    double w_cell = std::pow(p.grid.spacing(), p.grid.dim * 0.5);

    std::vector<std::size_t> v_idx;
    for (std::size_t i = 0; i < n; ++i)
        if (p.V.inside[i]) v_idx.push_back(i);

    std::pair<std::vector<double>, std::vector<double>> rot;
    if (p.kind == ProblemKind::vector) rot = rot_matrix(p.grid);

    int nl = p.lines.n_offsets();
    for (int k = 0; k < p.lines.n_angles(); ++k)
        for (int l = 0; l < nl; ++l) {
            std::size_t flat = static_cast<std::size_t>(k) * nl + l;
            if (!p.through_flags[flat]) continue;
            std::vector<double> row(n, 0.0);
            if (p.kind == ProblemKind::scalar) {
                accumulate_scalar_row(p.grid, p.lines.angles[k], p.lines.offsets[l], w_line,
                                      row.data());
            } else {
                std::vector<double> row_hx(n, 0.0), row_hy(n, 0.0);
                accumulate_vector_row(p.grid, p.lines.angles[k], p.lines.offsets[l], w_line,
                                      row_hx.data(), row_hy.data());
                for (std::size_t j = 0; j < n; ++j) {
                    double acc = 0.0;
                    for (std::size_t i = 0; i < n; ++i)
                        acc += row_hx[i] * rot.first[j * n + i] + row_hy[i] * rot.second[j * n + i];
                    row[j] = acc;
                }
            }
            if (data) {
                double g = data->values[flat];
                require(std::isfinite(g), errc::invalid_data, "data is missing on a flagged line");
                sys.rhs.push_back(g * w_line);
            } else {
                sys.rhs.push_back(0.0);
            }
            sys.rows.push_back(std::move(row));
        }
    sys.n_data_rows = sys.rows.size();

    // Constraint rows on V, complex rows split and zero parts dropped.
    std::vector<std::vector<double>> re_rows(v_idx.size(), std::vector<double>(n, 0.0));
    std::vector<std::vector<double>> im_rows(v_idx.size(), std::vector<double>(n, 0.0));
    parallel_for(n, [&](std::size_t j) {
        ScalarField e(p.grid);
        e.values[j] = 1.0;
        ScalarField target;
        if (p.kind == ProblemKind::scalar) {
            target = e;
        } else {
            VectorField h(p.grid);
            for (std::size_t i = 0; i < n; ++i) {
                h.components[0].values[i] = rot.first[j * n + i];
                h.components[1].values[i] = rot.second[j * n + i];
            }
            target = curl2d(h);
        }
        ComplexField pj = apply_poly_operator(target, p.constraint);
        for (std::size_t k = 0; k < v_idx.size(); ++k) {
            re_rows[k][j] = pj.values[v_idx[k]].real() * w_cell;
            im_rows[k][j] = pj.values[v_idx[k]].imag() * w_cell;
        }
    });
    auto row_norm = [](const std::vector<double>& row) {
        double acc = 0.0;
        for (double v : row) acc += v * v;
        return std::sqrt(acc);
    };
    double max_norm = 0.0;
    for (const auto& r : re_rows) max_norm = std::max(max_norm, row_norm(r));
    for (const auto& r : im_rows) max_norm = std::max(max_norm, row_norm(r));
    for (auto* block : {&re_rows, &im_rows})
        for (auto& r : *block)
            if (row_norm(r) > 1e-12 * max_norm) {
                sys.rows.push_back(std::move(r));
                sys.rhs.push_back(0.0);
            }
    sys.n_constraint_rows = sys.rows.size() - sys.n_data_rows;

    if (p.kind == ProblemKind::vector) {
        // gauge row: pins the additive constant of the stream function
        std::vector<double> ones(n, w_cell);
        sys.rows.push_back(std::move(ones));
        sys.rhs.push_back(0.0);
    }
    return sys;
}

CombinedRankReport combined_rank_test(const PartialProblem& p) {
    StackedSystem sys = assemble_partial_system(p, nullptr);
    std::size_t n = p.grid.point_count();
    Eigen::MatrixXd M(static_cast<Eigen::Index>(sys.rows.size()), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < sys.rows.size(); ++i)
        for (std::size_t j = 0; j < n; ++j)
            M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = sys.rows[i][j];
    Eigen::BDCSVD<Eigen::MatrixXd> svd(M);
    const auto& sv = svd.singularValues();
    CombinedRankReport report;
    report.n_rows = static_cast<int>(sys.rows.size());
    report.n_cols = static_cast<int>(n);
    report.sigma_max = sv.size() ? sv(0) : 0.0;
    report.sigma_min = sv.size() ? sv(sv.size() - 1) : 0.0;
    double tol = std::max(report.n_rows, report.n_cols) *
                 std::numeric_limits<double>::epsilon() * report.sigma_max;
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > tol) ++rank;
    report.rank_deficiency = report.n_cols - rank;
    return report;
}

namespace {

struct DenseOp {
    const std::vector<std::vector<double>>& rows;
    std::size_t n;

    std::vector<double> normal_apply(const std::vector<double>& x) const {
        std::vector<double> y(n, 0.0);
        for (const auto& row : rows) {
            double dot = 0.0;
            for (std::size_t j = 0; j < n; ++j) dot += row[j] * x[j];
            for (std::size_t j = 0; j < n; ++j) y[j] += dot * row[j];
        }
        return y;
    }
};

}  // namespace

ReconstructionReport reconstruct_partial(const PartialProblem& p, const Sinogram& data,
                                         int max_iterations, double tolerance) {
    StackedSystem sys = assemble_partial_system(p, &data);
    std::size_t n = p.grid.point_count();
    double mu = p.mu();
    double sqrt_mu = std::sqrt(mu);
    for (std::size_t i = sys.n_data_rows; i < sys.n_data_rows + sys.n_constraint_rows; ++i)
        for (double& v : sys.rows[i]) v *= sqrt_mu;

    // H1 block: sqrt(lambda) times identity and forward-difference rows.
    double w_cell = std::pow(p.grid.spacing(), p.grid.dim * 0.5);
    double sqrt_lambda = std::sqrt(p.lambda);
    int ng = p.grid.n_per_axis;
    double h = p.grid.spacing();
    if (p.lambda > 0.0) {
        for (std::size_t j = 0; j < n; ++j) {
            std::vector<double> row(n, 0.0);
            row[j] = sqrt_lambda * w_cell;
            sys.rows.push_back(std::move(row));
            sys.rhs.push_back(0.0);
        }
        for (int axis = 0; axis < 2; ++axis)
            for (int iy = 0; iy < ng; ++iy)
                for (int ix = 0; ix < ng; ++ix) {
                    int jx = ix + (axis == 0 ? 1 : 0), jy = iy + (axis == 1 ? 1 : 0);
                    if (jx >= ng || jy >= ng) continue;
                    std::vector<double> row(n, 0.0);
                    row[p.grid.index(jx, jy)] = sqrt_lambda * w_cell / h;
                    row[p.grid.index(ix, iy)] = -sqrt_lambda * w_cell / h;
                    sys.rows.push_back(std::move(row));
                    sys.rhs.push_back(0.0);
                }
    }

    // Conjugate gradients on the normal equations.
    DenseOp op{sys.rows, n};
    std::vector<double> b(n, 0.0);
    for (std::size_t i = 0; i < sys.rows.size(); ++i)
        if (sys.rhs[i] != 0.0)
            for (std::size_t j = 0; j < n; ++j) b[j] += sys.rhs[i] * sys.rows[i][j];

    std::vector<double> x(n, 0.0), r = b, d = b;
    double b_norm2 = 0.0;
    for (double v : b) b_norm2 += v * v;
    double r_norm2 = b_norm2;
    int iter = 0;
    if (b_norm2 > 0.0) {
        for (; iter < max_iterations; ++iter) {
            if (std::sqrt(r_norm2 / b_norm2) <= tolerance) break;
            std::vector<double> q = op.normal_apply(d);
            double dq = 0.0;
            for (std::size_t j = 0; j < n; ++j) dq += d[j] * q[j];
            if (dq <= 0.0) break;  // numerically singular direction
            double alpha = r_norm2 / dq;
            for (std::size_t j = 0; j < n; ++j) {
                x[j] += alpha * d[j];
                r[j] -= alpha * q[j];
            }
            double r_new = 0.0;
            for (double v : r) r_new += v * v;
            double beta = r_new / r_norm2;
            r_norm2 = r_new;
            for (std::size_t j = 0; j < n; ++j) d[j] = r[j] + beta * d[j];
        }
        if (iter >= max_iterations && std::sqrt(r_norm2 / b_norm2) > tolerance)
            fail(errc::convergence,
                 "conjugate gradients did not converge in " + std::to_string(max_iterations) +
                     " iterations (relative residual " +
                     std::to_string(std::sqrt(r_norm2 / b_norm2)) + ")");
    }

    ReconstructionReport report;
    report.iterations = iter;

    double data_res2 = 0.0;
    for (std::size_t i = 0; i < sys.n_data_rows; ++i) {
        double dot = 0.0;
        for (std::size_t j = 0; j < n; ++j) dot += sys.rows[i][j] * x[j];
        data_res2 += (dot - sys.rhs[i]) * (dot - sys.rhs[i]);
    }
    report.data_residual = std::sqrt(data_res2);

    double cons_res2 = 0.0;
    for (std::size_t i = sys.n_data_rows; i < sys.n_data_rows + sys.n_constraint_rows; ++i) {
        double dot = 0.0;
        for (std::size_t j = 0; j < n; ++j) dot += sys.rows[i][j] * x[j];
        cons_res2 += dot * dot;
    }
    report.constraint_residual = mu > 0.0 ? std::sqrt(cons_res2 / mu) : std::sqrt(cons_res2);

    if (p.kind == ProblemKind::scalar) {
        report.scalar_solution = ScalarField(p.grid);
        report.scalar_solution.values = x;
    } else {
        report.stream_function = ScalarField(p.grid);
        report.stream_function.values = x;
        report.vector_solution = VectorField(p.grid);
        ScalarField d1 = derivative(report.stream_function, 0);
        ScalarField d2 = derivative(report.stream_function, 1);
        for (std::size_t i = 0; i < n; ++i) {
            report.vector_solution.components[0].values[i] = -d2.values[i];
            report.vector_solution.components[1].values[i] = d1.values[i];
        }
    }
    return report;
}

}  // namespace tomolab
