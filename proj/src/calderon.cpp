#include "tomolab/calderon.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>

namespace tomolab {

FracOperatorMatrix assemble_fractional_matrix(const GridSpec& grid, const FracExponent& s,
                                              const SpectralPlan& plan) {
    require(grid.dim == 2, errc::unsupported_dimension, "FracOperatorMatrix is 2-D");
    require(grid.point_count() <= 1024, errc::size, "dense operator capped at N = 1024");
    require(s.s > 0.0, errc::domain, "the Calderon operator needs s > 0");
    check_same_grid(grid, plan.grid, "assemble_fractional_matrix");

    FracOperatorMatrix out{grid, s, plan, {}, 0.0};
    std::size_t n = grid.point_count();
    out.matrix.assign(n * n, 0.0);
    parallel_for(n, [&](std::size_t j) {
        ScalarField e(grid);
        e.values[j] = 1.0;
        ScalarField col = fractional_laplacian(e, s, plan);
        for (std::size_t i = 0; i < n; ++i) out.matrix[j * n + i] = col.values[i];
    });

    double defect = 0.0, scale = 0.0;
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < j; ++i) {
            double a = out.matrix[j * n + i], b = out.matrix[i * n + j];
            defect = std::max(defect, std::abs(a - b));
            scale = std::max(scale, std::abs(a));
            double avg = 0.5 * (a + b);
            out.matrix[j * n + i] = avg;
            out.matrix[i * n + j] = avg;
        }
    out.symmetry_defect = scale > 0.0 ? defect / scale : 0.0;
    return out;
}

std::vector<std::size_t> DomainSplit::omega_cells() const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < omega.inside.size(); ++i)
        if (omega.inside[i]) idx.push_back(i);
    return idx;
}

std::vector<std::size_t> DomainSplit::exterior_cells() const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < omega.inside.size(); ++i)
        if (!omega.inside[i]) idx.push_back(i);
    return idx;
}

std::vector<std::size_t> DomainSplit::w1_cells() const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < w1.inside.size(); ++i)
        if (w1.inside[i]) idx.push_back(i);
    return idx;
}

std::vector<std::size_t> DomainSplit::w2_cells() const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < w2.inside.size(); ++i)
        if (w2.inside[i]) idx.push_back(i);
    return idx;
}

DomainSplit make_domain_split(const GridSpec& grid, const RegionMask& omega, const RegionMask& w1,
                              const RegionMask& w2) {
    check_same_grid(grid, omega.grid, "make_domain_split");
    check_same_grid(grid, w1.grid, "make_domain_split");
    check_same_grid(grid, w2.grid, "make_domain_split");
    require(omega.count() > 0, errc::domain, "Omega is empty");
    require(w1.count() > 0 && w2.count() > 0, errc::domain, "W1 and W2 must be nonempty");
    int n = grid.n_per_axis;
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix) {
            std::size_t i = grid.index(ix, iy);
            if (omega.inside[i])
                require(ix > 0 && ix < n - 1 && iy > 0 && iy < n - 1, errc::domain,
                        "Omega must be strictly inside the grid");
            require(!(omega.inside[i] && (w1.inside[i] || w2.inside[i])), errc::domain,
                    "W1 and W2 must be disjoint from Omega");
        }
    return DomainSplit{grid, omega, w1, w2};
}

Perturbation Perturbation::none(const GridSpec& grid) {
    Perturbation p;
    p.order = 0;
    p.q = ScalarField(grid);
    return p;
}

Perturbation Perturbation::potential(const ScalarField& q, const RegionMask& omega) {
    check_same_grid(q.grid, omega.grid, "Perturbation::potential");
    Perturbation p;
    p.order = 0;
    p.q = q;
    for (std::size_t i = 0; i < p.q.values.size(); ++i)
        if (!omega.inside[i]) p.q.values[i] = 0.0;  // coefficients live on Omega
    return p;
}

Perturbation Perturbation::drift(const ScalarField& b1, const ScalarField& b2,
                                 const RegionMask& omega, double s) {
    require(2.0 * s > 1.0, errc::domain, "first-order perturbations need 2s > 1");
    check_same_grid(b1.grid, omega.grid, "Perturbation::drift");
    check_same_grid(b2.grid, omega.grid, "Perturbation::drift");
    Perturbation p;
    p.order = 1;
    p.q = ScalarField(b1.grid);
    p.b1 = b1;
    p.b2 = b2;
    for (std::size_t i = 0; i < p.b1.values.size(); ++i)
        if (!omega.inside[i]) {
            p.b1.values[i] = 0.0;
            p.b2.values[i] = 0.0;
        }
    return p;
}

namespace {

// Dense matrix of the perturbation; rows vanish outside Omega because the
// coefficients are clipped there.
std::vector<double> perturbation_matrix(const GridSpec& grid, const Perturbation& pert) {
    std::size_t n = grid.point_count();
    std::vector<double> P(n * n, 0.0);
    if (pert.order == 1) {
        // b . grad with the shared central stencils (real form of the
        // first-order symbol)
        parallel_for(n, [&](std::size_t j) {
            ScalarField e(grid);
            e.values[j] = 1.0;
            ScalarField d1 = derivative(e, 0);
            ScalarField d2 = derivative(e, 1);
            for (std::size_t i = 0; i < n; ++i) {
                double v = pert.b1.values[i] * d1.values[i] + pert.b2.values[i] * d2.values[i];
                if (v != 0.0) P[j * n + i] = v;
            }
        });
    }
    if (!pert.q.values.empty())
        for (std::size_t i = 0; i < n; ++i) P[i * n + i] += pert.q.values[i];
    return P;
}

struct InteriorSolver {
    std::vector<std::size_t> omega;
    std::vector<std::size_t> exterior;
    Eigen::MatrixXd full;  // A + P
    Eigen::FullPivLU<Eigen::MatrixXd> lu;

    InteriorSolver(const FracOperatorMatrix& As, const DomainSplit& split,
                   const Perturbation& pert) {
        require(pert.order == 0 || 2.0 * As.s.s > 1.0, errc::domain,
                "first-order perturbations need 2s > 1");
        std::size_t n = As.size();
        omega = split.omega_cells();
        exterior = split.exterior_cells();

        std::vector<double> P = perturbation_matrix(As.grid, pert);
        full.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t i = 0; i < n; ++i)
                full(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                    As.matrix[j * n + i] + P[j * n + i];

        Eigen::MatrixXd interior(omega.size(), omega.size());
        for (std::size_t b = 0; b < omega.size(); ++b)
            for (std::size_t a = 0; a < omega.size(); ++a)
                interior(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
                    full(static_cast<Eigen::Index>(omega[a]), static_cast<Eigen::Index>(omega[b]));
        lu.setThreshold(1e-10);
        lu.compute(interior);
        require(lu.isInvertible(), errc::dirichlet_eigenvalue,
                "interior block is singular: zero is a Dirichlet eigenvalue of the operator");
    }

    // exterior_values indexed over exterior_cells() order
    std::vector<double> solve(const std::vector<double>& exterior_values) const {
        require(exterior_values.size() == exterior.size(), errc::shape,
                "exterior value vector has the wrong length");
        std::size_t n = static_cast<std::size_t>(full.rows());
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(omega.size()));
        for (std::size_t e = 0; e < exterior.size(); ++e) {
            double f = exterior_values[e];
            if (f == 0.0) continue;
            for (std::size_t a = 0; a < omega.size(); ++a)
                rhs(static_cast<Eigen::Index>(a)) -=
                    full(static_cast<Eigen::Index>(omega[a]),
                         static_cast<Eigen::Index>(exterior[e])) *
                    f;
        }
        Eigen::VectorXd u_omega = lu.solve(rhs);
        std::vector<double> u(n, 0.0);
        for (std::size_t e = 0; e < exterior.size(); ++e) u[exterior[e]] = exterior_values[e];
        for (std::size_t a = 0; a < omega.size(); ++a)
            u[omega[a]] = u_omega(static_cast<Eigen::Index>(a));
        return u;
    }

    std::vector<double> current_at(const std::vector<double>& u,
                                   const std::vector<std::size_t>& cells) const {
        std::size_t n = static_cast<std::size_t>(full.rows());
        std::vector<double> out(cells.size(), 0.0);
        for (std::size_t k = 0; k < cells.size(); ++k) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j)
                acc +=
                    full(static_cast<Eigen::Index>(cells[k]), static_cast<Eigen::Index>(j)) * u[j];
            out[k] = acc;
        }
        return out;
    }
};

}  // namespace

std::vector<double> exterior_from_w1(const DomainSplit& split, const std::vector<double>& coeffs) {
    auto w1 = split.w1_cells();
    require(coeffs.size() == w1.size(), errc::shape, "W1 coefficient count mismatch");
    auto exterior = split.exterior_cells();
    std::vector<double> f(exterior.size(), 0.0);
    std::size_t k = 0;
    for (std::size_t e = 0; e < exterior.size(); ++e)
        if (k < w1.size() && exterior[e] == w1[k]) f[e] = coeffs[k++];
    require(k == w1.size(), errc::internal, "W1 cells not contained in the exterior");
    return f;
}

ScalarField solve_exterior_problem(const FracOperatorMatrix& As, const DomainSplit& split,
                                   const Perturbation& pert,
                                   const std::vector<double>& exterior_values) {
    InteriorSolver solver(As, split, pert);
    ScalarField out(As.grid);
    out.values = solver.solve(exterior_values);
    return out;
}

DnMap dn_map(const FracOperatorMatrix& As, const DomainSplit& split, const Perturbation& pert) {
    InteriorSolver solver(As, split, pert);
    auto w1 = split.w1_cells();
    auto w2 = split.w2_cells();
    auto exterior = split.exterior_cells();
    DnMap map;
    map.n_w1 = w1.size();
    map.n_w2 = w2.size();
    map.matrix.assign(w1.size() * w2.size(), 0.0);
    parallel_for(w1.size(), [&](std::size_t j) {
        std::vector<double> f(exterior.size(), 0.0);
        for (std::size_t e = 0; e < exterior.size(); ++e)
            if (exterior[e] == w1[j]) f[e] = 1.0;
        std::vector<double> u = solver.solve(f);
        std::vector<double> current = solver.current_at(u, w2);
        for (std::size_t i = 0; i < w2.size(); ++i) map.matrix[j * w2.size() + i] = current[i];
    });
    return map;
}

double alessandrini_residual(
    const FracOperatorMatrix& As, const DomainSplit& split, const Perturbation& pert1,
    const Perturbation& pert2,
    const std::vector<std::pair<std::vector<double>, std::vector<double>>>& trial_pairs) {
    require(pert1.order == 0 && pert2.order == 0, errc::domain,
            "the Alessandrini check runs on order-0 perturbations");
    InteriorSolver s1(As, split, pert1);
    InteriorSolver s2(As, split, pert2);
    auto w1 = split.w1_cells();
    auto w2 = split.w2_cells();
    auto omega = split.omega_cells();
    auto exterior = split.exterior_cells();

    double worst = 0.0;
    for (const auto& [c1, c2] : trial_pairs) {
        require(c1.size() == w1.size() && c2.size() == w2.size(), errc::shape,
                "trial pair has wrong lengths");
        std::vector<double> f1 = exterior_from_w1(split, c1);
        std::vector<double> f2(exterior.size(), 0.0);
        {
            std::size_t k = 0;
            for (std::size_t e = 0; e < exterior.size(); ++e)
                if (k < w2.size() && exterior[e] == w2[k]) f2[e] = c2[k++];
        }
        // left side: <(L1 - L2) f1, f2>, currents on W2
        std::vector<double> u1 = s1.solve(f1);
        std::vector<double> u1_tilde = s2.solve(f1);
        std::vector<double> cur1 = s1.current_at(u1, w2);
        std::vector<double> cur2 = s2.current_at(u1_tilde, w2);
        double lhs = 0.0;
        for (std::size_t i = 0; i < w2.size(); ++i) lhs += (cur1[i] - cur2[i]) * c2[i];
        // right side: <(q1 - q2) u1, u2>_Omega, u2 solving with pert2
        std::vector<double> u2 = s2.solve(f2);
        double rhs = 0.0;
        for (std::size_t c : omega) rhs += (pert1.q.values[c] - pert2.q.values[c]) * u1[c] * u2[c];
        double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
        worst = std::max(worst, std::abs(lhs - rhs) / scale);
    }
    return worst;
}

std::vector<double> runge_demo(const FracOperatorMatrix& As, const DomainSplit& split,
                               const ScalarField& target, int n_exterior_basis) {
    check_same_grid(As.grid, target.grid, "runge_demo");
    auto omega = split.omega_cells();
    for (std::size_t i = 0; i < target.values.size(); ++i)
        if (!split.omega.inside[i] && target.values[i] != 0.0)
            fail(errc::domain, "runge target must be supported in Omega");

    InteriorSolver solver(As, split, Perturbation::none(As.grid));
    auto w1 = split.w1_cells();
    auto exterior = split.exterior_cells();
    int k_max = std::min<int>(n_exterior_basis, static_cast<int>(w1.size()));
    require(k_max >= 1, errc::config, "need at least one exterior basis vector");

    Eigen::MatrixXd B(static_cast<Eigen::Index>(omega.size()), k_max);
    for (int j = 0; j < k_max; ++j) {
        std::vector<double> f(exterior.size(), 0.0);
        for (std::size_t e = 0; e < exterior.size(); ++e)
            if (exterior[e] == w1[static_cast<std::size_t>(j)]) f[e] = 1.0;
        std::vector<double> u = solver.solve(f);
        for (std::size_t a = 0; a < omega.size(); ++a)
            B(static_cast<Eigen::Index>(a), j) = u[omega[a]];
    }
    Eigen::VectorXd t(static_cast<Eigen::Index>(omega.size()));
    for (std::size_t a = 0; a < omega.size(); ++a)
        t(static_cast<Eigen::Index>(a)) = target.values[omega[a]];
    double t_norm = t.norm();
    require(t_norm > 0.0, errc::degenerate_input, "runge target is zero on Omega");

    // Incremental modified Gram-Schmidt: each accepted direction can only
    // shrink the residual, so the reported error curve is nonincreasing by
    // construction; near-dependent columns leave it unchanged.
    std::vector<Eigen::VectorXd> basis;
    Eigen::VectorXd residual = t;
    std::vector<double> errors;
    for (int k = 0; k < k_max; ++k) {
        Eigen::VectorXd v = B.col(k);
        double v0 = v.norm();
        for (const auto& q : basis) v -= q.dot(v) * q;
        for (const auto& q : basis) v -= q.dot(v) * q;  // second pass for stability
        if (v.norm() > 1e-12 * v0) {
            v.normalize();
            residual -= v.dot(residual) * v;
            basis.push_back(std::move(v));
        }
        errors.push_back(residual.norm() / t_norm);
    }
    return errors;
}

PotentialRecovery recover_potential_linearized(const FracOperatorMatrix& As,
                                               const DomainSplit& split, const DnMap& measured,
                                               double lambda_reg) {
    InteriorSolver base(As, split, Perturbation::none(As.grid));
    auto w1 = split.w1_cells();
    auto w2 = split.w2_cells();
    auto omega = split.omega_cells();
    auto exterior = split.exterior_cells();
    require(measured.n_w1 == w1.size() && measured.n_w2 == w2.size(), errc::shape,
            "measured DN map does not match the split");

    DnMap base_map = dn_map(As, split, Perturbation::none(As.grid));

    std::vector<std::vector<double>> u_w1(w1.size()), u_w2(w2.size());
    parallel_for(w1.size(), [&](std::size_t j) {
        std::vector<double> f(exterior.size(), 0.0);
        for (std::size_t e = 0; e < exterior.size(); ++e)
            if (exterior[e] == w1[j]) f[e] = 1.0;
        u_w1[j] = base.solve(f);
    });
    parallel_for(w2.size(), [&](std::size_t i) {
        std::vector<double> f(exterior.size(), 0.0);
        for (std::size_t e = 0; e < exterior.size(); ++e)
            if (exterior[e] == w2[i]) f[e] = 1.0;
        u_w2[i] = base.solve(f);
    });

    std::size_t rows = w1.size() * w2.size();
    Eigen::MatrixXd M(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(omega.size()));
    Eigen::VectorXd d(static_cast<Eigen::Index>(rows));
    std::size_t r = 0;
    for (std::size_t j = 0; j < w1.size(); ++j)
        for (std::size_t i = 0; i < w2.size(); ++i, ++r) {
            d(static_cast<Eigen::Index>(r)) = measured.entry(i, j) - base_map.entry(i, j);
            for (std::size_t a = 0; a < omega.size(); ++a)
                M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(a)) =
                    u_w1[j][omega[a]] * u_w2[i][omega[a]];
        }

    // Tikhonov relative to the design-matrix scale, so lambda_reg means the
    // same thing regardless of grid size and patch geometry.
    Eigen::BDCSVD<Eigen::MatrixXd> msvd(M);
    double sigma_max = msvd.singularValues().size() ? msvd.singularValues()(0) : 1.0;
    Eigen::MatrixXd normal = M.transpose() * M;
    normal.diagonal().array() += lambda_reg * sigma_max * sigma_max;
    Eigen::VectorXd q = normal.ldlt().solve(M.transpose() * d);

    PotentialRecovery out;
    out.q = ScalarField(As.grid);
    for (std::size_t a = 0; a < omega.size(); ++a)
        out.q.values[omega[a]] = q(static_cast<Eigen::Index>(a));
    double dn = d.norm();
    out.residual = dn > 0.0 ? (M * q - d).norm() / dn : 0.0;
    return out;
}

}  // namespace tomolab
