#include "tomolab/fractional.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <map>
#include <mutex>

#include "spectral_util.hpp"

namespace tomolab {

FracExponent::FracExponent(double s_, int dim) : s(s_) {
    require(dim == 2 || dim == 3, errc::config, "FracExponent needs dim 2 or 3");
    require(s > -0.5 * dim && s <= 4.0, errc::domain,
            "fractional exponent must lie in (-dim/2, 4]");
    is_integer = s == std::floor(s);
}

SpectralPlan make_spectral_plan(const GridSpec& grid, int pad_factor, ZeroModeRule rule) {
    require(pad_factor >= 2, errc::config, "pad_factor must be >= 2");
    return SpectralPlan{grid, pad_factor, rule};
}

namespace {

// Multiplier |xi|^(2s) over an already-transformed workspace.
void apply_power_multiplier(spectral::Workspace& ws, double s, ZeroModeRule rule, bool* warned) {
    double mean_mag = std::abs(ws.data[0]);  // DC bin, scaled by the mode count
    spectral::for_each_mode(ws, [&](std::size_t idx, double xi2) {
        if (xi2 == 0.0) {
            // |0|^(2s) = 0 for s > 0; for s < 0 the mean is removed and
            // nothing is added back.
            ws.data[idx] = 0.0;
            return;
        }
        ws.data[idx] *= std::pow(xi2, s);
    });
    if (warned && rule == ZeroModeRule::zero && s < 0.0)
        *warned = mean_mag > 1e-12 * static_cast<double>(ws.data.size());
}

}  // namespace

ScalarField fractional_laplacian(const ScalarField& f, const FracExponent& s,
                                 const SpectralPlan& plan, FracInfo* info) {
    check_same_grid(f.grid, plan.grid, "fractional_laplacian");
    spectral::Workspace ws = spectral::embed(f, plan.padded_size());
    spectral::fft(ws, true);
    bool warned = false;
    apply_power_multiplier(ws, s.s, plan.zero_mode, &warned);
    spectral::fft(ws, false);
    if (info) info->zero_mode_warning = warned;
    return spectral::crop(ws, f.grid);
}

void fractional_laplacian_torus(TorusField& f, double s, ZeroModeRule rule) {
    spectral::Workspace ws;
    ws.dim = f.dim;
    ws.n = f.n;
    ws.m = f.n;
    ws.step = f.step;
    ws.data.assign(f.values.begin(), f.values.end());
    spectral::fft(ws, true);
    apply_power_multiplier(ws, s, rule, nullptr);
    spectral::fft(ws, false);
    for (std::size_t i = 0; i < f.values.size(); ++i) f.values[i] = ws.data[i].real();
}

double torus_l2_norm(const TorusField& f) {
    double acc = 0.0;
    for (double v : f.values) acc += v * v;
    double w = 1.0;
    for (int d = 0; d < f.dim; ++d) w *= f.step;
    return std::sqrt(acc * w);
}

// ---------------------------------------------------------------------------
// Riesz potential

namespace {

// Analytic cell average of |x|^(-alpha) over [-h/2, h/2]^dim, reduced to a
// smooth fan integral over the cell faces.
double singular_cell_average(double h, double alpha, int dim) {
    double a = 0.5 * h;
    if (dim == 2) {
        double inner = adaptive_simpson(
            [alpha](double u) { return std::pow(1.0 + u * u, -0.5 * alpha); }, -1.0, 1.0, 1e-12);
        return 4.0 * std::pow(a, 2.0 - alpha) / (2.0 - alpha) * inner / (h * h);
    }
    double inner = adaptive_simpson(
        [alpha](double u) {
            return adaptive_simpson(
                [alpha, u](double v) { return std::pow(1.0 + u * u + v * v, -0.5 * alpha); },
                -1.0, 1.0, 1e-12);
        },
        -1.0, 1.0, 1e-10);
    return 6.0 * std::pow(a, 3.0 - alpha) / (3.0 - alpha) * inner / (h * h * h);
}

double cached_cell_average(double h, double alpha, int dim) {
    static std::map<std::tuple<double, double, int>, double> cache;
    static std::mutex mutex;
    std::lock_guard<std::mutex> lock(mutex);
    auto key = std::make_tuple(h, alpha, dim);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    double value = singular_cell_average(h, alpha, dim);
    cache.emplace(key, value);
    return value;
}

}  // namespace

ScalarField riesz_potential(const ScalarField& f, double alpha, const SpectralPlan& plan) {
    check_same_grid(f.grid, plan.grid, "riesz_potential");
    int dim = f.grid.dim;
    require(alpha < dim, errc::divergent_kernel, "riesz_potential needs alpha < dim");
    require(alpha > 0.0, errc::domain, "riesz_potential convolution route needs alpha > 0");

    int m = plan.padded_size();
    double h = f.grid.spacing();
    double period = m * h;

    // Largest separation between two grid points; beyond it the kernel is
    // never sampled, so truncating there makes the circular convolution an
    // exact linear one once the period leaves room.
    double full_reach = 2.0 * f.grid.extent * std::sqrt(static_cast<double>(dim)) + h;
    double cut = full_reach;
    if (period - full_reach < cut) cut = 0.5 * period;  // min-image fallback, small pads

    spectral::Workspace kernel;
    kernel.dim = dim;
    kernel.n = f.grid.n_per_axis;
    kernel.m = m;
    kernel.step = h;
    kernel.data.assign(dim == 3 ? static_cast<std::size_t>(m) * m * m
                                : static_cast<std::size_t>(m) * m,
                       0.0);
    auto min_image = [&](int k) {
        double x = k * h;
        if (x > 0.5 * period) x -= period;
        return x;
    };
    int mz = dim == 3 ? m : 1;
    for (int kz = 0; kz < mz; ++kz)
        for (int ky = 0; ky < m; ++ky)
            for (int kx = 0; kx < m; ++kx) {
                double x = min_image(kx), y = min_image(ky);
                double z = dim == 3 ? min_image(kz) : 0.0;
                double r = std::sqrt(x * x + y * y + z * z);
                if (r > cut) continue;
                kernel.data[kernel.index(kx, ky, kz)] =
                    r == 0.0 ? cached_cell_average(h, alpha, dim) : std::pow(r, -alpha);
            }

    spectral::Workspace ws = spectral::embed(f, m);
    spectral::fft(ws, true);
    spectral::fft(kernel, true);
    for (std::size_t i = 0; i < ws.data.size(); ++i) ws.data[i] *= kernel.data[i];
    spectral::fft(ws, false);
    ScalarField out = spectral::crop(ws, f.grid);
    double cell = std::pow(h, dim);
    for (double& v : out.values) v *= cell;
    return out;
}

ScalarField normal_dplane(const ScalarField& f, int d, const SpectralPlan& plan) {
    require(d > 0 && d < f.grid.dim, errc::domain, "normal_dplane needs 0 < d < dim");
    return fractional_laplacian(f, FracExponent(-0.5 * d, f.grid.dim), plan);
}

// ---------------------------------------------------------------------------
// Vanishing-order probe

namespace {

// Undivided central-difference coefficients at offsets -2..2.
const double kCentral[5][5] = {
    {0, 0, 1, 0, 0},        // order 0
    {0, -0.5, 0, 0.5, 0},   // order 1
    {0, 1, -2, 1, 0},       // order 2
    {-0.5, 1, 0, -1, 0.5},  // order 3
    {1, -4, 6, -4, 1},      // order 4
};

int stencil_reach(int order) { return order <= 2 ? 1 : 2; }

}  // namespace

std::vector<double> vanishing_order_probe(const ScalarField& f, const std::array<int, 3>& x0,
                                          int k_max) {
    require(k_max >= 0 && k_max <= 4, errc::unsupported_order, "vanishing probe needs k_max <= 4");
    const GridSpec& g = f.grid;
    int n = g.n_per_axis;
    for (int j = 0; j < g.dim; ++j)
        require(x0[j] >= k_max && x0[j] <= n - 1 - k_max, errc::placement,
                "probe point too close to the boundary");

    std::vector<double> result(k_max + 1, 0.0);
    for (int order = 0; order <= k_max; ++order) {
        double worst = 0.0;
        for (int b1 = 0; b1 <= order; ++b1)
            for (int b2 = 0; b1 + b2 <= order; ++b2) {
                int b3 = order - b1 - b2;
                if (g.dim == 2 && b3 != 0) continue;
                int beta[3] = {b1, b2, b3};
                int reach[3] = {stencil_reach(beta[0]), stencil_reach(beta[1]),
                                g.dim == 3 ? stencil_reach(beta[2]) : 0};
                double acc = 0.0;
                for (int oz = -reach[2]; oz <= reach[2]; ++oz)
                    for (int oy = -reach[1]; oy <= reach[1]; ++oy)
                        for (int ox = -reach[0]; ox <= reach[0]; ++ox) {
                            double c = kCentral[beta[0]][ox + 2] * kCentral[beta[1]][oy + 2];
                            if (g.dim == 3) c *= kCentral[beta[2]][oz + 2];
                            if (c == 0.0) continue;
                            acc += c * f.values[g.index(x0[0] + ox, x0[1] + oy,
                                                        g.dim == 3 ? x0[2] + oz : 0)];
                        }
                worst = std::max(worst, std::abs(acc));
            }
        result[order] = worst;
    }
    return result;
}

// ---------------------------------------------------------------------------
// Poincare ratio

double poincare_ratio(const ScalarField& f, double s, double t, const SpectralPlan& plan) {
    check_same_grid(f.grid, plan.grid, "poincare_ratio");
    require(s >= t && t >= 0.0, errc::domain, "poincare_ratio needs s >= t >= 0");
    spectral::Workspace ws = spectral::embed(f, plan.padded_size());
    spectral::fft(ws, true);
    double num = 0.0, den = 0.0;  // Parseval on the padded torus
    spectral::for_each_mode(ws, [&](std::size_t idx, double xi2) {
        double p = std::norm(ws.data[idx]);
        num += (xi2 == 0.0 ? (t == 0.0 ? 1.0 : 0.0) : std::pow(xi2, t)) * p;
        den += (xi2 == 0.0 ? (s == 0.0 ? 1.0 : 0.0) : std::pow(xi2, s)) * p;
    });
    require(den > 0.0, errc::degenerate_input, "poincare_ratio: zero denominator");
    return std::sqrt(num / den);
}

// ---------------------------------------------------------------------------
// Rank experiment

namespace {

// Local (-Delta_h)^k through the finite-difference stencil, for the integer
// contrast cases.
ScalarField local_neg_laplacian_power(const ScalarField& f, int k) {
    ScalarField out = f;
    for (int rep = 0; rep < k; ++rep) {
        ScalarField lap(out.grid);
        for (int j = 0; j < out.grid.dim; ++j) {
            ScalarField d2 = second_derivative(out, j);
            for (std::size_t i = 0; i < lap.values.size(); ++i) lap.values[i] -= d2.values[i];
        }
        out = lap;
    }
    return out;
}

}  // namespace

std::vector<double> dense_fractional_matrix(const GridSpec& grid, const FracExponent& s,
                                            const SpectralPlan& plan) {
    std::size_t n = grid.point_count();
    std::vector<double> matrix(n * n, 0.0);  // column-major, column j = op e_j
    parallel_for(n, [&](std::size_t j) {
        ScalarField e(grid);
        e.values[j] = 1.0;
        ScalarField col;
        if (s.is_integer && s.s >= 1.0)
            col = local_neg_laplacian_power(e, static_cast<int>(s.s));
        else if (s.s < 0.0)
            col = riesz_potential(e, grid.dim + 2.0 * s.s, plan);
        else
            col = fractional_laplacian(e, s, plan);
        for (std::size_t i = 0; i < n; ++i) matrix[j * n + i] = col.values[i];
    });
    return matrix;
}

UcpRankReport ucp_rank_experiment(const GridSpec& grid, const FracExponent& s, const RegionMask& V,
                                  const PolyOperator& constraint, const SpectralPlan& plan) {
    require(grid.dim == 2, errc::unsupported_dimension, "rank experiment is 2-D");
    require(grid.n_per_axis <= 24, errc::size, "dense assembly capped at n_per_axis = 24");
    check_same_grid(grid, V.grid, "ucp_rank_experiment");
    std::size_t cells = V.count();
    require(cells > 0, errc::domain, "constraint region V is empty");

    std::size_t n = grid.point_count();
    std::vector<std::size_t> v_idx;
    for (std::size_t i = 0; i < n; ++i)
        if (V.inside[i]) v_idx.push_back(i);

    std::vector<double> op = dense_fractional_matrix(grid, s, plan);

    std::vector<std::vector<double>> rows;
    rows.reserve(3 * cells);
    for (std::size_t r : v_idx) {
        std::vector<double> row(n);
        for (std::size_t j = 0; j < n; ++j) row[j] = op[j * n + r];
        rows.push_back(std::move(row));
    }

    std::vector<std::vector<double>> re_rows(cells, std::vector<double>(n, 0.0));
    std::vector<std::vector<double>> im_rows(cells, std::vector<double>(n, 0.0));
    parallel_for(n, [&](std::size_t j) {
        ScalarField e(grid);
        e.values[j] = 1.0;
        ComplexField pj = apply_poly_operator(e, constraint);
        for (std::size_t k = 0; k < cells; ++k) {
            re_rows[k][j] = pj.values[v_idx[k]].real();
            im_rows[k][j] = pj.values[v_idx[k]].imag();
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
    // Identically-zero real or imaginary parts of complex rows constrain nothing.
    for (auto* block : {&re_rows, &im_rows})
        for (auto& r : *block)
            if (row_norm(r) > 1e-12 * max_norm) rows.push_back(std::move(r));

    Eigen::MatrixXd M(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < n; ++j)
            M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];

    Eigen::BDCSVD<Eigen::MatrixXd> svd(M);
    const auto& sv = svd.singularValues();
    UcpRankReport report;
    report.sigma_max = sv.size() ? sv(0) : 0.0;
    report.sigma_min = sv.size() ? sv(sv.size() - 1) : 0.0;
    report.n_unknowns = static_cast<int>(n);
    report.n_equations = static_cast<int>(rows.size());
    report.mask_digest = V.digest();
    return report;
}

}  // namespace tomolab
