#include "tomolab/fields.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

namespace tomolab {

GridSpec make_grid(int dim, int n_per_axis, double extent) {
    require(dim == 2 || dim == 3, errc::config, "grid dim must be 2 or 3");
    require(n_per_axis >= 8, errc::config, "grid needs n_per_axis >= 8");
    require(extent > 0.0, errc::config, "grid extent must be positive");
    return GridSpec{dim, n_per_axis, extent};
}

double ScalarField::max_abs() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

ScalarField ComplexField::real_part() const {
    ScalarField out(grid);
    for (std::size_t i = 0; i < values.size(); ++i) out.values[i] = values[i].real();
    return out;
}

ScalarField ComplexField::imag_part() const {
    ScalarField out(grid);
    for (std::size_t i = 0; i < values.size(); ++i) out.values[i] = values[i].imag();
    return out;
}

double ComplexField::max_abs() const {
    double m = 0.0;
    for (const auto& v : values) m = std::max(m, std::abs(v));
    return m;
}

double VectorField::max_abs() const {
    double m = 0.0;
    for (const auto& c : components) m = std::max(m, c.max_abs());
    return m;
}

std::size_t RegionMask::count() const {
    std::size_t c = 0;
    for (auto b : inside) c += b ? 1 : 0;
    return c;
}

bool RegionMask::is_connected() const {
    std::size_t total = count();
    if (total == 0) return false;
    int n = grid.n_per_axis;
    int nz = grid.dim == 3 ? n : 1;
    std::vector<std::uint8_t> seen(inside.size(), 0);
    std::deque<std::array<int, 3>> queue;
    for (int iz = 0; iz < nz && queue.empty(); ++iz)
        for (int iy = 0; iy < n && queue.empty(); ++iy)
            for (int ix = 0; ix < n && queue.empty(); ++ix)
                if (inside[grid.index(ix, iy, iz)]) {
                    queue.push_back({ix, iy, iz});
                    seen[grid.index(ix, iy, iz)] = 1;
                }
    std::size_t reached = 0;
    while (!queue.empty()) {
        auto [ix, iy, iz] = queue.front();
        queue.pop_front();
        ++reached;
        const int dx[6] = {1, -1, 0, 0, 0, 0};
        const int dy[6] = {0, 0, 1, -1, 0, 0};
        const int dz[6] = {0, 0, 0, 0, 1, -1};
        for (int k = 0; k < 2 * grid.dim; ++k) {
            int jx = ix + dx[k], jy = iy + dy[k], jz = iz + dz[k];
            if (jx < 0 || jx >= n || jy < 0 || jy >= n || jz < 0 || jz >= nz) continue;
            std::size_t idx = grid.index(jx, jy, jz);
            if (inside[idx] && !seen[idx]) {
                seen[idx] = 1;
                queue.push_back({jx, jy, jz});
            }
        }
    }
    return reached == total;
}

std::string RegionMask::digest() const { return fnv1a_hex(inside.data(), inside.size()); }

RegionMask make_disk_mask(const GridSpec& grid, const std::array<double, 3>& center, double radius) {
    RegionMask mask(grid);
    int n = grid.n_per_axis;
    int nz = grid.dim == 3 ? n : 1;
    for (int iz = 0; iz < nz; ++iz)
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix) {
                double dx = grid.coord(ix) - center[0];
                double dy = grid.coord(iy) - center[1];
                double dz = grid.dim == 3 ? grid.coord(iz) - center[2] : 0.0;
                if (dx * dx + dy * dy + dz * dz <= radius * radius)
                    mask.inside[grid.index(ix, iy, iz)] = 1;
            }
    return mask;
}

RegionMask make_block_mask(const GridSpec& grid, const std::array<int, 3>& i0, int width) {
    RegionMask mask(grid);
    int n = grid.n_per_axis;
    int nz = grid.dim == 3 ? n : 1;
    require(width >= 1, errc::config, "block mask needs width >= 1");
    for (int iz = 0; iz < nz; ++iz)
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix) {
                bool in = ix >= i0[0] && ix < i0[0] + width && iy >= i0[1] && iy < i0[1] + width;
                if (grid.dim == 3) in = in && iz >= i0[2] && iz < i0[2] + width;
                if (in) mask.inside[grid.index(ix, iy, iz)] = 1;
            }
    require(mask.count() > 0, errc::config, "block mask is empty");
    return mask;
}

RegionMask make_full_mask(const GridSpec& grid) {
    RegionMask mask(grid);
    std::fill(mask.inside.begin(), mask.inside.end(), 1);
    return mask;
}

void check_same_grid(const GridSpec& a, const GridSpec& b, const char* where) {
    require(a == b, errc::shape, std::string(where) + ": fields live on different grids");
}

// ---------------------------------------------------------------------------
// PolyOperator

PolyOperator::PolyOperator(std::map<MultiIndex, std::complex<double>> coeffs)
    : coeffs_(std::move(coeffs)) {
    for (auto it = coeffs_.begin(); it != coeffs_.end();) {
        if (std::abs(it->second) == 0.0)
            it = coeffs_.erase(it);
        else
            ++it;
    }
    require(!coeffs_.empty(), errc::config, "the zero polynomial is excluded");
    for (const auto& [alpha, a] : coeffs_) {
        (void)a;
        require(alpha[0] >= 0 && alpha[1] >= 0 && alpha[2] >= 0, errc::config,
                "negative multi-index");
        require(alpha[0] + alpha[1] + alpha[2] <= 2, errc::unsupported_order,
                "PolyOperator supports total order <= 2");
    }
}

PolyOperator PolyOperator::one() { return PolyOperator({{{0, 0, 0}, 1.0}}); }

PolyOperator PolyOperator::coordinate(int axis) {
    MultiIndex alpha{0, 0, 0};
    alpha[axis] = 1;
    return PolyOperator({{alpha, 1.0}});
}

PolyOperator PolyOperator::laplacian_symbol(int dim) {
    std::map<MultiIndex, std::complex<double>> c;
    for (int j = 0; j < dim; ++j) {
        MultiIndex alpha{0, 0, 0};
        alpha[j] = 2;
        c[alpha] = 1.0;
    }
    return PolyOperator(std::move(c));
}

int PolyOperator::order() const {
    int m = 0;
    for (const auto& [alpha, a] : coeffs_) {
        (void)a;
        m = std::max(m, alpha[0] + alpha[1] + alpha[2]);
    }
    return m;
}

std::string PolyOperator::describe() const {
    std::ostringstream os;
    bool first = true;
    for (const auto& [alpha, a] : coeffs_) {
        if (!first) os << " + ";
        first = false;
        os << "(" << a.real();
        if (a.imag() != 0.0) os << (a.imag() > 0 ? "+" : "") << a.imag() << "i";
        os << ")";
        const char* names[3] = {"x1", "x2", "x3"};
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < alpha[j]; ++k) os << "*" << names[j];
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Phantoms

double support_cutoff(double r, double extent) {
    double r0 = 0.75 * extent, r1 = 0.9 * extent;
    if (r <= r0) return 1.0;
    if (r >= r1) return 0.0;
    // C-infinity step: s(t) = e(t) / (e(t) + e(1-t)), e(t) = exp(-1/t)
    double t = (r1 - r) / (r1 - r0);
    double et = std::exp(-1.0 / t);
    double e1t = std::exp(-1.0 / (1.0 - t));
    return et / (et + e1t);
}

PhantomKind phantom_kind_from_string(const std::string& name) {
    if (name == "gaussian-bumps") return PhantomKind::gaussian_bumps;
    if (name == "ellipse-sum") return PhantomKind::ellipse_sum;
    if (name == "divergence-free-swirl") return PhantomKind::divergence_free_swirl;
    fail(errc::config, "unknown phantom kind '" + name + "'");
}

namespace {

struct GaussBump {
    std::array<double, 3> center;
    double sigma;
    double amplitude;
};

std::vector<GaussBump> draw_bumps(const GridSpec& grid, Rng& rng, double center_radius,
                                  double sigma_lo, double sigma_hi, int count) {
    std::vector<GaussBump> bumps;
    double L = grid.extent;
    for (int k = 0; k < count; ++k) {
        GaussBump b;
        for (int j = 0; j < 3; ++j)
            b.center[j] = j < grid.dim ? rng.uniform(-center_radius * L, center_radius * L) : 0.0;
        b.sigma = rng.uniform(sigma_lo * L, sigma_hi * L);
        b.amplitude = rng.uniform(0.5, 1.5);
        bumps.push_back(b);
    }
    return bumps;
}

struct Ellipse {
    double cx, cy, a, b, phi, amplitude;
};

}  // namespace

ScalarField make_scalar_phantom(const GridSpec& grid, PhantomKind kind, std::uint64_t seed) {
    require(kind != PhantomKind::divergence_free_swirl, errc::config,
            "divergence-free-swirl is a vector phantom; use make_swirl_phantom");
    ScalarField f(grid);
    int n = grid.n_per_axis;
    int nz = grid.dim == 3 ? n : 1;
    double L = grid.extent;
    Rng rng(seed * 2654435761ull + (kind == PhantomKind::gaussian_bumps ? 17 : 41));

    if (kind == PhantomKind::gaussian_bumps) {
        int count = 3 + static_cast<int>(seed % 3);
        auto bumps = draw_bumps(grid, rng, 0.4, 0.08, 0.18, count);
        for (int iz = 0; iz < nz; ++iz)
            for (int iy = 0; iy < n; ++iy)
                for (int ix = 0; ix < n; ++ix) {
                    double x = grid.coord(ix), y = grid.coord(iy);
                    double z = grid.dim == 3 ? grid.coord(iz) : 0.0;
                    double v = 0.0;
                    for (const auto& b : bumps) {
                        double dx = x - b.center[0], dy = y - b.center[1], dz = z - b.center[2];
                        double q = (dx * dx + dy * dy + dz * dz) / (2.0 * b.sigma * b.sigma);
                        v += b.amplitude * std::exp(-q);
                    }
                    double r = std::sqrt(x * x + y * y + z * z);
                    f.values[grid.index(ix, iy, iz)] = v * support_cutoff(r, L);
                }
        return f;
    }

    // ellipse-sum: soft-edged ellipses (2-D) / ellipsoids (3-D)
    int count = 3 + static_cast<int>(seed % 3);
    std::vector<Ellipse> ellipses;
    for (int k = 0; k < count; ++k) {
        Ellipse e;
        e.cx = rng.uniform(-0.4 * L, 0.4 * L);
        e.cy = rng.uniform(-0.4 * L, 0.4 * L);
        e.a = rng.uniform(0.12 * L, 0.35 * L);
        e.b = rng.uniform(0.12 * L, 0.35 * L);
        e.phi = rng.uniform(0.0, 3.14159265358979323846);
        e.amplitude = rng.uniform(0.4, 1.0) * (k % 3 == 2 ? -1.0 : 1.0);
        ellipses.push_back(e);
    }
    const double edge = 0.04;  // soft edge width in normalized elliptical radius
    for (int iz = 0; iz < nz; ++iz)
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix) {
                double x = grid.coord(ix), y = grid.coord(iy);
                double z = grid.dim == 3 ? grid.coord(iz) : 0.0;
                double v = 0.0;
                for (const auto& e : ellipses) {
                    double c = std::cos(e.phi), s = std::sin(e.phi);
                    double u = c * (x - e.cx) + s * (y - e.cy);
                    double w = -s * (x - e.cx) + c * (y - e.cy);
                    double q = (u * u) / (e.a * e.a) + (w * w) / (e.b * e.b);
                    if (grid.dim == 3) q += (z * z) / (0.3 * L * 0.3 * L);
                    double rho = std::sqrt(q);
                    v += e.amplitude / (1.0 + std::exp((rho - 1.0) / edge));
                }
                double r = std::sqrt(x * x + y * y + z * z);
                f.values[grid.index(ix, iy, iz)] = v * support_cutoff(r, L);
            }
    return f;
}

VectorField make_swirl_phantom(const GridSpec& grid, std::uint64_t seed) {
    require(grid.dim == 2, errc::unsupported_dimension, "swirl phantom is 2-D");
    VectorField h(grid);
    int n = grid.n_per_axis;
    double L = grid.extent;
    Rng rng(seed * 2654435761ull + 97);
    // Stream function = Gaussian mixture with analytic rotated gradient.
    // Centers and widths keep |h| below 1e-15 outside 0.8*L, so the hard zero
    // at 0.9*L changes nothing measurable and the spectral divergence stays
    // at the aliasing floor.
    int count = 3 + static_cast<int>(seed % 3);
    auto bumps = draw_bumps(grid, rng, 0.2, 0.07, 0.09, count);
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix) {
            double x = grid.coord(ix), y = grid.coord(iy);
            double r = std::sqrt(x * x + y * y);
            double hx = 0.0, hy = 0.0;
            if (r < 0.9 * L) {
                for (const auto& b : bumps) {
                    double dx = x - b.center[0], dy = y - b.center[1];
                    double s2 = b.sigma * b.sigma;
                    double g = b.amplitude * b.sigma * std::exp(-(dx * dx + dy * dy) / (2.0 * s2));
                    // psi = amp*sigma^2*exp(..): h = (-d2 psi, d1 psi)
                    hx += g * dy;
                    hy += -g * dx;
                }
            }
            h.components[0].values[grid.index(ix, iy)] = hx;
            h.components[1].values[grid.index(ix, iy)] = hy;
        }
    return h;
}

// ---------------------------------------------------------------------------
// Norms and derivatives

double quadrature_weight(const GridSpec& grid, int ix, int iy, int iz) {
    double h = grid.spacing();
    double w = h * h;
    if (grid.dim == 3) w *= h;
    int n = grid.n_per_axis;
    if (ix == 0 || ix == n - 1) w *= 0.5;
    if (iy == 0 || iy == n - 1) w *= 0.5;
    if (grid.dim == 3 && (iz == 0 || iz == n - 1)) w *= 0.5;
    return w;
}

double l2_norm(const ScalarField& f) { return std::sqrt(inner(f, f)); }

double inner(const ScalarField& f, const ScalarField& g) {
    check_same_grid(f.grid, g.grid, "inner");
    int n = f.grid.n_per_axis;
    int nz = f.grid.dim == 3 ? n : 1;
    double acc = 0.0;
    for (int iz = 0; iz < nz; ++iz)
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix) {
                std::size_t k = f.grid.index(ix, iy, iz);
                acc += quadrature_weight(f.grid, ix, iy, iz) * f.values[k] * g.values[k];
            }
    return acc;
}

double l2_norm(const VectorField& h) {
    double acc = 0.0;
    for (const auto& c : h.components) acc += inner(c, c);
    return std::sqrt(acc);
}

namespace {

// Apply a 1-D stencil along `axis` at every grid point.
template <typename F>
ScalarField axis_apply(const ScalarField& f, int axis, F stencil) {
    ScalarField out(f.grid);
    int n = f.grid.n_per_axis;
    int nz = f.grid.dim == 3 ? n : 1;
    require(axis >= 0 && axis < f.grid.dim, errc::config, "derivative axis out of range");
    for (int iz = 0; iz < nz; ++iz)
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix) {
                int idx[3] = {ix, iy, iz};
                auto sample = [&](int offset) {
                    int jdx[3] = {ix, iy, iz};
                    jdx[axis] = idx[axis] + offset;
                    return f.values[f.grid.index(jdx[0], jdx[1], jdx[2])];
                };
                out.values[f.grid.index(ix, iy, iz)] = stencil(idx[axis], n, sample);
            }
    return out;
}

}  // namespace

ScalarField derivative(const ScalarField& f, int axis) {
    double h = f.grid.spacing();
    return axis_apply(f, axis, [h](int i, int n, auto sample) {
        if (i == 0) return (-3.0 * sample(0) + 4.0 * sample(1) - sample(2)) / (2.0 * h);
        if (i == n - 1) return (3.0 * sample(0) - 4.0 * sample(-1) + sample(-2)) / (2.0 * h);
        return (sample(1) - sample(-1)) / (2.0 * h);
    });
}

ScalarField second_derivative(const ScalarField& f, int axis) {
    double h = f.grid.spacing();
    double h2 = h * h;
    return axis_apply(f, axis, [h2](int i, int n, auto sample) {
        if (i == 0) return (2.0 * sample(0) - 5.0 * sample(1) + 4.0 * sample(2) - sample(3)) / h2;
        if (i == n - 1)
            return (2.0 * sample(0) - 5.0 * sample(-1) + 4.0 * sample(-2) - sample(-3)) / h2;
        return (sample(1) - 2.0 * sample(0) + sample(-1)) / h2;
    });
}

VectorField gradient(const ScalarField& f) {
    VectorField g(f.grid);
    for (int j = 0; j < f.grid.dim; ++j) g.components[j] = derivative(f, j);
    return g;
}

ComplexField apply_poly_operator(const ScalarField& f, const PolyOperator& p) {
    require(p.order() <= 2, errc::unsupported_order, "apply_poly_operator: order > 2");
    ComplexField out(f.grid);
    for (const auto& [alpha, a] : p.coefficients()) {
        int total = alpha[0] + alpha[1] + alpha[2];
        require(alpha[2] == 0 || f.grid.dim == 3, errc::config,
                "poly operator uses x3 on a 2-D grid");
        ScalarField term = f;
        for (int j = 0; j < 3; ++j) {
            if (alpha[j] == 1) term = derivative(term, j);
            if (alpha[j] == 2) term = second_derivative(term, j);
        }
        // D^alpha = (-i)^{|alpha|} d^alpha
        std::complex<double> factor = a;
        const std::complex<double> minus_i(0.0, -1.0);
        for (int k = 0; k < total; ++k) factor *= minus_i;
        for (std::size_t i = 0; i < out.values.size(); ++i)
            out.values[i] += factor * term.values[i];
    }
    return out;
}

}  // namespace tomolab
