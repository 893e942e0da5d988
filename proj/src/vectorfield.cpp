#include "tomolab/vectorfield.hpp"

#include <cmath>

#include "spectral_util.hpp"

namespace tomolab {

double VectorSinogram::max_abs() const {
    double m = 0.0;
    for (double v : values)
        if (std::isfinite(v)) m = std::max(m, std::abs(v));
    return m;
}

MatrixWeight::MatrixWeight(const GridSpec& g)
    : grid(g), entries{ScalarField(g), ScalarField(g), ScalarField(g), ScalarField(g)} {
    require(g.dim == 2, errc::unsupported_dimension, "MatrixWeight is 2-D");
}

void MatrixWeight::validate() const {
    for (std::size_t i = 0; i < entries[0].values.size(); ++i) {
        double det = entries[0].values[i] * entries[3].values[i] -
                     entries[1].values[i] * entries[2].values[i];
        require(std::abs(det) >= 1e-6, errc::weight,
                "matrix weight is singular (|det| < 1e-6) at a grid point");
    }
}

MatrixWeight identity_weight(const GridSpec& grid) {
    MatrixWeight A(grid);
    std::fill(A.entries[0].values.begin(), A.entries[0].values.end(), 1.0);
    std::fill(A.entries[3].values.begin(), A.entries[3].values.end(), 1.0);
    return A;
}

MatrixWeight rotation_weight(const GridSpec& grid, double angle_rad) {
    MatrixWeight A(grid);
    double c = std::cos(angle_rad), s = std::sin(angle_rad);
    std::fill(A.entries[0].values.begin(), A.entries[0].values.end(), c);
    std::fill(A.entries[1].values.begin(), A.entries[1].values.end(), -s);
    std::fill(A.entries[2].values.begin(), A.entries[2].values.end(), s);
    std::fill(A.entries[3].values.begin(), A.entries[3].values.end(), c);
    return A;
}

VectorSinogram xray_vector(const VectorField& h, const LineSet& lines) {
    require(h.grid.dim == 2, errc::unsupported_dimension, "xray_vector is 2-D");
    VectorSinogram g(lines);
    int nl = lines.n_offsets();
    parallel_for(lines.angles.size(), [&](std::size_t k) {
        double theta = lines.angles[k];
        double px = -std::sin(theta), py = std::cos(theta);  // omega_perp
        for (int l = 0; l < nl; ++l) {
            LineSamples samples = sample_line(h.grid, theta, lines.offsets[l]);
            double acc = 0.0;
            for (std::size_t q = 0; q < samples.points.size(); ++q) {
                double hx = bilinear(h.components[0], samples.points[q][0], samples.points[q][1]);
                double hy = bilinear(h.components[1], samples.points[q][0], samples.points[q][1]);
                acc += samples.weights[q] * (hx * px + hy * py);
            }
            g.at(static_cast<int>(k), l) = acc;
        }
    });
    return g;
}

ScalarField curl2d(const VectorField& h) {
    require(h.grid.dim == 2, errc::unsupported_dimension, "curl2d is 2-D");
    ScalarField d1h2 = derivative(h.components[1], 0);
    ScalarField d2h1 = derivative(h.components[0], 1);
    ScalarField out(h.grid);
    for (std::size_t i = 0; i < out.values.size(); ++i)
        out.values[i] = d1h2.values[i] - d2h1.values[i];
    return out;
}

namespace {

struct SpectralPair {
    spectral::Workspace a, b;
};

SpectralPair embed_pair(const VectorField& h, const SpectralPlan& plan) {
    require(h.grid.dim == 2, errc::unsupported_dimension, "spectral vector ops are 2-D");
    check_same_grid(h.grid, plan.grid, "spectral vector op");
    SpectralPair p{spectral::embed(h.components[0], plan.padded_size()),
                   spectral::embed(h.components[1], plan.padded_size())};
    spectral::fft(p.a, true);
    spectral::fft(p.b, true);
    return p;
}

}  // namespace

HelmholtzParts helmholtz(const VectorField& h, const SpectralPlan& plan) {
    SpectralPair p = embed_pair(h, plan);
    spectral::Workspace pot = p.a;   // same geometry
    spectral::Workspace g1 = p.a, g2 = p.b;  // gradient of the potential
    int m = p.a.m;
    double step = p.a.step;
    for (int ky = 0; ky < m; ++ky) {
        double xi2v = spectral::frequency(ky, m, step);
        for (int kx = 0; kx < m; ++kx) {
            double xi1 = spectral::frequency(kx, m, step);
            std::size_t idx = p.a.index(kx, ky);
            std::complex<double> h1 = p.a.data[idx], h2 = p.b.data[idx];
            double q = xi1 * xi1 + xi2v * xi2v;
            if (q == 0.0) {
                pot.data[idx] = 0.0;  // zero mode stays with the solenoidal part
                g1.data[idx] = 0.0;
                g2.data[idx] = 0.0;
                continue;
            }
            std::complex<double> div = xi1 * h1 + xi2v * h2;  // xi . h_hat
            pot.data[idx] = std::complex<double>(0.0, -1.0) * div / q;
            g1.data[idx] = xi1 * div / q;
            g2.data[idx] = xi2v * div / q;
            p.a.data[idx] = h1 - g1.data[idx];
            p.b.data[idx] = h2 - g2.data[idx];
        }
    }
    spectral::fft(p.a, false);
    spectral::fft(p.b, false);
    spectral::fft(pot, false);
    spectral::fft(g1, false);
    spectral::fft(g2, false);
    HelmholtzParts out;
    out.solenoidal = VectorField(h.grid);
    out.solenoidal.components[0] = spectral::crop(p.a, h.grid);
    out.solenoidal.components[1] = spectral::crop(p.b, h.grid);
    out.potential = spectral::crop(pot, h.grid);
    out.grad_potential = VectorField(h.grid);
    out.grad_potential.components[0] = spectral::crop(g1, h.grid);
    out.grad_potential.components[1] = spectral::crop(g2, h.grid);
    return out;
}

double helmholtz_divergence_residual(const VectorField& h, const SpectralPlan& plan) {
    SpectralPair p = embed_pair(h, plan);
    int m = p.a.m;
    for (int ky = 0; ky < m; ++ky) {
        double xi2v = spectral::frequency(ky, m, p.a.step);
        for (int kx = 0; kx < m; ++kx) {
            double xi1 = spectral::frequency(kx, m, p.a.step);
            std::size_t idx = p.a.index(kx, ky);
            std::complex<double> h1 = p.a.data[idx], h2 = p.b.data[idx];
            double q = xi1 * xi1 + xi2v * xi2v;
            std::complex<double> div = q == 0.0 ? 0.0 : (xi1 * h1 + xi2v * h2) / q;
            // divergence of the projected field: i xi . (h - xi (xi.h)/q)
            p.a.data[idx] = std::complex<double>(0.0, 1.0) *
                            (xi1 * h1 + xi2v * h2 - (xi1 * xi1 + xi2v * xi2v) * div);
        }
    }
    spectral::fft(p.a, false);
    double worst = 0.0;
    for (const auto& v : p.a.data) worst = std::max(worst, std::abs(v));
    return worst;
}

VectorField gradient_spectral(const ScalarField& f, const SpectralPlan& plan) {
    check_same_grid(f.grid, plan.grid, "gradient_spectral");
    VectorField out(f.grid);
    for (int axis = 0; axis < f.grid.dim; ++axis) {
        spectral::Workspace ws = spectral::embed(f, plan.padded_size());
        spectral::fft(ws, true);
        int m = ws.m;
        int mz = f.grid.dim == 3 ? m : 1;
        for (int kz = 0; kz < mz; ++kz)
            for (int ky = 0; ky < m; ++ky)
                for (int kx = 0; kx < m; ++kx) {
                    int k[3] = {kx, ky, kz};
                    double xi = spectral::frequency(k[axis], m, ws.step);
                    ws.data[ws.index(kx, ky, kz)] *= std::complex<double>(0.0, xi);
                }
        spectral::fft(ws, false);
        out.components[axis] = spectral::crop(ws, f.grid);
    }
    return out;
}

ScalarField divergence_spectral(const VectorField& h, const SpectralPlan& plan) {
    SpectralPair p = embed_pair(h, plan);
    int m = p.a.m;
    for (int ky = 0; ky < m; ++ky) {
        double xi2v = spectral::frequency(ky, m, p.a.step);
        for (int kx = 0; kx < m; ++kx) {
            double xi1 = spectral::frequency(kx, m, p.a.step);
            std::size_t idx = p.a.index(kx, ky);
            p.a.data[idx] =
                std::complex<double>(0.0, 1.0) * (xi1 * p.a.data[idx] + xi2v * p.b.data[idx]);
        }
    }
    spectral::fft(p.a, false);
    return spectral::crop(p.a, h.grid);
}

VectorField backproject_vector(const VectorSinogram& g, const GridSpec& grid) {
    require(grid.dim == 2, errc::unsupported_dimension, "backproject_vector is 2-D");
    VectorField out(grid);
    int n = grid.n_per_axis;
    int na = g.lines.n_angles();
    int nl = g.lines.n_offsets();
    double dtheta = g.lines.angle_weight();
    double ds = g.lines.offset_step();
    const auto& offs = g.lines.offsets;
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t iy) {
        double y = grid.coord(static_cast<int>(iy));
        for (int ix = 0; ix < n; ++ix) {
            double x = grid.coord(ix);
            double accx = 0.0, accy = 0.0;
            for (int k = 0; k < na; ++k) {
                double theta = g.lines.angles[k];
                double c = std::cos(theta), s = std::sin(theta);
                double u = (x * c + y * s - offs[0]) / ds;
                if (u < 0.0 || u > nl - 1) continue;
                int l = std::min(static_cast<int>(u), nl - 2);
                double t = u - l;
                double a = g.at(k, l), b = g.at(k, l + 1);
                if (!std::isfinite(a)) a = 0.0;
                if (!std::isfinite(b)) b = 0.0;
                double v = (1 - t) * a + t * b;
                accx += v * (-s);
                accy += v * c;
            }
            out.components[0].at(ix, static_cast<int>(iy)) = accx * dtheta;
            out.components[1].at(ix, static_cast<int>(iy)) = accy * dtheta;
        }
    });
    return out;
}

VectorField normal_vector(const VectorField& h, const LineSet& lines) {
    VectorSinogram g = xray_vector(h, lines);
    return backproject_vector(g, h.grid);
}

VectorSinogram xray_matrix_weighted(const VectorField& h, const MatrixWeight& A,
                                    const LineSet& lines) {
    check_same_grid(h.grid, A.grid, "xray_matrix_weighted");
    A.validate();
    VectorField Ah(h.grid);
    for (std::size_t i = 0; i < h.components[0].values.size(); ++i) {
        double hx = h.components[0].values[i], hy = h.components[1].values[i];
        Ah.components[0].values[i] = A.entries[0].values[i] * hx + A.entries[1].values[i] * hy;
        Ah.components[1].values[i] = A.entries[2].values[i] * hx + A.entries[3].values[i] * hy;
    }
    return xray_vector(Ah, lines);
}

}  // namespace tomolab
