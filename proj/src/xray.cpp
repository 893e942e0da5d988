#include "tomolab/xray.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "fft_util.hpp"
#include "tomolab/io.hpp"

namespace tomolab {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

LineSet make_uniform_lines(int n_angles, int n_offsets, double extent) {
    require(n_angles >= 1, errc::config, "need at least one angle");
    require(n_offsets >= 2, errc::config, "need at least two offsets");
    LineSet lines;
    lines.angles.resize(n_angles);
    for (int k = 0; k < n_angles; ++k) lines.angles[k] = kPi * k / n_angles;
    double smax = extent * std::sqrt(2.0);
    lines.offsets.resize(n_offsets);
    for (int l = 0; l < n_offsets; ++l)
        lines.offsets[l] = -smax + 2.0 * smax * l / (n_offsets - 1);
    return lines;
}

double Sinogram::max_abs() const {
    double m = 0.0;
    for (double v : values)
        if (std::isfinite(v)) m = std::max(m, std::abs(v));
    return m;
}

double sinogram_inner(const Sinogram& a, const Sinogram& b) {
    require(a.values.size() == b.values.size(), errc::shape, "sinogram shape mismatch");
    double w = a.lines.angle_weight() * a.lines.offset_step();
    double acc = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        if (!std::isfinite(a.values[i]) || !std::isfinite(b.values[i])) continue;
        acc += a.values[i] * b.values[i];
    }
    return acc * w;
}

double sinogram_norm(const Sinogram& g) { return std::sqrt(sinogram_inner(g, g)); }

double bilinear(const ScalarField& f, double x, double y) {
    const GridSpec& grid = f.grid;
    double h = grid.spacing();
    double gx = (x + grid.extent) / h;
    double gy = (y + grid.extent) / h;
    int n = grid.n_per_axis;
    if (gx < 0.0 || gy < 0.0 || gx > n - 1 || gy > n - 1) return 0.0;
    int ix = std::min(static_cast<int>(gx), n - 2);
    int iy = std::min(static_cast<int>(gy), n - 2);
    double tx = gx - ix, ty = gy - iy;
    return (1 - tx) * (1 - ty) * f.at(ix, iy) + tx * (1 - ty) * f.at(ix + 1, iy) +
           (1 - tx) * ty * f.at(ix, iy + 1) + tx * ty * f.at(ix + 1, iy + 1);
}

LineSamples sample_line(const GridSpec& grid, double theta, double offset) {
    LineSamples out;
    double L = grid.extent;
    double c = std::cos(theta), s = std::sin(theta);
    // p(t) = offset*omega + t*omega_perp, omega=(c,s), omega_perp=(-s,c).
    // Clip t against the square [-L, L]^2.
    double px = offset * c, py = offset * s;
    double dx = -s, dy = c;
    double t0 = -std::numeric_limits<double>::infinity();
    double t1 = std::numeric_limits<double>::infinity();
    auto clip = [&](double p, double d) {
        if (std::abs(d) < 1e-15) {
            if (std::abs(p) > L) t0 = 1.0, t1 = 0.0;  // parallel and outside
            return;
        }
        double a = (-L - p) / d, b = (L - p) / d;
        if (a > b) std::swap(a, b);
        t0 = std::max(t0, a);
        t1 = std::min(t1, b);
    };
    clip(px, dx);
    clip(py, dy);
    if (!(t1 > t0)) return out;
    double step = grid.spacing() / 2.0;
    int m = std::max(1, static_cast<int>(std::ceil((t1 - t0) / step)));
    double dt = (t1 - t0) / m;
    out.points.resize(m + 1);
    out.weights.resize(m + 1);
    for (int q = 0; q <= m; ++q) {
        double t = t0 + q * dt;
        out.points[q] = {px + t * dx, py + t * dy};
        out.weights[q] = (q == 0 || q == m) ? 0.5 * dt : dt;
    }
    return out;
}

Sinogram xray_forward(const ScalarField& f, const LineSet& lines) {
    require(f.grid.dim == 2, errc::unsupported_dimension, "xray_forward is 2-D");
    Sinogram g(lines);
    int nl = lines.n_offsets();
    parallel_for(lines.angles.size(), [&](std::size_t k) {
        for (int l = 0; l < nl; ++l) {
            LineSamples samples = sample_line(f.grid, lines.angles[k], lines.offsets[l]);
            double acc = 0.0;
            for (std::size_t q = 0; q < samples.points.size(); ++q)
                acc += samples.weights[q] * bilinear(f, samples.points[q][0], samples.points[q][1]);
            g.at(static_cast<int>(k), l) = acc;
        }
    });
    return g;
}

namespace {

// Linear interpolation of one sinogram row in offset; 0 outside the range,
// missing (NaN) entries contribute nothing.
double interp_offset(const Sinogram& g, int k, double s) {
    const auto& offs = g.lines.offsets;
    int nl = g.lines.n_offsets();
    double ds = g.lines.offset_step();
    double u = (s - offs[0]) / ds;
    if (u < 0.0 || u > nl - 1) return 0.0;
    int l = std::min(static_cast<int>(u), nl - 2);
    double t = u - l;
    double a = g.at(k, l), b = g.at(k, l + 1);
    if (!std::isfinite(a)) a = 0.0;
    if (!std::isfinite(b)) b = 0.0;
    return (1 - t) * a + t * b;
}

}  // namespace

ScalarField normal_scalar(const ScalarField& f, const LineSet& lines) {
    Sinogram g = xray_forward(f, lines);
    return backproject(g, f.grid);
}

ScalarField backproject(const Sinogram& g, const GridSpec& grid) {
    require(grid.dim == 2, errc::unsupported_dimension, "backproject is 2-D");
    ScalarField out(grid);
    int n = grid.n_per_axis;
    int na = g.lines.n_angles();
    double dtheta = g.lines.angle_weight();
    std::vector<double> cosv(na), sinv(na);
    for (int k = 0; k < na; ++k) {
        cosv[k] = std::cos(g.lines.angles[k]);
        sinv[k] = std::sin(g.lines.angles[k]);
    }
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t iy) {
        double y = grid.coord(static_cast<int>(iy));
        for (int ix = 0; ix < n; ++ix) {
            double x = grid.coord(ix);
            double acc = 0.0;
            for (int k = 0; k < na; ++k) acc += interp_offset(g, k, x * cosv[k] + y * sinv[k]);
            out.at(ix, static_cast<int>(iy)) = acc * dtheta;
        }
    });
    return out;
}

ScalarField fbp_reconstruct(const Sinogram& g, const GridSpec& grid) {
    require(g.lines.n_angles() >= 8, errc::insufficient_data,
            "fbp_reconstruct needs at least 8 angles");
    int nl = g.lines.n_offsets();
    double ds = g.lines.offset_step();
    int m = fftu::next_pow2(2 * nl);

    // Band-limited Ram-Lak kernel sampled in the offset domain.
    std::vector<std::complex<double>> kernel(m, 0.0);
    auto ramlak = [&](int j) {
        if (j == 0) return 1.0 / (4.0 * ds * ds);
        if (j % 2 == 0) return 0.0;
        double pj = kPi * j * ds;
        return -1.0 / (pj * pj);
    };
    for (int j = 0; j < m / 2; ++j) kernel[j] = ramlak(j);
    for (int j = 1; j <= m / 2; ++j) kernel[m - j] = ramlak(j);
    fftu::fft_1d(kernel, true);

    Sinogram filtered(g.lines);
    parallel_for(g.lines.angles.size(), [&](std::size_t k) {
        std::vector<std::complex<double>> row(m, 0.0);
        for (int l = 0; l < nl; ++l) {
            double v = g.at(static_cast<int>(k), l);
            row[l] = std::isfinite(v) ? v : 0.0;
        }
        fftu::fft_1d(row, true);
        for (int j = 0; j < m; ++j) row[j] *= kernel[j];
        fftu::fft_1d(row, false);
        for (int l = 0; l < nl; ++l)
            filtered.at(static_cast<int>(k), l) = row[l].real() * ds / m;
    });

    ScalarField rec = backproject(filtered, grid);
    // angle_weight is 2*pi/n; the inversion formula wants pi/n.
    for (double& v : rec.values) v *= 0.5;
    return rec;
}

void write_sinogram_csv(const Sinogram& g, const std::string& path, const GridSpec& grid) {
    std::vector<std::vector<double>> rows(g.lines.n_angles());
    for (int k = 0; k < g.lines.n_angles(); ++k) {
        rows[k].resize(g.lines.n_offsets());
        for (int l = 0; l < g.lines.n_offsets(); ++l) rows[k][l] = g.at(k, l);
    }
    write_matrix_csv(path, g.lines.offsets, rows);
    nlohmann::json j;
    j["angles"] = g.lines.angles;
    j["offsets"] = g.lines.offsets;
    j["grid"] = {{"dim", grid.dim}, {"n_per_axis", grid.n_per_axis}, {"extent", grid.extent}};
    write_text_file(path + ".json", j.dump(2) + "\n");
}

Sinogram read_sinogram_csv(const std::string& path) {
    nlohmann::json j = nlohmann::json::parse(read_text_file(path + ".json"));
    LineSet lines;
    lines.angles = j.at("angles").get<std::vector<double>>();
    lines.offsets = j.at("offsets").get<std::vector<double>>();
    Sinogram g(lines);
    CsvMatrix csv = read_matrix_csv(path);
    require(csv.rows.size() == lines.angles.size(), errc::io, "sinogram csv row count mismatch");
    for (int k = 0; k < lines.n_angles(); ++k) {
        require(csv.rows[k].size() == lines.offsets.size(), errc::io,
                "sinogram csv column count mismatch");
        for (int l = 0; l < lines.n_offsets(); ++l) g.at(k, l) = csv.rows[k][l];
    }
    return g;
}

std::vector<std::uint8_t> lines_through_region(const LineSet& lines, const RegionMask& V) {
    require(V.grid.dim == 2, errc::unsupported_dimension, "lines_through_region is 2-D");
    std::size_t total = static_cast<std::size_t>(lines.n_angles()) * lines.n_offsets();
    std::vector<std::uint8_t> flags(total, 0);
    const GridSpec& grid = V.grid;
    double h = grid.spacing();
    int n = grid.n_per_axis;
    parallel_for(lines.angles.size(), [&](std::size_t k) {
        for (int l = 0; l < lines.n_offsets(); ++l) {
            LineSamples samples = sample_line(grid, lines.angles[k], lines.offsets[l]);
            bool hit = false;
            for (const auto& p : samples.points) {
                int ix = static_cast<int>(std::lround((p[0] + grid.extent) / h));
                int iy = static_cast<int>(std::lround((p[1] + grid.extent) / h));
                if (ix < 0 || ix >= n || iy < 0 || iy >= n) continue;
                if (V.inside[grid.index(ix, iy)]) {
                    hit = true;
                    break;
                }
            }
            flags[k * lines.n_offsets() + l] = hit ? 1 : 0;
        }
    });
    return flags;
}

}  // namespace tomolab
