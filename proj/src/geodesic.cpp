#include "tomolab/geodesic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tomolab {

namespace {
constexpr double kPi = 3.14159265358979323846;

double wrap_2pi(double a) {
    a = std::fmod(a, 2.0 * kPi);
    return a < 0.0 ? a + 2.0 * kPi : a;
}
}  // namespace

double RadialProfile::value(double r) const {
    double acc = 0.0;
    for (std::size_t k = coeffs.size(); k-- > 0;) acc = acc * r + coeffs[k];
    return acc;
}

double RadialProfile::derivative(double r) const {
    double acc = 0.0;
    for (std::size_t k = coeffs.size(); k-- > 1;)
        acc = acc * r + coeffs[k] * static_cast<double>(k);
    return acc;
}

RadialProfile make_radial_profile(const std::vector<double>& coeffs, double radius) {
    require(!coeffs.empty() && coeffs.size() <= 7, errc::config,
            "radial profile degree is capped at 6");
    require(radius > 0.0, errc::config, "profile radius must be positive");
    RadialProfile c{coeffs, radius};
    for (int k = 0; k <= 1024; ++k) {
        double r = radius * k / 1024.0;
        require(c.value(r) > 0.0, errc::config, "sound speed must be positive on [0, R]");
    }
    return c;
}

HerglotzResult herglotz_check(const RadialProfile& c) {
    // d/dr (r / c) = (c - r c') / c^2 on a 1024-point grid
    double margin = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 1024; ++k) {
        double r = c.radius * k / 1024.0;
        double v = c.value(r);
        double d = (v - r * c.derivative(r)) / (v * v);
        margin = std::min(margin, d);
    }
    return HerglotzResult{margin > 0.0, margin};
}

std::array<double, 2> GeodesicPath::velocity(std::size_t k, const RadialProfile& c) const {
    const PathSample& s = samples[k];
    double r = std::sqrt(s.x[0] * s.x[0] + s.x[1] * s.x[1]);
    double c2 = c.value(r);
    c2 *= c2;
    return {c2 * s.p[0], c2 * s.p[1]};
}

namespace {

struct RayState {
    std::array<double, 2> x;
    std::array<double, 2> p;
};

// dx/dt = c^2 p, dp/dt = -grad(c^2) |p|^2 / 2, radial c. The polynomial is
// evaluated unclamped: grazing steps poke just past r = R, and a smooth
// extension there keeps the integrator at full order.
RayState rhs(const RadialProfile& c, const RayState& s) {
    double r = std::sqrt(s.x[0] * s.x[0] + s.x[1] * s.x[1]);
    double cv = c.value(r);
    double dc = c.derivative(r);
    double p2 = s.p[0] * s.p[0] + s.p[1] * s.p[1];
    RayState d;
    d.x = {cv * cv * s.p[0], cv * cv * s.p[1]};
    double factor = r > 1e-14 ? -cv * dc * p2 / r : 0.0;
    d.p = {factor * s.x[0], factor * s.x[1]};
    return d;
}

RayState rk4_step(const RadialProfile& c, const RayState& s, double dt) {
    auto add = [](const RayState& a, const RayState& b, double w) {
        RayState out;
        for (int i = 0; i < 2; ++i) {
            out.x[i] = a.x[i] + w * b.x[i];
            out.p[i] = a.p[i] + w * b.p[i];
        }
        return out;
    };
    RayState k1 = rhs(c, s);
    RayState k2 = rhs(c, add(s, k1, 0.5 * dt));
    RayState k3 = rhs(c, add(s, k2, 0.5 * dt));
    RayState k4 = rhs(c, add(s, k3, dt));
    RayState out = s;
    for (int i = 0; i < 2; ++i) {
        out.x[i] += dt / 6.0 * (k1.x[i] + 2.0 * k2.x[i] + 2.0 * k3.x[i] + k4.x[i]);
        out.p[i] += dt / 6.0 * (k1.p[i] + 2.0 * k2.p[i] + 2.0 * k3.p[i] + k4.p[i]);
    }
    return out;
}

double hamiltonian(const RadialProfile& c, const RayState& s) {
    double r = std::sqrt(s.x[0] * s.x[0] + s.x[1] * s.x[1]);
    double cv = c.value(r);
    return 0.5 * cv * cv * (s.p[0] * s.p[0] + s.p[1] * s.p[1]);
}

double radius_of(const RayState& s) { return std::sqrt(s.x[0] * s.x[0] + s.x[1] * s.x[1]); }

GeodesicPath trace_at_step(const RadialProfile& c, RayState s, double dt, double t_cap) {
    GeodesicPath path;
    double h0 = hamiltonian(c, s);
    double drift = 0.0;
    double t = 0.0;
    path.samples.push_back({s.x, s.p, t});
    while (t < t_cap) {
        RayState next = rk4_step(c, s, dt);
        if (radius_of(next) >= c.radius) {
            double lo = 0.0, hi = dt;
            RayState probe = next;
            for (int it = 0; it < 120; ++it) {
                double mid = 0.5 * (lo + hi);
                probe = rk4_step(c, s, mid);
                if (radius_of(probe) >= c.radius)
                    hi = mid;
                else
                    lo = mid;
                if (std::abs(radius_of(probe) - c.radius) <= 1e-10) break;
            }
            probe = rk4_step(c, s, hi);
            drift = std::max(drift, std::abs(hamiltonian(c, probe) - h0) / h0);
            path.samples.push_back({probe.x, probe.p, t + hi});
            path.exited = true;
            path.hamiltonian_drift = drift;
            return path;
        }
        drift = std::max(drift, std::abs(hamiltonian(c, next) - h0) / h0);
        s = next;
        t += dt;
        path.samples.push_back({s.x, s.p, t});
    }
    path.exited = false;
    path.hamiltonian_drift = drift;
    return path;
}

double min_speed(const RadialProfile& c) {
    double m = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 256; ++k) m = std::min(m, c.value(c.radius * k / 256.0));
    return m;
}

}  // namespace

GeodesicPath trace_geodesic(const RadialProfile& c, const std::array<double, 2>& x0,
                            const std::array<double, 2>& direction, double step) {
    HerglotzResult hg = herglotz_check(c);
    require(hg.satisfied, errc::domain, "trace_geodesic needs the Herglotz condition");
    double norm = std::hypot(direction[0], direction[1]);
    require(norm > 0.0, errc::config, "direction must be nonzero");
    double r0 = std::hypot(x0[0], x0[1]);
    require(r0 <= c.radius * (1.0 + 1e-9), errc::config, "start point outside the disk");

    // |xi|_g = 1 means Euclidean speed c; the momentum is p = xi / c^2
    double cv = c.value(r0);
    RayState s;
    s.x = x0;
    s.p = {direction[0] / norm / cv, direction[1] / norm / cv};

    double t_cap = 100.0 * (2.0 * c.radius) / min_speed(c);
    double dt = step > 0.0 ? step : c.radius / 256.0;
    for (int attempt = 0; attempt < 14; ++attempt) {
        GeodesicPath path = trace_at_step(c, s, dt, t_cap);
        if (!path.exited)
            fail(errc::trapping,
                 "geodesic failed to exit within the parameter cap (Herglotz should forbid this)");
        if (path.hamiltonian_drift <= 1e-8) return path;
        dt *= 0.5;
    }
    fail(errc::convergence, "Hamiltonian drift did not settle below 1e-8 under step halving");
}

namespace {

double exit_angle(const RadialProfile& c, double from_angle, double psi, double step,
                  GeodesicPath* out_path) {
    double ca = std::cos(from_angle), sa = std::sin(from_angle);
    std::array<double, 2> x0{c.radius * ca, c.radius * sa};
    std::array<double, 2> tangent{-sa, ca};
    std::array<double, 2> inward{-ca, -sa};
    std::array<double, 2> dir{std::cos(psi) * tangent[0] + std::sin(psi) * inward[0],
                              std::cos(psi) * tangent[1] + std::sin(psi) * inward[1]};
    GeodesicPath path = trace_geodesic(c, x0, dir, step);
    const auto& exit = path.samples.back().x;
    double angle = std::atan2(exit[1], exit[0]);
    if (out_path) *out_path = std::move(path);
    return angle;
}

}  // namespace

TravelTimeResult travel_time(const RadialProfile& c, double from_angle, double to_angle,
                             double step) {
    double target = wrap_2pi(to_angle - from_angle);
    require(target > 1e-12 && target < 2.0 * kPi - 1e-12, errc::config,
            "travel_time needs two distinct boundary points");

    // The separation sweeps (0, 2 pi) as the launch angle psi runs from the
    // forward tangent to the backward tangent.
    auto separation = [&](double psi, GeodesicPath* path) {
        double sep = wrap_2pi(exit_angle(c, from_angle, psi, step, path) - from_angle);
        if (sep < 1e-9 && psi > 0.5 * kPi) sep = 2.0 * kPi;
        return sep;
    };

    const int scan = 64;
    double lo = 0.0, hi = 0.0, sep_lo = 0.0, sep_hi = 0.0;
    bool bracketed = false;
    double prev_psi = kPi * 1e-4;
    double prev_sep = separation(prev_psi, nullptr);
    for (int k = 1; k <= scan && !bracketed; ++k) {
        double psi = kPi * (1e-4 + (1.0 - 2e-4) * static_cast<double>(k) / scan);
        double sep = separation(psi, nullptr);
        if ((prev_sep - target) * (sep - target) <= 0.0) {
            lo = prev_psi;
            hi = psi;
            sep_lo = prev_sep;
            sep_hi = sep;
            bracketed = true;
        }
        prev_psi = psi;
        prev_sep = sep;
    }
    require(bracketed, errc::shooting,
            "shooting bracket failure: no launch angle reaches separation " +
                std::to_string(target));

    GeodesicPath best;
    for (int it = 0; it < 200; ++it) {
        double psi_mid = 0.5 * (lo + hi);
        GeodesicPath path;
        double sep = separation(psi_mid, &path);
        if (std::abs(sep - target) <= 1e-8) {
            best = std::move(path);
            break;
        }
        bool increasing = sep_hi > sep_lo;
        if ((sep < target) == increasing) {
            lo = psi_mid;
            sep_lo = sep;
        } else {
            hi = psi_mid;
            sep_hi = sep;
        }
    }
    require(!best.samples.empty(), errc::shooting,
            "shooting bisection failed to reach 1e-8 in boundary angle");
    return TravelTimeResult{best.samples.back().t, std::move(best)};
}

BoundaryDistanceMap boundary_distance_map(const RadialProfile& c, int m_points) {
    require(m_points >= 2 && m_points <= 64, errc::size,
            "boundary distance maps are capped at 64 points");
    BoundaryDistanceMap map;
    map.radius = c.radius;
    map.angles.resize(m_points);
    for (int i = 0; i < m_points; ++i) map.angles[i] = 2.0 * kPi * i / m_points;
    map.d.assign(static_cast<std::size_t>(m_points) * m_points, 0.0);
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < m_points; ++i)
        for (int j = 0; j < m_points; ++j)
            if (i != j) pairs.emplace_back(i, j);
    parallel_for(pairs.size(), [&](std::size_t k) {
        auto [i, j] = pairs[k];
        map.d[static_cast<std::size_t>(i) * m_points + j] =
            travel_time(c, map.angles[i], map.angles[j]).time;
    });
    return map;
}

HerglotzInversion herglotz_invert(const std::vector<double>& separations,
                                  const std::vector<double>& times, double radius) {
    std::size_t n = separations.size();
    require(n >= 3 && times.size() == n, errc::config,
            "herglotz_invert needs at least three (separation, time) samples");
    for (std::size_t k = 1; k < n; ++k)
        require(separations[k] > separations[k - 1], errc::config,
                "separations must be strictly increasing");

    // ray parameter p = dT/dDelta
    std::vector<double> p(n);
    for (std::size_t k = 0; k < n; ++k) {
        if (k == 0)
            p[k] = (times[1] - times[0]) / (separations[1] - separations[0]);
        else if (k == n - 1)
            p[k] = (times[n - 1] - times[n - 2]) / (separations[n - 1] - separations[n - 2]);
        else
            p[k] = (times[k + 1] - times[k - 1]) / (separations[k + 1] - separations[k - 1]);
    }
    for (std::size_t k = 1; k < n; ++k)
        require(p[k] < p[k - 1], errc::invalid_data,
                "ray parameter is not monotone: data violates the Herglotz condition");

    // The integral starts at separation 0; extrapolate the ray parameter
    // linearly onto [0, Delta_0], otherwise the largest arccosh piece is lost.
    std::vector<double> seps_ext, p_ext;
    if (separations.front() > 0.0) {
        double p0 = p[0] - separations[0] * (p[1] - p[0]) / (separations[1] - separations[0]);
        seps_ext.push_back(0.0);
        p_ext.push_back(std::max(p0, p[0] * (1.0 + 1e-12)));
    }
    seps_ext.insert(seps_ext.end(), separations.begin(), separations.end());
    p_ext.insert(p_ext.end(), p.begin(), p.end());
    std::size_t offset = seps_ext.size() - n;

    // r(p_k) = R exp(-(1/pi) int arccosh(p(D)/p_k) dD); on each segment the
    // piecewise-linear p integrates in closed form with
    // F(v) = v arccosh(v) - sqrt(v^2 - 1).
    auto F = [](double v) {
        if (v <= 1.0) return 0.0;
        return v * std::acosh(v) - std::sqrt(v * v - 1.0);
    };
    HerglotzInversion out;
    out.r.resize(n);
    out.c.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t k_ext = k + offset;
        double integral = 0.0;
        for (std::size_t seg = 0; seg + 1 <= k_ext; ++seg) {
            double da = seps_ext[seg], db = seps_ext[seg + 1];
            double va = p_ext[seg] / p[k], vb = p_ext[seg + 1] / p[k];
            if (va <= 1.0 && vb <= 1.0) continue;
            if (std::abs(va - vb) < 1e-14) {
                integral += (db - da) * std::acosh(std::max(va, 1.0));
                continue;
            }
            integral += (db - da) / (vb - va) * (F(vb) - F(va));
        }
        out.r[k] = radius * std::exp(-integral / kPi);
        out.c[k] = out.r[k] / p[k];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Ray transforms

Tensor2Field Tensor2Field::symmetric(const ScalarField& t11, const ScalarField& t12,
                                     const ScalarField& t22) {
    Tensor2Field out(t11.grid);
    out.comp[0] = t11;
    out.comp[1] = t12;
    out.comp[2] = t12;
    out.comp[3] = t22;
    return out;
}

double Tensor2Field::max_abs() const {
    double m = 0.0;
    for (const auto& c : comp) m = std::max(m, c.max_abs());
    return m;
}

GeodesicFan make_boundary_fan(const RadialProfile& c, int n_entry_points, int n_directions,
                              double step) {
    GeodesicFan fan;
    for (int i = 0; i < n_entry_points; ++i) {
        double a = 2.0 * kPi * i / n_entry_points;
        double ca = std::cos(a), sa = std::sin(a);
        std::array<double, 2> x0{c.radius * ca, c.radius * sa};
        for (int k = 0; k < n_directions; ++k) {
            double psi = kPi * (k + 1.0) / (n_directions + 1.0);
            std::array<double, 2> dir{std::cos(psi) * (-sa) + std::sin(psi) * (-ca),
                                      std::cos(psi) * ca + std::sin(psi) * (-sa)};
            fan.push_back(trace_geodesic(c, x0, dir, step));
        }
    }
    return fan;
}

GeodesicFan make_fan_from_lines(const RadialProfile& c, const LineSet& lines, double step) {
    GeodesicFan fan;
    for (double theta : lines.angles) {
        double co = std::cos(theta), si = std::sin(theta);
        for (double s : lines.offsets) {
            if (std::abs(s) >= c.radius) continue;
            double t_star = std::sqrt(c.radius * c.radius - s * s);
            // start at the +t* end of the chord; initial velocity -omega_perp
            std::array<double, 2> x0{s * co - t_star * si, s * si + t_star * co};
            std::array<double, 2> dir{si, -co};
            fan.push_back(trace_geodesic(c, x0, dir, step));
        }
    }
    return fan;
}

namespace {

template <typename Integrand>
std::vector<double> fan_integrals(const GeodesicFan& fan, Integrand&& integrand) {
    std::vector<double> out(fan.size(), 0.0);
    parallel_for(fan.size(), [&](std::size_t k) {
        const GeodesicPath& path = fan[k];
        double acc = 0.0;
        for (std::size_t q = 0; q + 1 < path.samples.size(); ++q) {
            double dt = path.samples[q + 1].t - path.samples[q].t;
            acc += 0.5 * dt * (integrand(path, q) + integrand(path, q + 1));
        }
        out[k] = acc;
    });
    return out;
}

}  // namespace

std::vector<double> geodesic_ray_transform(const ScalarField& f, const RadialProfile& c,
                                           const GeodesicFan& fan) {
    (void)c;
    return fan_integrals(fan, [&](const GeodesicPath& path, std::size_t q) {
        return bilinear(f, path.samples[q].x[0], path.samples[q].x[1]);
    });
}

std::vector<double> geodesic_ray_transform(const VectorField& h, const RadialProfile& c,
                                           const GeodesicFan& fan) {
    require(h.grid.dim == 2, errc::unsupported_dimension, "geodesic transforms are 2-D");
    return fan_integrals(fan, [&](const GeodesicPath& path, std::size_t q) {
        auto v = path.velocity(q, c);
        double h1 = bilinear(h.components[0], path.samples[q].x[0], path.samples[q].x[1]);
        double h2 = bilinear(h.components[1], path.samples[q].x[0], path.samples[q].x[1]);
        return h1 * v[0] + h2 * v[1];
    });
}

std::vector<double> geodesic_ray_transform(const Tensor2Field& h, const RadialProfile& c,
                                           const GeodesicFan& fan) {
    return fan_integrals(fan, [&](const GeodesicPath& path, std::size_t q) {
        auto v = path.velocity(q, c);
        double x = path.samples[q].x[0], y = path.samples[q].x[1];
        double t11 = bilinear(h.comp[0], x, y);
        double t12 = bilinear(h.comp[1], x, y);
        double t21 = bilinear(h.comp[2], x, y);
        double t22 = bilinear(h.comp[3], x, y);
        return t11 * v[0] * v[0] + (t12 + t21) * v[0] * v[1] + t22 * v[1] * v[1];
    });
}

VectorField apply_mixing(const Mixing2& A, const VectorField& h) {
    A.a1.validate();
    VectorField out(h.grid);
    // (A h)(xi) = h(A1 xi): components pick up A1^T
    for (std::size_t i = 0; i < h.components[0].values.size(); ++i) {
        double h1 = h.components[0].values[i], h2 = h.components[1].values[i];
        out.components[0].values[i] =
            A.a1.entries[0].values[i] * h1 + A.a1.entries[2].values[i] * h2;
        out.components[1].values[i] =
            A.a1.entries[1].values[i] * h1 + A.a1.entries[3].values[i] * h2;
    }
    return out;
}

namespace {

void load2x2(const MatrixWeight& w, std::size_t i, double out[2][2]) {
    out[0][0] = w.entries[0].values[i];
    out[0][1] = w.entries[1].values[i];
    out[1][0] = w.entries[2].values[i];
    out[1][1] = w.entries[3].values[i];
}

void matmul(const double a[2][2], const double b[2][2], double out[2][2]) {
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
}

void transpose(const double a[2][2], double out[2][2]) {
    out[0][0] = a[0][0];
    out[0][1] = a[1][0];
    out[1][0] = a[0][1];
    out[1][1] = a[1][1];
}

void invert(const double a[2][2], double out[2][2]) {
    double det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    out[0][0] = a[1][1] / det;
    out[0][1] = -a[0][1] / det;
    out[1][0] = -a[1][0] / det;
    out[1][1] = a[0][0] / det;
}

}  // namespace

Tensor2Field apply_mixing(const Mixing2& A, const Tensor2Field& h) {
    A.a1.validate();
    A.a2.validate();
    Tensor2Field out(h.grid);
    // (A h)(xi, eta) = h(A1 xi, A2 eta): H -> A1^T H A2
    for (std::size_t i = 0; i < h.comp[0].values.size(); ++i) {
        double H[2][2] = {{h.comp[0].values[i], h.comp[1].values[i]},
                          {h.comp[2].values[i], h.comp[3].values[i]}};
        double A1[2][2], A2[2][2], A1t[2][2], T[2][2], R[2][2];
        load2x2(A.a1, i, A1);
        load2x2(A.a2, i, A2);
        transpose(A1, A1t);
        matmul(A1t, H, T);
        matmul(T, A2, R);
        out.comp[0].values[i] = R[0][0];
        out.comp[1].values[i] = R[0][1];
        out.comp[2].values[i] = R[1][0];
        out.comp[3].values[i] = R[1][1];
    }
    return out;
}

std::vector<double> mixing_ray_transform(const VectorField& h, const Mixing2& A,
                                         const RadialProfile& c, const GeodesicFan& fan) {
    return geodesic_ray_transform(apply_mixing(A, h), c, fan);
}

std::vector<double> mixing_ray_transform(const Tensor2Field& h, const Mixing2& A,
                                         const RadialProfile& c, const GeodesicFan& fan) {
    return geodesic_ray_transform(apply_mixing(A, h), c, fan);
}

Tensor2Field symmetrize_mixing(const Tensor2Field& h, const Mixing2& A) {
    A.a1.validate();
    A.a2.validate();
    Tensor2Field out(h.grid);
    for (std::size_t i = 0; i < h.comp[0].values.size(); ++i) {
        double H[2][2] = {{h.comp[0].values[i], h.comp[1].values[i]},
                          {h.comp[2].values[i], h.comp[3].values[i]}};
        double A1[2][2], A2[2][2], A1t[2][2], T[2][2], K[2][2];
        load2x2(A.a1, i, A1);
        load2x2(A.a2, i, A2);
        transpose(A1, A1t);
        matmul(A1t, H, T);
        matmul(T, A2, K);
        double S[2][2] = {{K[0][0], 0.5 * (K[0][1] + K[1][0])},
                          {0.5 * (K[0][1] + K[1][0]), K[1][1]}};
        double I1[2][2], I2[2][2], I1t[2][2], U[2][2], V[2][2];
        invert(A1, I1);
        invert(A2, I2);
        transpose(I1, I1t);
        matmul(I1t, S, U);
        matmul(U, I2, V);
        out.comp[0].values[i] = V[0][0];
        out.comp[1].values[i] = V[0][1];
        out.comp[2].values[i] = V[1][0];
        out.comp[3].values[i] = V[1][1];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Randers

OneForm make_one_form(const ScalarField& b1, const ScalarField& b2) {
    check_same_grid(b1.grid, b2.grid, "make_one_form");
    OneForm beta{b1, b2, false};
    VectorField v(b1.grid);
    v.components[0] = b1;
    v.components[1] = b2;
    double curl_max = curl2d(v).max_abs();
    double scale = std::max(b1.max_abs(), b2.max_abs());
    beta.closed = scale == 0.0 || curl_max <= 1e-8 * scale;
    return beta;
}

double bicubic(const ScalarField& f, double x, double y) {
    const GridSpec& grid = f.grid;
    double h = grid.spacing();
    int n = grid.n_per_axis;
    double gx = (x + grid.extent) / h;
    double gy = (y + grid.extent) / h;
    if (gx < 0.0 || gy < 0.0 || gx > n - 1 || gy > n - 1) return 0.0;
    int ix = std::clamp(static_cast<int>(gx), 0, n - 2);
    int iy = std::clamp(static_cast<int>(gy), 0, n - 2);
    double tx = gx - ix, ty = gy - iy;
    auto sample = [&](int i, int j) {
        return f.at(std::clamp(i, 0, n - 1), std::clamp(j, 0, n - 1));
    };
    auto catmull = [](double pm1, double p0, double p1, double p2, double t) {
        return p0 + 0.5 * t * (p1 - pm1 +
                               t * (2.0 * pm1 - 5.0 * p0 + 4.0 * p1 - p2 +
                                    t * (3.0 * (p0 - p1) + p2 - pm1)));
    };
    double rows[4];
    for (int j = -1; j <= 2; ++j)
        rows[j + 1] = catmull(sample(ix - 1, iy + j), sample(ix, iy + j), sample(ix + 1, iy + j),
                              sample(ix + 2, iy + j), tx);
    return catmull(rows[0], rows[1], rows[2], rows[3], ty);
}

double one_form_path_integral(const OneForm& beta, const GeodesicPath& path,
                              const RadialProfile& c) {
    // cubic Hermite midpoints from (x, xdot) give an O(dt^4) Simpson rule
    double acc = 0.0;
    auto integrand = [&](const std::array<double, 2>& x, const std::array<double, 2>& v) {
        return bicubic(beta.b1, x[0], x[1]) * v[0] + bicubic(beta.b2, x[0], x[1]) * v[1];
    };
    for (std::size_t q = 0; q + 1 < path.samples.size(); ++q) {
        double dt = path.samples[q + 1].t - path.samples[q].t;
        if (dt <= 0.0) continue;
        auto va = path.velocity(q, c);
        auto vb = path.velocity(q + 1, c);
        const auto& xa = path.samples[q].x;
        const auto& xb = path.samples[q + 1].x;
        std::array<double, 2> xm, vm;
        for (int i = 0; i < 2; ++i) {
            xm[i] = 0.5 * (xa[i] + xb[i]) + dt * (va[i] - vb[i]) / 8.0;
            vm[i] = 1.5 * (xb[i] - xa[i]) / dt - 0.25 * (va[i] + vb[i]);
        }
        acc += dt / 6.0 * (integrand(xa, va) + 4.0 * integrand(xm, vm) + integrand(xb, vb));
    }
    return acc;
}

BoundaryDistanceMap randers_boundary_map(const RadialProfile& c, const OneForm& beta,
                                         int m_points) {
    require(beta.closed, errc::not_closed,
            "randers_boundary_map handles closed one-forms only (projective equivalence)");
    // dual-norm bound for the conformal metric: max c(x) |beta(x)| < 1
    const GridSpec& grid = beta.b1.grid;
    double worst = 0.0;
    for (int iy = 0; iy < grid.n_per_axis; ++iy)
        for (int ix = 0; ix < grid.n_per_axis; ++ix) {
            double x = grid.coord(ix), y = grid.coord(iy);
            double r = std::hypot(x, y);
            if (r > c.radius) continue;
            double mag = std::hypot(beta.b1.at(ix, iy), beta.b2.at(ix, iy));
            worst = std::max(worst, c.value(r) * mag);
        }
    require(worst < 1.0, errc::weight,
            "dual-norm bound violated: F_g + beta is not a Finsler norm (max c|beta| = " +
                std::to_string(worst) + ")");

    require(m_points >= 2 && m_points <= 64, errc::size,
            "boundary distance maps are capped at 64 points");
    BoundaryDistanceMap map;
    map.radius = c.radius;
    map.angles.resize(m_points);
    for (int i = 0; i < m_points; ++i) map.angles[i] = 2.0 * kPi * i / m_points;
    map.d.assign(static_cast<std::size_t>(m_points) * m_points, 0.0);
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < m_points; ++i)
        for (int j = 0; j < m_points; ++j)
            if (i != j) pairs.emplace_back(i, j);
    parallel_for(pairs.size(), [&](std::size_t k) {
        auto [i, j] = pairs[k];
        TravelTimeResult tt = travel_time(c, map.angles[i], map.angles[j]);
        map.d[static_cast<std::size_t>(i) * m_points + j] =
            tt.time + one_form_path_integral(beta, tt.path, c);
    });
    return map;
}

OneForm zermelo_first_order(const RadialProfile& c, const VectorField& W) {
    require(W.grid.dim == 2, errc::unsupported_dimension, "zermelo_first_order is 2-D");
    const GridSpec& grid = W.grid;
    ScalarField b1(grid), b2(grid);
    for (int iy = 0; iy < grid.n_per_axis; ++iy)
        for (int ix = 0; ix < grid.n_per_axis; ++ix) {
            double x = grid.coord(ix), y = grid.coord(iy);
            double r = std::min(std::hypot(x, y), c.radius);
            double cv = c.value(r);
            double wx = W.components[0].at(ix, iy), wy = W.components[1].at(ix, iy);
            require(std::hypot(wx, wy) <= 0.1 * cv, errc::perturbation_regime,
                    "flow exceeds the first-order regime |W| <= 0.1 c");
            b1.at(ix, iy) = -wx / (cv * cv);
            b2.at(ix, iy) = -wy / (cv * cv);
        }
    return make_one_form(b1, b2);
}

}  // namespace tomolab
