#include <doctest.h>

#include <cmath>

#include "tomolab/xray.hpp"

using namespace tomolab;

namespace {

constexpr double kPi = 3.14159265358979323846;

ScalarField gaussian_field(const GridSpec& g, double sigma) {
    ScalarField f(g);
    for (int iy = 0; iy < g.n_per_axis; ++iy)
        for (int ix = 0; ix < g.n_per_axis; ++ix) {
            double x = g.coord(ix), y = g.coord(iy);
            f.at(ix, iy) = std::exp(-(x * x + y * y) / (2.0 * sigma * sigma));
        }
    return f;
}

// Smooth random sinogram: Gaussian bumps in (theta, s).
Sinogram random_smooth_sinogram(const LineSet& lines, std::uint64_t seed) {
    Sinogram g(lines);
    Rng rng(seed);
    int nb = 4 + static_cast<int>(seed % 3);
    std::vector<std::array<double, 4>> bumps;
    for (int b = 0; b < nb; ++b)
        bumps.push_back({rng.uniform(0.0, kPi), rng.uniform(-0.8, 0.8), rng.uniform(0.25, 0.5),
                         rng.uniform(-1.0, 1.0)});
    for (int k = 0; k < lines.n_angles(); ++k)
        for (int l = 0; l < lines.n_offsets(); ++l) {
            double v = 0.0;
            for (const auto& b : bumps) {
                double dth = lines.angles[k] - b[0];
                double dss = lines.offsets[l] - b[1];
                v += b[3] * std::exp(-(dth * dth + dss * dss) / (2.0 * b[2] * b[2]));
            }
            g.at(k, l) = v;
        }
    return g;
}

}  // namespace

TEST_CASE("line set factory invariants") {
    LineSet lines = make_uniform_lines(90, 91, 1.0);
    CHECK(lines.angles.front() == 0.0);
    CHECK(lines.angles.back() < kPi);
    CHECK(lines.offsets.front() == doctest::Approx(-std::sqrt(2.0)));
    CHECK(lines.offsets.back() == doctest::Approx(std::sqrt(2.0)));
    CHECK(lines.offsets[45] == doctest::Approx(0.0));
    CHECK_THROWS_AS(make_uniform_lines(0, 10, 1.0), error);
}

TEST_CASE("forward transform oracles") {
    SUBCASE("disk indicator chord length") {
        GridSpec g = make_grid(2, 128, 1.0);
        ScalarField f(g);
        for (int iy = 0; iy < 128; ++iy)
            for (int ix = 0; ix < 128; ++ix) {
                double x = g.coord(ix), y = g.coord(iy);
                f.at(ix, iy) = (x * x + y * y <= 0.25) ? 1.0 : 0.0;
            }
        LineSet lines = make_uniform_lines(4, 129, 1.0);
        Sinogram sino = xray_forward(f, lines);
        // center offset = 0 -> chord 2r = 1
        for (int k = 0; k < 4; ++k) CHECK(std::abs(sino.at(k, 64) - 1.0) <= 2.0 * g.spacing());
    }

    SUBCASE("gaussian line integral against the 1-D closed form") {
        GridSpec g = make_grid(2, 128, 1.0);
        double sigma = 0.2;
        ScalarField f = gaussian_field(g, sigma);
        LineSet lines = make_uniform_lines(12, 129, 1.0);
        Sinogram sino = xray_forward(f, lines);
        for (int k = 0; k < lines.n_angles(); ++k)
            for (int l = 0; l < lines.n_offsets(); ++l) {
                double s = lines.offsets[l];
                if (std::abs(s) > 0.5) continue;  // keep the truncated tail negligible
                double expected = sigma * std::sqrt(2.0 * kPi) * std::exp(-s * s / (2 * sigma * sigma));
                CHECK(sino.at(k, l) == doctest::Approx(expected).epsilon(1e-3));
            }
    }

    SUBCASE("rotation equivariance") {
        GridSpec g = make_grid(2, 128, 1.0);
        ScalarField f = make_scalar_phantom(g, PhantomKind::gaussian_bumps, 3);
        int n_angles = 36;
        LineSet lines = make_uniform_lines(n_angles, 129, 1.0);
        double phi = lines.angles[5];
        // rotate f by phi via bilinear resampling
        ScalarField rot(g);
        for (int iy = 0; iy < 128; ++iy)
            for (int ix = 0; ix < 128; ++ix) {
                double x = g.coord(ix), y = g.coord(iy);
                double xr = std::cos(phi) * x - std::sin(phi) * y;
                double yr = std::sin(phi) * x + std::cos(phi) * y;
                rot.at(ix, iy) = bilinear(f, xr, yr);
            }
        Sinogram a = xray_forward(rot, lines);
        Sinogram b = xray_forward(f, lines);
        double scale = b.max_abs(), worst = 0.0;
        for (int k = 0; k + 5 < n_angles; ++k)
            for (int l = 0; l < lines.n_offsets(); ++l)
                worst = std::max(worst, std::abs(a.at(k, l) - b.at(k + 5, l)));
        CHECK(worst <= 1e-2 * scale);
    }

    SUBCASE("3-D grids are rejected") {
        GridSpec g3 = make_grid(3, 16, 1.0);
        ScalarField f(g3);
        CHECK_THROWS_AS(xray_forward(f, make_uniform_lines(8, 17, 1.0)), error);
    }

    SUBCASE("evenness on the extended line set") {
        GridSpec g = make_grid(2, 64, 1.0);
        ScalarField f = make_scalar_phantom(g, PhantomKind::ellipse_sum, 9);
        LineSet base = make_uniform_lines(16, 65, 1.0);
        LineSet shifted = base;
        for (auto& th : shifted.angles) th += kPi;
        Sinogram a = xray_forward(f, base);
        Sinogram b = xray_forward(f, shifted);
        double worst = 0.0;
        int nl = base.n_offsets();
        for (int k = 0; k < 16; ++k)
            for (int l = 0; l < nl; ++l)
                worst = std::max(worst, std::abs(a.at(k, l) - b.at(k, nl - 1 - l)));
        CHECK(worst <= 1e-10 * a.max_abs());
    }
}

TEST_CASE("backprojection") {
    GridSpec g = make_grid(2, 64, 1.0);
    LineSet lines = make_uniform_lines(90, 65, 1.0);

    SUBCASE("zero sinogram backprojects to zero") {
        Sinogram zero(lines);
        CHECK(backproject(zero, g).max_abs() == 0.0);
    }

    SUBCASE("single-line impulse produces a ridge within one offset bin") {
        Sinogram g1(lines);
        int k0 = 17, l0 = 40;
        g1.at(k0, l0) = 1.0;
        ScalarField bp = backproject(g1, g);
        double theta = lines.angles[k0], s0 = lines.offsets[l0], ds = lines.offset_step();
        for (int iy = 0; iy < 64; ++iy)
            for (int ix = 0; ix < 64; ++ix) {
                if (bp.at(ix, iy) == 0.0) continue;
                double s = g.coord(ix) * std::cos(theta) + g.coord(iy) * std::sin(theta);
                CHECK(std::abs(s - s0) < ds);
            }
    }

    SUBCASE("adjointness within 1e-3 relative") {
        LineSet lines90 = make_uniform_lines(90, 92, 1.0);
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            ScalarField f = make_scalar_phantom(g, PhantomKind::gaussian_bumps, seed);
            Sinogram gg = random_smooth_sinogram(lines90, 100 + seed);
            Sinogram Xf = xray_forward(f, lines90);
            ScalarField Xtg = backproject(gg, g);
            double lhs = sinogram_inner(Xf, gg);
            double rhs = inner(f, Xtg);
            CHECK(std::abs(lhs - rhs) <= 1e-3 * sinogram_norm(Xf) * sinogram_norm(gg));
        }
    }
}

TEST_CASE("normal operator basics") {
    GridSpec g = make_grid(2, 64, 1.0);
    LineSet lines = make_uniform_lines(90, 65, 1.0);

    SUBCASE("zero in, zero out") {
        ScalarField zero(g);
        CHECK(normal_scalar(zero, lines).max_abs() == 0.0);
    }

    SUBCASE("linearity within 1e-10 relative") {
        ScalarField f = make_scalar_phantom(g, PhantomKind::gaussian_bumps, 1);
        ScalarField h = make_scalar_phantom(g, PhantomKind::ellipse_sum, 2);
        ScalarField sum(g);
        for (std::size_t i = 0; i < sum.values.size(); ++i)
            sum.values[i] = f.values[i] + h.values[i];
        ScalarField a = normal_scalar(sum, lines);
        ScalarField b = normal_scalar(f, lines);
        ScalarField c = normal_scalar(h, lines);
        double scale = a.max_abs(), worst = 0.0;
        for (std::size_t i = 0; i < a.values.size(); ++i)
            worst = std::max(worst, std::abs(a.values[i] - b.values[i] - c.values[i]));
        CHECK(worst <= 1e-10 * scale);
    }

    SUBCASE("translation covariance by one grid cell") {
        ScalarField f = make_scalar_phantom(g, PhantomKind::gaussian_bumps, 6);
        // shift by one cell in x
        ScalarField fs(g);
        for (int iy = 0; iy < 64; ++iy)
            for (int ix = 1; ix < 64; ++ix) fs.at(ix, iy) = f.at(ix - 1, iy);
        ScalarField a = normal_scalar(fs, lines);
        ScalarField b = normal_scalar(f, lines);
        double scale = 0.0, worst = 0.0;
        for (int iy = 8; iy < 56; ++iy)
            for (int ix = 8; ix < 56; ++ix) {
                scale = std::max(scale, std::abs(a.at(ix, iy)));
                worst = std::max(worst, std::abs(a.at(ix, iy) - b.at(ix - 1, iy)));
            }
        CHECK(worst <= 1e-2 * scale);
    }
}

TEST_CASE("fbp reconstruction") {
    SUBCASE("fewer than 8 angles is an error") {
        GridSpec g = make_grid(2, 32, 1.0);
        Sinogram sino(make_uniform_lines(6, 33, 1.0));
        CHECK_THROWS_AS(fbp_reconstruct(sino, g), error);
    }

    SUBCASE("zero sinogram gives zero field") {
        GridSpec g = make_grid(2, 32, 1.0);
        Sinogram sino(make_uniform_lines(16, 33, 1.0));
        CHECK(fbp_reconstruct(sino, g).max_abs() == 0.0);
    }

    SUBCASE("round trip on the ellipse-sum phantom") {
        GridSpec g = make_grid(2, 128, 1.0);
        ScalarField f = make_scalar_phantom(g, PhantomKind::ellipse_sum, 0);
        LineSet lines = make_uniform_lines(256, 183, 1.0);
        Sinogram sino = xray_forward(f, lines);
        ScalarField rec = fbp_reconstruct(sino, g);
        double num = 0.0, den = 0.0;
        for (int iy = 0; iy < 128; ++iy)
            for (int ix = 0; ix < 128; ++ix) {
                double x = g.coord(ix), y = g.coord(iy);
                if (x * x + y * y > 0.64) continue;
                double d = rec.at(ix, iy) - f.at(ix, iy);
                num += d * d;
                den += f.at(ix, iy) * f.at(ix, iy);
            }
        CHECK(std::sqrt(num / den) < 0.06);

        // linearity: FBP of X0(c f) = c FBP(X0 f)
        Sinogram scaled = sino;
        for (auto& v : scaled.values) v *= 3.0;
        ScalarField rec3 = fbp_reconstruct(scaled, g);
        double worst = 0.0;
        for (std::size_t i = 0; i < rec.values.size(); ++i)
            worst = std::max(worst, std::abs(rec3.values[i] - 3.0 * rec.values[i]));
        CHECK(worst <= 1e-10 * rec.max_abs());
    }
}

TEST_CASE("lines through region") {
    GridSpec g = make_grid(2, 64, 1.0);
    LineSet lines = make_uniform_lines(24, 65, 1.0);

    SUBCASE("full grid flags every line that meets the square") {
        auto flags = lines_through_region(lines, make_full_mask(g));
        for (int k = 0; k < lines.n_angles(); ++k)
            for (int l = 0; l < lines.n_offsets(); ++l) {
                bool touches = !sample_line(g, lines.angles[k], lines.offsets[l]).points.empty();
                CHECK(flags[static_cast<std::size_t>(k) * lines.n_offsets() + l] == (touches ? 1 : 0));
            }
    }

    SUBCASE("distant line misses a small disk") {
        RegionMask disk = make_disk_mask(g, {0.0, 0.0, 0.0}, 0.2);
        auto flags = lines_through_region(lines, disk);
        for (int k = 0; k < lines.n_angles(); ++k)
            for (int l = 0; l < lines.n_offsets(); ++l)
                if (std::abs(lines.offsets[l]) > 0.5)
                    CHECK_FALSE(flags[static_cast<std::size_t>(k) * lines.n_offsets() + l]);
    }

    SUBCASE("monotone under mask inclusion") {
        RegionMask small = make_disk_mask(g, {0.2, 0.1, 0.0}, 0.15);
        RegionMask large = make_disk_mask(g, {0.2, 0.1, 0.0}, 0.4);
        auto fs = lines_through_region(lines, small);
        auto fl = lines_through_region(lines, large);
        for (std::size_t i = 0; i < fs.size(); ++i)
            if (fs[i]) CHECK(fl[i]);
    }
}
