#include "tomolab/tomolab.h"

#include <cstring>
#include <string>

#include "tomolab/experiments.hpp"
#include "tomolab/fields.hpp"
#include "tomolab/fractional.hpp"
#include "tomolab/geodesic.hpp"
#include "tomolab/io.hpp"
#include "tomolab/vectorfield.hpp"
#include "tomolab/xray.hpp"

using namespace tomolab;

namespace {

thread_local std::string g_last_error;

tl_status capture(const std::exception& e) {
    g_last_error = e.what();
    if (const auto* err = dynamic_cast<const error*>(&e))
        return static_cast<tl_status>(static_cast<int>(err->code()));
    return TL_ERR_INTERNAL;
}

template <typename Fn>
tl_status guarded(Fn&& fn) {
    try {
        fn();
        return TL_OK;
    } catch (const std::exception& e) {
        return capture(e);
    }
}

GridSpec to_grid(tl_grid g) { return make_grid(g.dim, g.n_per_axis, g.extent); }

}  // namespace

struct tl_field {
    ScalarField f;
};
struct tl_vector_field {
    VectorField h;
};
struct tl_line_set {
    LineSet lines;
};
struct tl_sinogram {
    Sinogram g;
    GridSpec grid;  // source grid, for the CSV sidecar
};
struct tl_profile {
    RadialProfile c;
};
struct tl_boundary_map {
    BoundaryDistanceMap map;
};

extern "C" {

const char* tl_last_error(void) { return g_last_error.c_str(); }
const char* tl_version(void) { return "1.0.0"; }
void tl_set_max_threads(int n) { set_max_threads(n); }

tl_status tl_field_create(tl_grid grid, tl_field** out) {
    return guarded([&] { *out = new tl_field{ScalarField(to_grid(grid))}; });
}

tl_status tl_field_phantom(tl_grid grid, const char* kind, uint64_t seed, tl_field** out) {
    return guarded([&] {
        *out = new tl_field{
            make_scalar_phantom(to_grid(grid), phantom_kind_from_string(kind), seed)};
    });
}

tl_status tl_field_load_raw(const char* path, tl_field** out) {
    return guarded([&] { *out = new tl_field{read_field_raw(path)}; });
}

tl_status tl_field_save_raw(const tl_field* f, const char* path, const char* kind) {
    return guarded([&] { write_field_raw(f->f, path, kind); });
}

tl_status tl_field_export_pgm(const tl_field* f, const char* path) {
    return guarded([&] { write_field_pgm(f->f, path); });
}

tl_status tl_field_export_slice_csv(const tl_field* f, const char* path, int axis, int index) {
    return guarded([&] { write_field_slice_csv(f->f, path, axis, index); });
}

tl_status tl_field_data(tl_field* f, double** values, size_t* count) {
    return guarded([&] {
        *values = f->f.values.data();
        *count = f->f.values.size();
    });
}

tl_status tl_field_grid(const tl_field* f, tl_grid* out) {
    return guarded([&] {
        *out = tl_grid{f->f.grid.dim, f->f.grid.n_per_axis, f->f.grid.extent};
    });
}

void tl_field_destroy(tl_field* f) { delete f; }

tl_status tl_vector_phantom_swirl(tl_grid grid, uint64_t seed, tl_vector_field** out) {
    return guarded([&] { *out = new tl_vector_field{make_swirl_phantom(to_grid(grid), seed)}; });
}

tl_status tl_vector_field_save_raw(const tl_vector_field* h, const char* path, const char* kind) {
    return guarded([&] { write_vector_field_raw(h->h, path, kind); });
}

void tl_vector_field_destroy(tl_vector_field* h) { delete h; }

tl_status tl_line_set_uniform(int n_angles, int n_offsets, double extent, tl_line_set** out) {
    return guarded(
        [&] { *out = new tl_line_set{make_uniform_lines(n_angles, n_offsets, extent)}; });
}

void tl_line_set_destroy(tl_line_set* lines) { delete lines; }

tl_status tl_sinogram_data(tl_sinogram* g, double** values, size_t* count, int* n_angles,
                           int* n_offsets) {
    return guarded([&] {
        *values = g->g.values.data();
        *count = g->g.values.size();
        *n_angles = g->g.lines.n_angles();
        *n_offsets = g->g.lines.n_offsets();
    });
}

tl_status tl_sinogram_save_csv(const tl_sinogram* g, const char* path, tl_grid grid) {
    return guarded([&] { write_sinogram_csv(g->g, path, to_grid(grid)); });
}

tl_status tl_sinogram_load_csv(const char* path, tl_sinogram** out) {
    return guarded([&] {
        Sinogram s = read_sinogram_csv(path);
        *out = new tl_sinogram{std::move(s), GridSpec{}};
    });
}

void tl_sinogram_destroy(tl_sinogram* g) { delete g; }

tl_status tl_xray_forward(const tl_field* f, const tl_line_set* lines, tl_sinogram** out) {
    return guarded(
        [&] { *out = new tl_sinogram{xray_forward(f->f, lines->lines), f->f.grid}; });
}

tl_status tl_backproject(const tl_sinogram* g, tl_grid grid, tl_field** out) {
    return guarded([&] { *out = new tl_field{backproject(g->g, to_grid(grid))}; });
}

tl_status tl_normal_scalar(const tl_field* f, const tl_line_set* lines, tl_field** out) {
    return guarded([&] { *out = new tl_field{normal_scalar(f->f, lines->lines)}; });
}

tl_status tl_fbp_reconstruct(const tl_sinogram* g, tl_grid grid, tl_field** out) {
    return guarded([&] { *out = new tl_field{fbp_reconstruct(g->g, to_grid(grid))}; });
}

tl_status tl_xray_vector(const tl_vector_field* h, const tl_line_set* lines, tl_sinogram** out) {
    return guarded([&] {
        VectorSinogram vs = xray_vector(h->h, lines->lines);
        Sinogram s(lines->lines);
        s.values = vs.values;
        *out = new tl_sinogram{std::move(s), h->h.grid};
    });
}

tl_status tl_fractional_laplacian(const tl_field* f, double s, int pad_factor, tl_field** out) {
    return guarded([&] {
        SpectralPlan plan = make_spectral_plan(f->f.grid, pad_factor);
        *out = new tl_field{
            fractional_laplacian(f->f, FracExponent(s, f->f.grid.dim), plan)};
    });
}

tl_status tl_riesz_potential(const tl_field* f, double alpha, int pad_factor, tl_field** out) {
    return guarded([&] {
        SpectralPlan plan = make_spectral_plan(f->f.grid, pad_factor);
        *out = new tl_field{riesz_potential(f->f, alpha, plan)};
    });
}

tl_status tl_poincare_ratio(const tl_field* f, double s, double t, int pad_factor,
                            double* ratio) {
    return guarded([&] {
        SpectralPlan plan = make_spectral_plan(f->f.grid, pad_factor);
        *ratio = poincare_ratio(f->f, s, t, plan);
    });
}

tl_status tl_ucp_rank_experiment(tl_grid grid, double s, int block_i0, int block_width,
                                 int constraint, int pad_factor, tl_rank_report* out) {
    return guarded([&] {
        GridSpec g = to_grid(grid);
        RegionMask V = make_block_mask(g, {block_i0, block_i0, 0}, block_width);
        PolyOperator P = constraint == 0   ? PolyOperator::one()
                         : constraint == 1 ? PolyOperator::coordinate(0)
                                           : PolyOperator::laplacian_symbol(2);
        UcpRankReport rep =
            ucp_rank_experiment(g, FracExponent(s, g.dim), V, P, make_spectral_plan(g, pad_factor));
        out->sigma_min = rep.sigma_min;
        out->sigma_max = rep.sigma_max;
        out->n_unknowns = rep.n_unknowns;
        out->n_equations = rep.n_equations;
    });
}

tl_status tl_profile_create(const double* coeffs, size_t n_coeffs, double radius,
                            tl_profile** out) {
    return guarded([&] {
        std::vector<double> cs(coeffs, coeffs + n_coeffs);
        *out = new tl_profile{make_radial_profile(cs, radius)};
    });
}

tl_status tl_herglotz_check(const tl_profile* c, int* satisfied, double* margin) {
    return guarded([&] {
        HerglotzResult r = herglotz_check(c->c);
        *satisfied = r.satisfied ? 1 : 0;
        *margin = r.margin;
    });
}

tl_status tl_travel_time(const tl_profile* c, double angle_from, double angle_to, double* time) {
    return guarded([&] { *time = travel_time(c->c, angle_from, angle_to).time; });
}

tl_status tl_boundary_distance_map(const tl_profile* c, int m_points, tl_boundary_map** out) {
    return guarded([&] { *out = new tl_boundary_map{boundary_distance_map(c->c, m_points)}; });
}

tl_status tl_boundary_map_at(const tl_boundary_map* map, int i, int j, double* value) {
    return guarded([&] {
        require(i >= 0 && i < map->map.size() && j >= 0 && j < map->map.size(), errc::shape,
                "boundary map index out of range");
        *value = map->map.at(i, j);
    });
}

tl_status tl_boundary_map_save_csv(const tl_boundary_map* map, const char* path) {
    return guarded([&] {
        int m = map->map.size();
        std::vector<std::vector<double>> rows(m, std::vector<double>(m));
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) rows[i][j] = map->map.at(i, j);
        write_matrix_csv(path, map->map.angles, rows);
    });
}

void tl_boundary_map_destroy(tl_boundary_map* map) { delete map; }
void tl_profile_destroy(tl_profile* c) { delete c; }

tl_status tl_herglotz_invert(const double* separations, const double* times, size_t n,
                             double radius, double* out_r, double* out_c) {
    return guarded([&] {
        std::vector<double> seps(separations, separations + n);
        std::vector<double> ts(times, times + n);
        HerglotzInversion inv = herglotz_invert(seps, ts, radius);
        std::memcpy(out_r, inv.r.data(), n * sizeof(double));
        std::memcpy(out_c, inv.c.data(), n * sizeof(double));
    });
}

int tl_run_config(const char* config_path) {
    try {
        return run_config_file(config_path);
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return 2;
    }
}

int tl_report(const char* manifest_dir) {
    try {
        return write_report(manifest_dir);
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return 2;
    }
}

tl_status tl_list_experiments(char* buffer, size_t buffer_size) {
    return guarded([&] {
        std::string all;
        for (const auto& name : list_experiments()) all += name + "\n";
        require(all.size() + 1 <= buffer_size, errc::size, "buffer too small");
        std::memcpy(buffer, all.c_str(), all.size() + 1);
    });
}

}  // extern "C"
