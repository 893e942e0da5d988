/* tomolab C API: opaque handles and status codes over the C++ core.
 * All functions return tl_status unless stated otherwise; on failure the
 * thread-local message from tl_last_error() describes the problem. */

#ifndef TOMOLAB_TOMOLAB_H
#define TOMOLAB_TOMOLAB_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tl_status {
    TL_OK = 0,
    TL_ERR_CONFIG = 1,
    TL_ERR_SHAPE = 2,
    TL_ERR_DOMAIN = 3,
    TL_ERR_UNSUPPORTED_DIMENSION = 4,
    TL_ERR_UNSUPPORTED_ORDER = 5,
    TL_ERR_INSUFFICIENT_DATA = 6,
    TL_ERR_SIZE = 7,
    TL_ERR_CONVERGENCE = 8,
    TL_ERR_DIRICHLET_EIGENVALUE = 9,
    TL_ERR_WEIGHT = 10,
    TL_ERR_PLACEMENT = 11,
    TL_ERR_DEGENERATE_INPUT = 12,
    TL_ERR_DIVERGENT_KERNEL = 13,
    TL_ERR_TRAPPING = 14,
    TL_ERR_SHOOTING = 15,
    TL_ERR_INVALID_DATA = 16,
    TL_ERR_NOT_CLOSED = 17,
    TL_ERR_PERTURBATION_REGIME = 18,
    TL_ERR_IO = 19,
    TL_ERR_INTERNAL = 20
} tl_status;

const char* tl_last_error(void);
const char* tl_version(void);
void tl_set_max_threads(int n);

typedef struct tl_grid {
    int dim;        /* 2 or 3 */
    int n_per_axis; /* >= 8 */
    double extent;  /* half-width L; the grid covers [-L, L]^dim */
} tl_grid;

typedef struct tl_field tl_field;
typedef struct tl_vector_field tl_vector_field;
typedef struct tl_line_set tl_line_set;
typedef struct tl_sinogram tl_sinogram;
typedef struct tl_profile tl_profile;
typedef struct tl_boundary_map tl_boundary_map;

/* fields ------------------------------------------------------------ */
tl_status tl_field_create(tl_grid grid, tl_field** out);
tl_status tl_field_phantom(tl_grid grid, const char* kind, uint64_t seed, tl_field** out);
tl_status tl_field_load_raw(const char* path, tl_field** out);
tl_status tl_field_save_raw(const tl_field* f, const char* path, const char* kind);
tl_status tl_field_export_pgm(const tl_field* f, const char* path);
tl_status tl_field_export_slice_csv(const tl_field* f, const char* path, int axis, int index);
tl_status tl_field_data(tl_field* f, double** values, size_t* count);
tl_status tl_field_grid(const tl_field* f, tl_grid* out);
void tl_field_destroy(tl_field* f);

tl_status tl_vector_phantom_swirl(tl_grid grid, uint64_t seed, tl_vector_field** out);
tl_status tl_vector_field_save_raw(const tl_vector_field* h, const char* path, const char* kind);
void tl_vector_field_destroy(tl_vector_field* h);

/* line sets and sinograms ------------------------------------------- */
tl_status tl_line_set_uniform(int n_angles, int n_offsets, double extent, tl_line_set** out);
void tl_line_set_destroy(tl_line_set* lines);

tl_status tl_sinogram_data(tl_sinogram* g, double** values, size_t* count, int* n_angles,
                           int* n_offsets);
tl_status tl_sinogram_save_csv(const tl_sinogram* g, const char* path, tl_grid grid);
tl_status tl_sinogram_load_csv(const char* path, tl_sinogram** out);
void tl_sinogram_destroy(tl_sinogram* g);

/* scalar and vector line transforms ---------------------------------- */
tl_status tl_xray_forward(const tl_field* f, const tl_line_set* lines, tl_sinogram** out);
tl_status tl_backproject(const tl_sinogram* g, tl_grid grid, tl_field** out);
tl_status tl_normal_scalar(const tl_field* f, const tl_line_set* lines, tl_field** out);
tl_status tl_fbp_reconstruct(const tl_sinogram* g, tl_grid grid, tl_field** out);
tl_status tl_xray_vector(const tl_vector_field* h, const tl_line_set* lines, tl_sinogram** out);

/* fractional operators ------------------------------------------------ */
tl_status tl_fractional_laplacian(const tl_field* f, double s, int pad_factor, tl_field** out);
tl_status tl_riesz_potential(const tl_field* f, double alpha, int pad_factor, tl_field** out);
tl_status tl_poincare_ratio(const tl_field* f, double s, double t, int pad_factor, double* ratio);

typedef struct tl_rank_report {
    double sigma_min;
    double sigma_max;
    int n_unknowns;
    int n_equations;
} tl_rank_report;

/* constraint: 0 = identity, 1 = first-order (xi_1), 2 = laplacian symbol */
tl_status tl_ucp_rank_experiment(tl_grid grid, double s, int block_i0, int block_width,
                                 int constraint, int pad_factor, tl_rank_report* out);

/* geodesic module ------------------------------------------------------ */
tl_status tl_profile_create(const double* coeffs, size_t n_coeffs, double radius,
                            tl_profile** out);
tl_status tl_herglotz_check(const tl_profile* c, int* satisfied, double* margin);
tl_status tl_travel_time(const tl_profile* c, double angle_from, double angle_to, double* time);
tl_status tl_boundary_distance_map(const tl_profile* c, int m_points, tl_boundary_map** out);
tl_status tl_boundary_map_at(const tl_boundary_map* map, int i, int j, double* value);
tl_status tl_boundary_map_save_csv(const tl_boundary_map* map, const char* path);
void tl_boundary_map_destroy(tl_boundary_map* map);
void tl_profile_destroy(tl_profile* c);

tl_status tl_herglotz_invert(const double* separations, const double* times, size_t n,
                             double radius, double* out_r, double* out_c);

/* experiments front door ----------------------------------------------- */
/* returns the process exit code contract: 0 pass, 1 assertion failure,
 * 2 usage/config error */
int tl_run_config(const char* config_path);
int tl_report(const char* manifest_dir);
/* newline-separated names written into the caller's buffer */
tl_status tl_list_experiments(char* buffer, size_t buffer_size);

#ifdef __cplusplus
}
#endif

#endif
