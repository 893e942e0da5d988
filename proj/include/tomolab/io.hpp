#ifndef TOMOLAB_IO_HPP
#define TOMOLAB_IO_HPP

#include <string>
#include <vector>

#include "tomolab/grid.hpp"

namespace tomolab {

// Raw field format: little-endian float64, row-major (x fastest), plus a JSON
// sidecar <path>.json with {dim, n_per_axis, extent, kind}.
void write_field_raw(const ScalarField& f, const std::string& path, const std::string& kind);
ScalarField read_field_raw(const std::string& path);

// Vector fields: components stacked in one raw file, shared sidecar.
void write_vector_field_raw(const VectorField& h, const std::string& path, const std::string& kind);
VectorField read_vector_field_raw(const std::string& path);

// 16-bit binary PGM (P5) with a fixed min/max window recorded in a sidecar.
// Pass lo >= hi to use the field's own range.
void write_field_pgm(const ScalarField& f, const std::string& path, double lo = 0.0,
                     double hi = -1.0);

// CSV export of a 1-D slice along `axis` through fixed remaining indices.
void write_field_slice_csv(const ScalarField& f, const std::string& path, int axis, int iy,
                           int iz = 0);

// Generic CSV matrix with a numeric header row.
void write_matrix_csv(const std::string& path, const std::vector<double>& header,
                      const std::vector<std::vector<double>>& rows);

struct CsvMatrix {
    std::vector<double> header;
    std::vector<std::vector<double>> rows;
};
CsvMatrix read_matrix_csv(const std::string& path);

// Rectangular 16-bit PGM (rows x cols, row-major) with the window sidecar.
void write_matrix_pgm(const std::vector<double>& values, int n_rows, int n_cols,
                      const std::string& path, double lo = 0.0, double hi = -1.0);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace tomolab

#endif
