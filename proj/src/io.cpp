#include "tomolab/io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>

#include <json.hpp>

namespace tomolab {

static_assert(std::endian::native == std::endian::little,
              "raw field format is little-endian; add byte swapping for this platform");

namespace {

void write_bytes(const std::string& path, const void* data, std::size_t n) {
    std::ofstream out(path, std::ios::binary);
    require(out.good(), errc::io, "cannot open '" + path + "' for writing");
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
    require(out.good(), errc::io, "write failed for '" + path + "'");
}

std::vector<char> read_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    require(in.good(), errc::io, "cannot open '" + path + "'");
    std::streamsize size = in.tellg();
    in.seekg(0);
    std::vector<char> buf(static_cast<std::size_t>(size));
    in.read(buf.data(), size);
    require(in.good(), errc::io, "read failed for '" + path + "'");
    return buf;
}

void write_sidecar(const GridSpec& grid, const std::string& path, const std::string& kind,
                   int n_components) {
    nlohmann::json j;
    j["dim"] = grid.dim;
    j["n_per_axis"] = grid.n_per_axis;
    j["extent"] = grid.extent;
    j["kind"] = kind;
    if (n_components > 1) j["components"] = n_components;
    write_text_file(path + ".json", j.dump(2) + "\n");
}

std::pair<GridSpec, nlohmann::json> read_sidecar(const std::string& path) {
    nlohmann::json j = nlohmann::json::parse(read_text_file(path + ".json"));
    GridSpec grid = make_grid(j.at("dim").get<int>(), j.at("n_per_axis").get<int>(),
                              j.at("extent").get<double>());
    return {grid, j};
}

}  // namespace

void write_field_raw(const ScalarField& f, const std::string& path, const std::string& kind) {
    write_bytes(path, f.values.data(), f.values.size() * sizeof(double));
    write_sidecar(f.grid, path, kind, 1);
}

ScalarField read_field_raw(const std::string& path) {
    auto [grid, sidecar] = read_sidecar(path);
    (void)sidecar;
    auto bytes = read_bytes(path);
    require(bytes.size() == grid.point_count() * sizeof(double), errc::io,
            "raw field size does not match its sidecar grid");
    ScalarField f(grid);
    std::memcpy(f.values.data(), bytes.data(), bytes.size());
    for (double v : f.values)
        require(std::isfinite(v), errc::invalid_data, "raw field contains non-finite values");
    return f;
}

void write_vector_field_raw(const VectorField& h, const std::string& path,
                            const std::string& kind) {
    std::vector<double> stacked;
    for (const auto& c : h.components)
        stacked.insert(stacked.end(), c.values.begin(), c.values.end());
    write_bytes(path, stacked.data(), stacked.size() * sizeof(double));
    write_sidecar(h.grid, path, kind, h.grid.dim);
}

VectorField read_vector_field_raw(const std::string& path) {
    auto [grid, sidecar] = read_sidecar(path);
    int comps = sidecar.value("components", grid.dim);
    require(comps == grid.dim, errc::io, "vector raw file has wrong component count");
    auto bytes = read_bytes(path);
    std::size_t per = grid.point_count() * sizeof(double);
    require(bytes.size() == per * static_cast<std::size_t>(comps), errc::io,
            "vector raw size does not match sidecar");
    VectorField h(grid);
    for (int j = 0; j < comps; ++j)
        std::memcpy(h.components[j].values.data(), bytes.data() + per * j, per);
    return h;
}

void write_field_pgm(const ScalarField& f, const std::string& path, double lo, double hi) {
    require(f.grid.dim == 2, errc::unsupported_dimension, "PGM export is 2-D only");
    if (lo >= hi) {
        lo = std::numeric_limits<double>::infinity();
        hi = -lo;
        for (double v : f.values) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (!(hi > lo)) hi = lo + 1.0;
    }
    int n = f.grid.n_per_axis;
    std::string header = "P5\n" + std::to_string(n) + " " + std::to_string(n) + "\n65535\n";
    std::vector<unsigned char> pixels;
    pixels.reserve(header.size() + static_cast<std::size_t>(n) * n * 2);
    pixels.insert(pixels.end(), header.begin(), header.end());
    for (int row = 0; row < n; ++row) {
        int iy = n - 1 - row;  // top image row = max y
        for (int ix = 0; ix < n; ++ix) {
            double t = (f.at(ix, iy) - lo) / (hi - lo);
            t = std::clamp(t, 0.0, 1.0);
            auto v = static_cast<std::uint16_t>(std::lround(t * 65535.0));
            pixels.push_back(static_cast<unsigned char>(v >> 8));  // PGM stores MSB first
            pixels.push_back(static_cast<unsigned char>(v & 0xff));
        }
    }
    write_bytes(path, pixels.data(), pixels.size());
    nlohmann::json j;
    j["window_min"] = lo;
    j["window_max"] = hi;
    j["n_per_axis"] = n;
    write_text_file(path + ".json", j.dump(2) + "\n");
}

void write_field_slice_csv(const ScalarField& f, const std::string& path, int axis, int iy,
                           int iz) {
    require(axis >= 0 && axis < f.grid.dim, errc::config, "slice axis out of range");
    std::ofstream out(path);
    require(out.good(), errc::io, "cannot open '" + path + "'");
    out << "coordinate,value\n";
    out.precision(17);
    int n = f.grid.n_per_axis;
    for (int i = 0; i < n; ++i) {
        int idx[3] = {i, iy, iz};
        if (axis == 1) {
            idx[0] = iy;
            idx[1] = i;
        } else if (axis == 2) {
            idx[0] = iy;
            idx[1] = iz;
            idx[2] = i;
        }
        out << f.grid.coord(i) << "," << f.at(idx[0], idx[1], idx[2]) << "\n";
    }
    require(out.good(), errc::io, "write failed for '" + path + "'");
}

void write_matrix_csv(const std::string& path, const std::vector<double>& header,
                      const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path);
    require(out.good(), errc::io, "cannot open '" + path + "'");
    out.precision(17);
    for (std::size_t i = 0; i < header.size(); ++i)
        out << header[i] << (i + 1 < header.size() ? "," : "");
    out << "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << row[i] << (i + 1 < row.size() ? "," : "");
        out << "\n";
    }
    require(out.good(), errc::io, "write failed for '" + path + "'");
}

CsvMatrix read_matrix_csv(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), errc::io, "cannot open '" + path + "'");
    CsvMatrix out;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::size_t pos = 0;
        while (pos <= line.size()) {
            std::size_t comma = line.find(',', pos);
            std::string cell = line.substr(pos, comma == std::string::npos ? comma : comma - pos);
            row.push_back(cell.empty() ? std::numeric_limits<double>::quiet_NaN()
                                       : std::stod(cell));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (first) {
            out.header = std::move(row);
            first = false;
        } else {
            out.rows.push_back(std::move(row));
        }
    }
    return out;
}

void write_matrix_pgm(const std::vector<double>& values, int n_rows, int n_cols,
                      const std::string& path, double lo, double hi) {
    require(values.size() == static_cast<std::size_t>(n_rows) * n_cols, errc::shape,
            "matrix pgm size mismatch");
    if (lo >= hi) {
        lo = std::numeric_limits<double>::infinity();
        hi = -lo;
        for (double v : values) {
            if (!std::isfinite(v)) continue;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (!(hi > lo)) hi = lo + 1.0;
    }
    std::string header =
        "P5\n" + std::to_string(n_cols) + " " + std::to_string(n_rows) + "\n65535\n";
    std::vector<unsigned char> pixels(header.begin(), header.end());
    for (int r = 0; r < n_rows; ++r)
        for (int c = 0; c < n_cols; ++c) {
            double v = values[static_cast<std::size_t>(r) * n_cols + c];
            double t = std::isfinite(v) ? std::clamp((v - lo) / (hi - lo), 0.0, 1.0) : 0.0;
            auto q = static_cast<std::uint16_t>(std::lround(t * 65535.0));
            pixels.push_back(static_cast<unsigned char>(q >> 8));
            pixels.push_back(static_cast<unsigned char>(q & 0xff));
        }
    write_bytes(path, pixels.data(), pixels.size());
    nlohmann::json j;
    j["window_min"] = lo;
    j["window_max"] = hi;
    j["rows"] = n_rows;
    j["cols"] = n_cols;
    write_text_file(path + ".json", j.dump(2) + "\n");
}

std::string read_text_file(const std::string& path) {
    auto bytes = read_bytes(path);
    return std::string(bytes.begin(), bytes.end());
}

void write_text_file(const std::string& path, const std::string& content) {
    write_bytes(path, content.data(), content.size());
}

}  // namespace tomolab
