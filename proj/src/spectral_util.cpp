#include "spectral_util.hpp"

#include "fft_util.hpp"

namespace tomolab::spectral {

namespace {
constexpr double kTwoPi = 6.28318530717958647692528676656;
}

Workspace embed(const ScalarField& f, int padded_size) {
    Workspace ws;
    ws.dim = f.grid.dim;
    ws.n = f.grid.n_per_axis;
    ws.m = padded_size;
    ws.step = f.grid.spacing();
    require(ws.m >= ws.n, errc::config, "padded size smaller than the grid");
    std::size_t total = static_cast<std::size_t>(ws.m) * ws.m * (ws.dim == 3 ? ws.m : 1);
    ws.data.assign(total, 0.0);
    int nz = ws.dim == 3 ? ws.n : 1;
    for (int iz = 0; iz < nz; ++iz)
        for (int iy = 0; iy < ws.n; ++iy)
            for (int ix = 0; ix < ws.n; ++ix)
                ws.data[ws.index(ix, iy, iz)] = f.values[f.grid.index(ix, iy, iz)];
    return ws;
}

ScalarField crop(const Workspace& ws, const GridSpec& grid) {
    ScalarField out(grid);
    int nz = grid.dim == 3 ? grid.n_per_axis : 1;
    for (int iz = 0; iz < nz; ++iz)
        for (int iy = 0; iy < grid.n_per_axis; ++iy)
            for (int ix = 0; ix < grid.n_per_axis; ++ix)
                out.values[grid.index(ix, iy, iz)] = ws.data[ws.index(ix, iy, iz)].real();
    return out;
}

void fft(Workspace& ws, bool forward) {
    std::vector<int> dims(ws.dim, ws.m);
    fftu::fft_nd(ws.data.data(), dims, forward);
    if (!forward) {
        double scale = 1.0;
        for (int d = 0; d < ws.dim; ++d) scale /= ws.m;
        for (auto& v : ws.data) v *= scale;
    }
}

double frequency(int k, int m, double step) {
    int ks = k <= m / 2 ? k : k - m;
    return kTwoPi * ks / (m * step);
}

void for_each_mode(const Workspace& ws, const std::function<void(std::size_t, double)>& fn) {
    int m = ws.m;
    int mz = ws.dim == 3 ? m : 1;
    for (int kz = 0; kz < mz; ++kz) {
        double xz = ws.dim == 3 ? frequency(kz, m, ws.step) : 0.0;
        for (int ky = 0; ky < m; ++ky) {
            double xy = frequency(ky, m, ws.step);
            for (int kx = 0; kx < m; ++kx) {
                double xx = frequency(kx, m, ws.step);
                fn(ws.index(kx, ky, kz), xx * xx + xy * xy + xz * xz);
            }
        }
    }
}

}  // namespace tomolab::spectral
