#ifndef TOMOLAB_SPECTRAL_UTIL_HPP
#define TOMOLAB_SPECTRAL_UTIL_HPP

#include <complex>
#include <vector>

#include "tomolab/grid.hpp"

namespace tomolab::spectral {

// Zero-padded periodic workspace shared by the Fourier-multiplier operators.
// The unpadded field occupies indices [0, n) per axis; the torus period is
// m*h where m is the padded size.
struct Workspace {
    int dim = 2;
    int n = 0;       // unpadded points per axis
    int m = 0;       // padded points per axis (even)
    double step = 0; // grid spacing h
    std::vector<std::complex<double>> data;  // m^dim

    std::size_t index(int ix, int iy, int iz = 0) const {
        std::size_t mm = static_cast<std::size_t>(m);
        return (static_cast<std::size_t>(iz) * mm + static_cast<std::size_t>(iy)) * mm +
               static_cast<std::size_t>(ix);
    }
};

Workspace embed(const ScalarField& f, int padded_size);
ScalarField crop(const Workspace& ws, const GridSpec& grid);

void fft(Workspace& ws, bool forward);  // backward includes the 1/M normalization

// Angular frequency of padded index k (0..m): 2*pi*k_signed/(m*h).
double frequency(int k, int m, double step);

// Applies fn(flat_index, |xi|^2) over the padded frequency lattice.
void for_each_mode(const Workspace& ws, const std::function<void(std::size_t, double)>& fn);

}  // namespace tomolab::spectral

#endif
