#ifndef TOMOLAB_FFT_UTIL_HPP
#define TOMOLAB_FFT_UTIL_HPP

#include <complex>
#include <vector>

namespace tomolab::fftu {

// Complex-to-complex FFT, unnormalized in both directions (inverse = backward/N).
// dims are in storage order with the first axis fastest (x, y, z).
void fft_nd(std::complex<double>* data, const std::vector<int>& dims, bool forward);

void fft_1d(std::vector<std::complex<double>>& data, bool forward);

// Smallest power of two >= n.
int next_pow2(int n);

}  // namespace tomolab::fftu

#endif
