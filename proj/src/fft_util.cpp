#include "fft_util.hpp"

#include <fftw3.h>

#include <mutex>

namespace tomolab::fftu {

namespace {
// FFTW planning is not thread safe; execution of a created plan is.
std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

void fft_nd(std::complex<double>* data, const std::vector<int>& dims, bool forward) {
    // FFTW wants row-major with the last axis contiguous; our first axis is
    // contiguous, so pass dims reversed.
    std::vector<int> rdims(dims.rbegin(), dims.rend());
    auto* ptr = reinterpret_cast<fftw_complex*>(data);
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(plan_mutex());
        plan = fftw_plan_dft(static_cast<int>(rdims.size()), rdims.data(), ptr, ptr,
                             forward ? FFTW_FORWARD : FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(plan_mutex());
        fftw_destroy_plan(plan);
    }
}

void fft_1d(std::vector<std::complex<double>>& data, bool forward) {
    fft_nd(data.data(), {static_cast<int>(data.size())}, forward);
}

int next_pow2(int n) {
    int p = 1;
    while (p < n) p <<= 1;
    return p;
}

}  // namespace tomolab::fftu
