#ifndef TOMOLAB_COMMON_HPP
#define TOMOLAB_COMMON_HPP

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace tomolab {

// Error categories. Values are stable: the C API exposes them verbatim.
enum class errc : int {
    ok = 0,
    config = 1,
    shape = 2,
    domain = 3,
    unsupported_dimension = 4,
    unsupported_order = 5,
    insufficient_data = 6,
    size = 7,
    convergence = 8,
    dirichlet_eigenvalue = 9,
    weight = 10,
    placement = 11,
    degenerate_input = 12,
    divergent_kernel = 13,
    trapping = 14,
    shooting = 15,
    invalid_data = 16,
    not_closed = 17,
    perturbation_regime = 18,
    io = 19,
    internal = 20,
};

class error : public std::runtime_error {
public:
    error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    errc code() const { return code_; }

private:
    errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw error(code, what); }

inline void require(bool ok, errc code, const std::string& what) {
    if (!ok) fail(code, what);
}

// ---------------------------------------------------------------------------
// Threading. A process-wide worker cap; all parallel loops write to disjoint
// outputs and combine serially, so results do not depend on the thread count.

void set_max_threads(int n);
int max_threads();

// Runs fn(i) for i in [0, n). Chunks are contiguous per worker.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

// ---------------------------------------------------------------------------
// Deterministic RNG (splitmix64). Independent of platform and libstdc++
// distribution internals, so seeded phantoms are bit-identical everywhere.

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed + 0x9e3779b97f4a7c15ull) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    // standard normal via Box-Muller (one value per call, no caching)
    double normal();

private:
    std::uint64_t state_;
};

// ---------------------------------------------------------------------------
// Small numerics shared across modules.

// Least-squares fit of b ~ scale*a (+ offset when with_offset), over the
// entries selected by `use` (empty = all). Returns {scale, offset, rel_resid}.
struct ScaleFit {
    double scale = 0.0;
    double offset = 0.0;
    double rel_residual = 0.0;  // ||b - scale*a - offset|| / ||b||
};
ScaleFit fit_scale(const std::vector<double>& a, const std::vector<double>& b,
                   const std::vector<std::uint8_t>& use, bool with_offset);

// Adaptive Simpson on [a, b] to absolute tolerance tol.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol);

// FNV-1a digest of a byte range, as fixed-width hex. Used for manifests.
std::string fnv1a_hex(const void* data, std::size_t n);

}  // namespace tomolab

#endif
