#include "tomolab/common.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <mutex>

namespace tomolab {

namespace {

std::atomic<int> g_max_threads{0};  // 0 = unset, resolve lazily

int hardware_threads() {
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

}  // namespace

void set_max_threads(int n) { g_max_threads.store(n < 1 ? 1 : n); }

int max_threads() {
    int n = g_max_threads.load();
    if (n > 0) return n;
    if (const char* env = std::getenv("TOMOLAB_THREADS")) {
        int parsed = std::atoi(env);
        if (parsed >= 1) {
            g_max_threads.store(parsed);
            return parsed;
        }
    }
    n = hardware_threads();
    g_max_threads.store(n);
    return n;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    std::size_t workers = static_cast<std::size_t>(max_threads());
    if (workers > n) workers = n;
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::size_t chunk = (n + workers - 1) / workers;
    std::exception_ptr first_error;
    std::mutex err_mutex;
    for (std::size_t w = 0; w < workers; ++w) {
        std::size_t begin = w * chunk;
        std::size_t end = begin + chunk < n ? begin + chunk : n;
        if (begin >= end) break;
        pool.emplace_back([&, begin, end] {
            try {
                for (std::size_t i = begin; i < end; ++i) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

double Rng::normal() {
    // Box-Muller; regenerate on the (measure-zero) log(0) corner.
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

ScaleFit fit_scale(const std::vector<double>& a, const std::vector<double>& b,
                   const std::vector<std::uint8_t>& use, bool with_offset) {
    require(a.size() == b.size(), errc::shape, "fit_scale: size mismatch");
    require(use.empty() || use.size() == a.size(), errc::shape, "fit_scale: mask size mismatch");
    double saa = 0, sab = 0, sa = 0, sb = 0, sbb = 0, count = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!use.empty() && !use[i]) continue;
        saa += a[i] * a[i];
        sab += a[i] * b[i];
        sa += a[i];
        sb += b[i];
        sbb += b[i] * b[i];
        count += 1;
    }
    require(count > 0, errc::degenerate_input, "fit_scale: empty selection");
    ScaleFit fit;
    if (with_offset) {
        double det = saa * count - sa * sa;
        require(std::abs(det) > 1e-300, errc::degenerate_input, "fit_scale: singular system");
        fit.scale = (sab * count - sa * sb) / det;
        fit.offset = (saa * sb - sa * sab) / det;
    } else {
        require(saa > 0, errc::degenerate_input, "fit_scale: zero reference");
        fit.scale = sab / saa;
        fit.offset = 0.0;
    }
    double resid2 = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!use.empty() && !use[i]) continue;
        double r = b[i] - fit.scale * a[i] - fit.offset;
        resid2 += r * r;
    }
    fit.rel_residual = sbb > 0 ? std::sqrt(resid2 / sbb) : 0.0;
    return fit;
}

namespace {

double simpson_step(const std::function<double(double)>& f, double a, double b, double fa,
                    double fm, double fb, double whole, double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol) {
    double m = 0.5 * (a + b);
    double fa = f(a), fm = f(m), fb = f(b);
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_step(f, a, b, fa, fm, fb, whole, tol, 48);
}

std::string fnv1a_hex(const void* data, std::size_t n) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

}  // namespace tomolab
