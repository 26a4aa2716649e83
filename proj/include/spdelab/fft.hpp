#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace spdelab::fft {

using cplx = std::complex<double>;

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

namespace detail {

// Twiddle table for one transform size, built once per thread.
struct Twiddles {
    std::vector<cplx> w;  // w[k] = exp(-2*pi*i*k/n), k < n/2
    explicit Twiddles(std::size_t n) : w(n / 2) {
        const double step = -6.283185307179586476925286766559 / static_cast<double>(n);
        for (std::size_t k = 0; k < n / 2; ++k)
            w[k] = std::polar(1.0, step * static_cast<double>(k));
    }
};

inline const Twiddles& twiddles_for(std::size_t n) {
    thread_local std::unordered_map<std::size_t, Twiddles> cache;
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, Twiddles(n)).first;
    return it->second;
}

}  // namespace detail

// In-place iterative radix-2 Cooley-Tukey. inverse=true applies the conjugate
// transform and the 1/n factor, so inverse(forward(x)) == x.
inline void transform(cplx* a, std::size_t n, bool inverse) {
    if (!is_pow2(n)) throw std::invalid_argument("fft: size must be a power of two");
    if (n == 1) return;
    // bit reversal
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    const auto& tw = detail::twiddles_for(n).w;
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t stride = n / len;
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t k = 0; k < len / 2; ++k) {
                cplx w = tw[k * stride];
                if (inverse) w = std::conj(w);
                cplx u = a[i + k];
                cplx v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
            }
        }
    }
    if (inverse) {
        const double inv = 1.0 / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) a[i] *= inv;
    }
}

inline void forward(std::vector<cplx>& a) { transform(a.data(), a.size(), false); }
inline void inverse(std::vector<cplx>& a) { transform(a.data(), a.size(), true); }

// Row-column transform of an N x N array stored row-major.
inline void transform_2d(std::vector<cplx>& a, std::size_t n, bool inverse_) {
    if (a.size() != n * n) throw std::invalid_argument("fft: bad 2d buffer size");
    for (std::size_t r = 0; r < n; ++r) transform(a.data() + r * n, n, inverse_);
    std::vector<cplx> col(n);
    for (std::size_t c = 0; c < n; ++c) {
        for (std::size_t r = 0; r < n; ++r) col[r] = a[r * n + c];
        transform(col.data(), n, inverse_);
        for (std::size_t r = 0; r < n; ++r) a[r * n + c] = col[r];
    }
}

}  // namespace spdelab::fft
