#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "spdelab/fft.hpp"

namespace spdelab {

/**
 * Uniform periodic grid on [0,L)^q, q in {1,2}, N points per axis.
 *
 * Mode m carries frequency xi_m = 2*pi*m/L with m in {-N/2,...,N/2-1}
 * (DFT layout: index j maps to m = j <= N/2-1 ? j : j-N).
 */
struct TorusGrid {
    int q = 1;
    double L = 1.0;
    std::size_t N = 8;
    double h = 0.125;

    std::size_t site_count() const { return q == 1 ? N : N * N; }

    // signed integer mode for DFT index j
    long mode_of(std::size_t j) const {
        return j < N / 2 ? static_cast<long>(j) : static_cast<long>(j) - static_cast<long>(N);
    }
    double freq_of(std::size_t j) const {
        return 2.0 * M_PI * static_cast<double>(mode_of(j)) / L;
    }
    double coord(std::size_t j) const { return h * static_cast<double>(j); }

    // shortest signed displacement between coordinates on the circle
    double wrap(double dx) const {
        dx = std::fmod(dx, L);
        if (dx > 0.5 * L) dx -= L;
        if (dx < -0.5 * L) dx += L;
        return dx;
    }
    // |xi_m|^2 for flat spectral index
    double freq_sq(std::size_t flat) const {
        if (q == 1) return freq_of(flat) * freq_of(flat);
        const double f0 = freq_of(flat / N), f1 = freq_of(flat % N);
        return f0 * f0 + f1 * f1;
    }

    bool operator==(const TorusGrid& o) const {
        return q == o.q && L == o.L && N == o.N;
    }
};

inline TorusGrid make_grid(int q, double L, std::size_t N) {
    if (q != 1 && q != 2) throw std::invalid_argument("make_grid: q must be 1 or 2");
    if (!(L > 0.0)) throw std::invalid_argument("make_grid: L must be positive");
    if (N < 8 || !fft::is_pow2(N))
        throw std::invalid_argument("make_grid: N must be a power of two >= 8");
    TorusGrid g;
    g.q = q;
    g.L = L;
    g.N = N;
    g.h = L / static_cast<double>(N);
    return g;
}

/**
 * Real scalar field sampled on a TorusGrid at one time instant.
 * Value-semantic; row-major for q=2.
 */
struct Field {
    TorusGrid grid;
    std::vector<double> values;

    Field() = default;
    explicit Field(const TorusGrid& g, double fill = 0.0)
        : grid(g), values(g.site_count(), fill) {}

    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
    std::size_t size() const { return values.size(); }

    double sup_norm() const {
        double m = 0.0;
        for (double v : values) m = std::max(m, std::fabs(v));
        return m;
    }
    double mean() const {
        double s = 0.0;
        for (double v : values) s += v;
        return s / static_cast<double>(values.size());
    }
    bool all_finite() const {
        for (double v : values)
            if (!std::isfinite(v)) return false;
        return true;
    }
    // grid quadrature of f (h^q weights)
    double integral() const {
        double s = 0.0;
        for (double v : values) s += v;
        return s * std::pow(grid.h, grid.q);
    }
};

inline Field operator+(Field a, const Field& b) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    return a;
}
inline Field operator-(Field a, const Field& b) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
    return a;
}
inline Field operator*(double c, Field a) {
    for (auto& v : a.values) v *= c;
    return a;
}

inline double sup_distance(const Field& a, const Field& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::fabs(a[i] - b[i]));
    return m;
}

// L2(grid) pairing <f,g> = sum f g h^q
inline double pairing(const Field& a, const Field& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s * std::pow(a.grid.h, a.grid.q);
}

/** Point of the parabolic space-time R_+ x [0,L)^q. */
struct ParabolicPoint {
    double t = 0.0;
    double x0 = 0.0;
    double x1 = 0.0;  // unused for q=1
};

inline ParabolicPoint make_parabolic_point(const TorusGrid& g, double t, double x0, double x1 = 0.0) {
    if (!std::isfinite(t) || t < 0.0)
        throw std::invalid_argument("ParabolicPoint: t must be finite and >= 0");
    auto reduce = [&](double x) {
        double r = std::fmod(x, g.L);
        return r < 0.0 ? r + g.L : r;
    };
    return {t, reduce(x0), g.q == 2 ? reduce(x1) : 0.0};
}

// d((t,x),(t',x')) = sqrt|t-t'| + |x-x'|, with the torus metric in space
inline double parabolic_distance(const TorusGrid& g, const ParabolicPoint& a, const ParabolicPoint& b) {
    const double d0 = g.wrap(a.x0 - b.x0);
    const double d1 = g.q == 2 ? g.wrap(a.x1 - b.x1) : 0.0;
    return std::sqrt(std::fabs(a.t - b.t)) + std::sqrt(d0 * d0 + d1 * d1);
}

namespace detail {

inline std::vector<fft::cplx> to_spectrum(const Field& f) {
    std::vector<fft::cplx> a(f.values.begin(), f.values.end());
    if (f.grid.q == 1)
        fft::forward(a);
    else
        fft::transform_2d(a, f.grid.N, false);
    return a;
}

inline Field from_spectrum(const TorusGrid& g, std::vector<fft::cplx>& a) {
    if (g.q == 1)
        fft::inverse(a);
    else
        fft::transform_2d(a, g.N, true);
    Field f(g);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = a[i].real();
    return f;
}

}  // namespace detail

/**
 * Heat semigroup P_t: spectral multiplier exp(-|xi_m|^2 t / 2).
 * P_0 is the identity, bit for bit.
 */
inline Field heat_semigroup_apply(const Field& f, double t) {
    if (!(t >= 0.0)) throw std::invalid_argument("heat_semigroup_apply: t must be >= 0");
    if (t == 0.0) return f;
    auto a = detail::to_spectrum(f);
    for (std::size_t i = 0; i < a.size(); ++i)
        a[i] *= std::exp(-0.5 * f.grid.freq_sq(i) * t);
    return detail::from_spectrum(f.grid, a);
}

/**
 * Spectral partial derivatives, one Field per axis.
 * Nyquist-mode coefficient is zeroed (real-output convention for even N).
 */
inline std::vector<Field> spectral_gradient(const Field& f) {
    const auto& g = f.grid;
    const auto base = detail::to_spectrum(f);
    std::vector<Field> out;
    out.reserve(g.q);
    for (int axis = 0; axis < g.q; ++axis) {
        auto a = base;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const std::size_t j = g.q == 1 ? i : (axis == 0 ? i / g.N : i % g.N);
            const bool nyquist = (j == g.N / 2);
            const double xi = nyquist ? 0.0 : g.freq_of(j);
            a[i] *= fft::cplx(0.0, xi);
        }
        out.push_back(detail::from_spectrum(g, a));
    }
    return out;
}

}  // namespace spdelab
