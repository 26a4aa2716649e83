#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "spdelab/fft.hpp"
#include "spdelab/grid.hpp"
#include "spdelab/numerics.hpp"
#include "spdelab/rng.hpp"

namespace spdelab::noise {

enum class ZeroModePolicy { clamp_to_first_mode, zero };

/**
 * Driving noise: Gaussian, white in time, spatially homogeneous with the
 * Riesz correlation k(w,z) = |w-z|^{-alpha} (periodized on the torus).
 * (seed, stream_id) key the counter-based generator; step_index addresses the
 * time slab, so increments are reproducible and order-independent.
 */
struct NoiseSpec {
    double alpha = 0.5;
    ZeroModePolicy zero_mode_policy = ZeroModePolicy::clamp_to_first_mode;
    bool include_constant_part = false;  // the "+1" kernel part as an independent constant component
    std::uint64_t seed = 1;
    std::uint64_t stream_id = 0;
};

inline void validate_alpha(double alpha, int q) {
    const double hi = std::min(2.0, static_cast<double>(q));
    if (!(alpha > 0.0 && alpha < hi))
        throw std::invalid_argument("alpha must lie in (0, 2^q) i.e. (0, min(2,q))");
}

/** Spectral density constant of |x|^{-alpha} in R^q: 2^{q-a} pi^{q/2} G((q-a)/2)/G(a/2). */
inline double riesz_constant(double alpha, int q) {
    return std::pow(2.0, q - alpha) * std::pow(M_PI, 0.5 * q) *
           std::tgamma(0.5 * (q - alpha)) / std::tgamma(0.5 * alpha);
}

/**
 * Mode multipliers lambda_m = c(alpha,q) |xi_m|^{alpha-q} on the grid's DFT
 * layout; the zero mode follows the policy.
 */
inline std::vector<double> riesz_spectrum(const TorusGrid& g, double alpha,
                                          ZeroModePolicy policy = ZeroModePolicy::clamp_to_first_mode) {
    validate_alpha(alpha, g.q);
    const double c = riesz_constant(alpha, g.q);
    std::vector<double> lam(g.site_count());
    for (std::size_t i = 0; i < lam.size(); ++i) {
        const double f2 = g.freq_sq(i);
        lam[i] = f2 > 0.0 ? c * std::pow(f2, 0.5 * (alpha - g.q)) : 0.0;
    }
    if (policy == ZeroModePolicy::clamp_to_first_mode) {
        const double xi1 = 2.0 * M_PI / g.L;
        lam[0] = c * std::pow(xi1, alpha - g.q);
    }
    return lam;
}

/** One time slab of noise; field units are solution-units * time^{1/2}. */
struct NoiseIncrement {
    Field field;
    double dt = 0.0;
};

namespace detail {

// Synthesis amplitudes sqrt(lambda_m / L^q); cached by the caller when hot.
inline std::vector<double> amplitudes(const TorusGrid& g, const NoiseSpec& spec) {
    auto lam = riesz_spectrum(g, spec.alpha, spec.zero_mode_policy);
    const double vol = std::pow(g.L, g.q);
    for (auto& l : lam) l = std::sqrt(l / vol);
    return lam;
}

}  // namespace detail

/**
 * Reusable sampler: one FFT of counter-keyed white noise gives a Hermitian
 * field of unit complex normals; scaling by sqrt(lambda_m/L^q) realizes the
 * periodized Riesz covariance. Increment = sqrt(dt) * field.
 */
class IncrementSampler {
public:
    IncrementSampler(const TorusGrid& g, const NoiseSpec& spec)
        : grid_(g), spec_(spec), amp_(detail::amplitudes(g, spec)) {}

    NoiseIncrement sample(double dt, std::uint64_t step_index) const {
        if (!(dt > 0.0)) throw std::invalid_argument("sample_increment: dt must be positive");
        const std::size_t n = grid_.site_count();
        rng::NormalStream ns(spec_.seed, spec_.stream_id, step_index);
        std::vector<double> wn(n);
        ns.fill_normals(wn.data(), n);
        std::vector<fft::cplx> a(wn.begin(), wn.end());
        if (grid_.q == 1)
            fft::forward(a);
        else
            fft::transform_2d(a, grid_.N, false);
        const double scale = 1.0 / std::sqrt(static_cast<double>(n));
        for (std::size_t i = 0; i < n; ++i) a[i] *= amp_[i] * scale;
        if (grid_.q == 1)
            fft::inverse(a);
        else
            fft::transform_2d(a, grid_.N, true);
        NoiseIncrement inc;
        inc.dt = dt;
        inc.field = Field(grid_);
        const double root_dt = std::sqrt(dt);
        const double nd = static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) inc.field[i] = a[i].real() * nd * root_dt;
        if (spec_.include_constant_part) {
            const double zc = ns.normal(n) * root_dt;  // draw index n: one past the field block
            for (std::size_t i = 0; i < n; ++i) inc.field[i] += zc;
        }
        return inc;
    }

    const TorusGrid& grid() const { return grid_; }
    const NoiseSpec& spec() const { return spec_; }

private:
    TorusGrid grid_;
    NoiseSpec spec_;
    std::vector<double> amp_;
};

inline NoiseIncrement sample_increment(const TorusGrid& g, const NoiseSpec& spec, double dt,
                                       std::uint64_t step_index) {
    return IncrementSampler(g, spec).sample(dt, step_index);
}

/**
 * Realized covariance function on the grid: k_per(r_j) as the mode sum
 * sum_m (lambda_m / L^q) e^{i xi_m r_j}, including the constant-part shift.
 */
inline std::vector<double> periodized_kernel(const TorusGrid& g, const NoiseSpec& spec) {
    auto lam = riesz_spectrum(g, spec.alpha, spec.zero_mode_policy);
    std::vector<fft::cplx> a(lam.begin(), lam.end());
    if (g.q == 1)
        fft::inverse(a);
    else
        fft::transform_2d(a, g.N, true);
    const double scale = static_cast<double>(g.site_count()) / std::pow(g.L, g.q);
    std::vector<double> k(g.site_count());
    for (std::size_t i = 0; i < k.size(); ++i)
        k[i] = a[i].real() * scale + (spec.include_constant_part ? 1.0 : 0.0);
    return k;
}

/** Var of the spatial average of one increment: dt L^{-2q} int int k_per(x-y) dx dy. */
inline double spatial_mean_variance_prediction(const TorusGrid& g, const NoiseSpec& spec, double dt) {
    const auto k = periodized_kernel(g, spec);
    double s = 0.0;
    for (double v : k) s += v;
    const double hq = std::pow(g.h, g.q);
    // (1/L^{2q}) * N^q * h^{2q} * sum_j k(r_j)
    return dt * std::pow(g.L, -2.0 * g.q) * static_cast<double>(g.site_count()) * hq * hq * s;
}

/** Debug export of the mode multipliers: columns mode, xi, lambda. */
inline void write_spectrum_csv(std::ostream& os, const TorusGrid& g,
                               const std::vector<double>& lam) {
    os << "mode,xi,lambda\n";
    char buf[120];
    for (std::size_t j = 0; j < lam.size() && j < g.N; ++j) {
        std::snprintf(buf, sizeof buf, "%ld,%.12g,%.17g\n", g.mode_of(j), g.freq_of(j), lam[j]);
        os << buf;
    }
}

struct CovRow {
    double lag = 0.0;        // physical lag
    double cov = 0.0;        // Monte Carlo estimate of k at this lag (per unit dt)
    double std_error = 0.0;  // across replicas
    double periodization = 0.0;  // k_per(lag) - lag^{-alpha}, the documented torus bias
};

struct EmpiricalCovariance {
    std::vector<CovRow> rows;
    double slope_raw = 0.0;          // log-log fit on the raw estimates
    double slope_short_range = 0.0;  // fit after subtracting the periodization column
};

/**
 * Monte Carlo covariance over replicas (stream_id offsets), q=1.
 * Lags are site counts; physical lags must lie in [4h, L/8]. The short-range
 * slope subtracts the known periodization constant so it estimates the
 * exponent of the |r|^{-alpha} part; the raw slope is reported alongside.
 */
inline EmpiricalCovariance empirical_covariance(const NoiseSpec& spec, const TorusGrid& g,
                                                double dt, std::size_t replicas,
                                                const std::vector<std::size_t>& lags) {
    if (g.q != 1) throw std::invalid_argument("empirical_covariance: implemented for q=1");
    if (replicas < 100) throw std::invalid_argument("empirical_covariance: replicas >= 100");
    for (auto l : lags) {
        const double r = g.h * static_cast<double>(l);
        if (r < 4.0 * g.h - 1e-12 || r > g.L / 8.0 + 1e-12)
            throw std::invalid_argument("empirical_covariance: lags must lie in [4h, L/8]");
    }
    const std::size_t n = g.N;
    std::vector<double> acc(lags.size(), 0.0), acc2(lags.size(), 0.0);
    for (std::size_t rep = 0; rep < replicas; ++rep) {
        NoiseSpec s2 = spec;
        s2.stream_id = spec.stream_id + rep;
        IncrementSampler rs(g, s2);
        const auto inc = rs.sample(dt, 0);
        for (std::size_t li = 0; li < lags.size(); ++li) {
            double c = 0.0;
            const std::size_t l = lags[li];
            for (std::size_t j = 0; j < n; ++j)
                c += inc.field[j] * inc.field[(j + l) % n];
            c /= static_cast<double>(n) * dt;
            acc[li] += c;
            acc2[li] += c * c;
        }
    }
    const auto kper = periodized_kernel(g, spec);
    EmpiricalCovariance out;
    std::vector<double> rphys, covs, covs_sr;
    for (std::size_t li = 0; li < lags.size(); ++li) {
        CovRow row;
        row.lag = g.h * static_cast<double>(lags[li]);
        row.cov = acc[li] / static_cast<double>(replicas);
        const double var = acc2[li] / static_cast<double>(replicas) - row.cov * row.cov;
        row.std_error = std::sqrt(std::max(var, 0.0) / static_cast<double>(replicas));
        row.periodization = kper[lags[li]] - std::pow(row.lag, -spec.alpha);
        out.rows.push_back(row);
        rphys.push_back(row.lag);
        covs.push_back(row.cov);
        covs_sr.push_back(row.cov - row.periodization);
    }
    out.slope_raw = num::fit_loglog(rphys, covs).slope;
    out.slope_short_range = num::fit_loglog(rphys, covs_sr).slope;
    return out;
}

}  // namespace spdelab::noise
