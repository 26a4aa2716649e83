#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

#include "spdelab/rng.hpp"

namespace spdelab {

/**
 * Noise coefficient sigma and drift b with their declared Holder/growth
 * metadata. Builtins are dispatched without indirection; power_abs at u=0 is
 * evaluated directly (the Holder point is the object of study, no smoothing).
 */
struct CoefficientSpec {
    enum class Sigma { power_abs, linear, constant, sqrt_pos, custom };
    enum class Drift { zero, constant, linear, custom };

    Sigma sigma_tag = Sigma::power_abs;
    Drift drift_tag = Drift::zero;
    double gamma_meta = 0.75;  // declared Holder exponent of sigma in u
    double growth_c = 1.0;     // declared constant of |sigma|+|b| <= c(1+|u|)
    double b_coeff = 0.0;      // constant value / linear rate for drift builtins
    std::function<double(double, double, double)> sigma_fn;  // (t,x,u), custom only
    std::function<double(double, double, double)> b_fn;

    double sigma(double t, double x, double u) const {
        switch (sigma_tag) {
            case Sigma::power_abs: return std::pow(std::fabs(u), gamma_meta);
            case Sigma::linear: return u;
            case Sigma::constant: return 1.0;
            case Sigma::sqrt_pos: return u > 0.0 ? std::sqrt(u) : 0.0;
            case Sigma::custom: return sigma_fn(t, x, u);
        }
        return 0.0;
    }

    double b(double t, double x, double u) const {
        switch (drift_tag) {
            case Drift::zero: return 0.0;
            case Drift::constant: return b_coeff;
            case Drift::linear: return b_coeff * u;
            case Drift::custom: return b_fn(t, x, u);
        }
        return 0.0;
    }

    static CoefficientSpec power_abs(double gamma) {
        if (!(gamma > 0.0 && gamma <= 1.0))
            throw std::invalid_argument("power_abs: gamma must lie in (0,1]");
        CoefficientSpec c;
        c.sigma_tag = Sigma::power_abs;
        c.gamma_meta = gamma;
        return c;
    }
    static CoefficientSpec linear() {
        CoefficientSpec c;
        c.sigma_tag = Sigma::linear;
        c.gamma_meta = 1.0;
        return c;
    }
    static CoefficientSpec additive() {
        CoefficientSpec c;
        c.sigma_tag = Sigma::constant;
        c.gamma_meta = 1.0;
        return c;
    }
    static CoefficientSpec none() {  // sigma == 0, b == 0 (deterministic heat flow)
        CoefficientSpec c;
        c.sigma_tag = Sigma::custom;
        c.sigma_fn = [](double, double, double) { return 0.0; };
        c.gamma_meta = 1.0;
        return c;
    }
};

/** Sampled verification of the declared Holder and growth conditions. */
struct CoefficientCheck {
    double max_holder_excess = 0.0;  // max of |sigma(u)-sigma(u')| / |u-u'|^gamma - 1
    double max_growth_excess = 0.0;  // max of (|sigma|+|b|) / (c(1+|u|)) - 1
    bool holder_ok = false;
    bool growth_ok = false;
};

inline CoefficientCheck check_coefficients(const CoefficientSpec& spec,
                                           std::size_t samples = 2000,
                                           double range = 8.0, std::uint64_t seed = 17) {
    rng::SplitMix64 r(seed);
    CoefficientCheck out;
    for (std::size_t i = 0; i < samples; ++i) {
        const double u = r.uniform(-range, range);
        const double v = r.uniform(-range, range);
        const double t = r.uniform(0.0, 1.0), x = r.uniform(0.0, 1.0);
        const double su = spec.sigma(t, x, u), sv = spec.sigma(t, x, v);
        if (u != v) {
            const double holder = std::fabs(su - sv) / std::pow(std::fabs(u - v), spec.gamma_meta);
            out.max_holder_excess = std::max(out.max_holder_excess, holder - 1.0);
        }
        const double growth = (std::fabs(su) + std::fabs(spec.b(t, x, u))) /
                              (spec.growth_c * (1.0 + std::fabs(u)));
        out.max_growth_excess = std::max(out.max_growth_excess, growth - 1.0);
    }
    out.holder_ok = out.max_holder_excess <= 1e-12;
    out.growth_ok = out.max_growth_excess <= 1e-12;
    return out;
}

}  // namespace spdelab
