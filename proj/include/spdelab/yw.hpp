#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace spdelab::yw {

// a_n = exp(-n(n+1)/2), m_n = a_{n-1}^{-1/2} = exp((n-1)n/4)

inline double log_a(std::int64_t n) {
    if (n < 0) throw std::invalid_argument("log_a: n >= 0 required");
    return -0.5 * static_cast<double>(n) * static_cast<double>(n + 1);
}
inline double a_seq(std::int64_t n) { return std::exp(log_a(n)); }

inline double log_m(std::int64_t n) {
    if (n < 1) throw std::invalid_argument("log_m: n >= 1 required");
    return 0.25 * static_cast<double>(n - 1) * static_cast<double>(n);
}
inline double m_seq(std::int64_t n) { return std::exp(log_m(n)); }

namespace detail {

// C^inf plateau bump on (0,1): smoothstep transitions of width W, identically
// one on [W, 1-W]; integral over (0,1) equals 1-W exactly by symmetry.
constexpr double kPlateauWidth = 0.25;

inline double smoothstep(double tau) {
    if (tau <= 0.0) return 0.0;
    if (tau >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / tau);
    const double b = std::exp(-1.0 / (1.0 - tau));
    return a / (a + b);
}

inline double plateau(double s) {
    if (s <= 0.0 || s >= 1.0) return 0.0;
    return smoothstep(s / kPlateauWidth) * smoothstep((1.0 - s) / kPlateauWidth);
}

}  // namespace detail

/**
 * The n-th Yamada-Watanabe mollifier pair.
 *
 * psi_n lives on (a_n, a_{n-1}); in the log substitution s = ln(x/a_n)/n it is
 * plateau(s) / ((1-W) n x), which gives unit mass in closed form and the cap
 * psi_n(x) n x <= 1/(1-W) = 4/3 < 2 structurally. phi_n is the double
 * antiderivative, evaluated from cached quadrature tables:
 *   Psi_n(y) = int_0^y psi_n,  phi_n(x) = int_0^{|x|} Psi_n.
 */
class MollifierPair {
public:
    MollifierPair(std::int64_t n, std::size_t quad_resolution)
        : n_(n), quad_res_(quad_resolution) {
        if (n < 1) throw std::invalid_argument("MollifierPair: n >= 1 required");
        if (n > 37) throw std::invalid_argument("MollifierPair: a_n underflows for n > 37; use log-domain helpers");
        if (quad_resolution < 64) throw std::invalid_argument("MollifierPair: quad_resolution >= 64");
        a_n_ = a_seq(n);
        a_nm1_ = a_seq(n - 1);
        build_tables();
    }

    std::int64_t n() const { return n_; }
    double support_lo() const { return a_n_; }
    double support_hi() const { return a_nm1_; }
    std::size_t quad_resolution() const { return quad_res_; }
    static const char* shape_name() { return "log-plateau-bump(w=1/4)"; }

    double psi(double x) const {
        if (x <= a_n_ || x >= a_nm1_) return 0.0;
        const double s = std::log(x / a_n_) / static_cast<double>(n_);
        return detail::plateau(s) / ((1.0 - detail::kPlateauWidth) * static_cast<double>(n_) * x);
    }

    // Psi_n(y) = int_0^y psi_n in [0,1]
    double psi_antideriv(double y) const {
        if (y <= a_n_) return 0.0;
        if (y >= a_nm1_) return 1.0;
        const double s = std::log(y / a_n_) / static_cast<double>(n_);
        return lookup(plat_int_, s) / (1.0 - detail::kPlateauWidth);
    }

    double phi(double x) const {
        const double ax = std::fabs(x);
        if (ax <= a_n_) return 0.0;
        if (ax >= a_nm1_) return phi_at_hi_ + (ax - a_nm1_);
        const double s = std::log(ax / a_n_) / static_cast<double>(n_);
        return lookup(phi_int_, s);
    }

    double phi_prime(double x) const {
        const double v = psi_antideriv(std::fabs(x));
        return x >= 0.0 ? v : -v;
    }

    double phi_second(double x) const { return psi(std::fabs(x)); }

    // kappa_n: phi_n(x) = |x| - kappa_n beyond the support; 0 < kappa_n < a_{n-1}
    double kappa() const { return a_nm1_ - phi_at_hi_; }

    // quadrature defect of the closed-form unit mass, from the cached table
    double mass_quadrature_error() const {
        return std::fabs(plat_int_.back() / (1.0 - detail::kPlateauWidth) - 1.0);
    }

private:
    void build_tables() {
        // Simpson tables over s in [0,1]; x = a_n e^{n s}
        const std::size_t n = quad_res_ % 2 == 0 ? quad_res_ : quad_res_ + 1;
        const double ds = 1.0 / static_cast<double>(n);
        plat_int_.assign(n + 1, 0.0);
        phi_int_.assign(n + 1, 0.0);
        // int_0^s plateau via composite Simpson on pairs of cells
        std::vector<double> pv(n + 1);
        for (std::size_t i = 0; i <= n; ++i) pv[i] = detail::plateau(ds * static_cast<double>(i));
        for (std::size_t i = 2; i <= n; i += 2) {
            plat_int_[i] = plat_int_[i - 2] + ds / 3.0 * (pv[i - 2] + 4.0 * pv[i - 1] + pv[i]);
            // midpoint value via half-panel Simpson
            plat_int_[i - 1] = plat_int_[i - 2] +
                               ds / 6.0 * (pv[i - 2] + 4.0 * detail::plateau(ds * (static_cast<double>(i) - 1.5)) + pv[i - 1]);
        }
        // phi table: phi(x(s)) = int_{a_n}^{x} Psi(y) dy = n a_n int_0^s Psi(s') e^{n s'} ds'
        const double nn = static_cast<double>(n_);
        auto integrand = [&](double s) {
            const double Psi = lookup(plat_int_, s) / (1.0 - detail::kPlateauWidth);
            return nn * a_n_ * Psi * std::exp(nn * s);
        };
        std::vector<double> iv(n + 1);
        for (std::size_t i = 0; i <= n; ++i) iv[i] = integrand(ds * static_cast<double>(i));
        for (std::size_t i = 2; i <= n; i += 2) {
            phi_int_[i] = phi_int_[i - 2] + ds / 3.0 * (iv[i - 2] + 4.0 * iv[i - 1] + iv[i]);
            phi_int_[i - 1] = phi_int_[i - 2] +
                              ds / 6.0 * (iv[i - 2] + 4.0 * integrand(ds * (static_cast<double>(i) - 1.5)) + iv[i - 1]);
        }
        phi_at_hi_ = phi_int_.back();
    }

    double lookup(const std::vector<double>& table, double s) const {
        if (s <= 0.0) return table.front();
        if (s >= 1.0) return table.back();
        const double pos = s * static_cast<double>(table.size() - 1);
        const std::size_t i = std::min(static_cast<std::size_t>(pos), table.size() - 2);
        const double w = pos - static_cast<double>(i);
        return table[i] * (1.0 - w) + table[i + 1] * w;
    }

    std::int64_t n_;
    std::size_t quad_res_;
    double a_n_ = 0.0, a_nm1_ = 0.0, phi_at_hi_ = 0.0;
    std::vector<double> plat_int_;  // int_0^s plateau
    std::vector<double> phi_int_;   // phi(x(s)) on the support
};

inline MollifierPair make_mollifier(std::int64_t n, std::size_t quad_resolution = 4096) {
    return MollifierPair(n, quad_resolution);
}

/** Dense-grid verification of Eqs. for psi_n and phi_n; failures reported, not thrown. */
struct MollifierReport {
    std::int64_t n = 0;
    double mass_error = 0.0;         // |int psi - 1|
    double psi_cap_max = 0.0;        // sup psi(x) n x   (<= 2 required)
    double phi_prime_max = 0.0;      // sup |phi'|       (<= 1 required)
    double phi_second_cap_max = 0.0; // sup |phi''(x)| n x (<= 2 required)
    double uniform_gap = 0.0;        // sup | |x| - phi_n(x) |  (<= a_{n-1} expected)
    double kappa = 0.0;

    bool all_ok(double tol_mass = 1e-9, double tol_cap = 1e-9, double tol_prime = 1e-12) const {
        return mass_error <= tol_mass && psi_cap_max <= 2.0 + tol_cap &&
               phi_prime_max <= 1.0 + tol_prime && phi_second_cap_max <= 2.0 + tol_cap;
    }
};

inline MollifierReport phi_props_check(const MollifierPair& p, std::size_t grid_points = 20000) {
    MollifierReport r;
    r.n = p.n();
    r.kappa = p.kappa();
    // quadrature of psi over the support (log-spaced midpoints, exact substitution weights)
    const double nn = static_cast<double>(p.n());
    double mass = 0.0;
    const double ds = 1.0 / static_cast<double>(grid_points);
    for (std::size_t i = 0; i < grid_points; ++i) {
        const double s = (static_cast<double>(i) + 0.5) * ds;
        const double x = p.support_lo() * std::exp(nn * s);
        mass += p.psi(x) * nn * x * ds;  // dx = n x ds
        r.psi_cap_max = std::max(r.psi_cap_max, p.psi(x) * nn * x);
        r.phi_second_cap_max = std::max(r.phi_second_cap_max, std::fabs(p.phi_second(x)) * nn * x);
    }
    r.mass_error = std::fabs(mass - 1.0);
    // phi' and the uniform gap on a linear grid covering past the support
    const double hi = 1.5 * p.support_hi();
    for (std::size_t i = 0; i <= grid_points; ++i) {
        const double x = hi * static_cast<double>(i) / static_cast<double>(grid_points);
        r.phi_prime_max = std::max(r.phi_prime_max, std::fabs(p.phi_prime(x)));
        r.uniform_gap = std::max(r.uniform_gap, std::fabs(x - p.phi(x)));
    }
    return r;
}

/** Bootstrap exponents gamma_{m+1} = gamma gamma_m + 1 - alpha/2 of the regularity ladder. */
struct GammaSequence {
    double gamma = 0.0;
    double alpha = 0.0;
    std::vector<double> values;  // gamma_0 .. gamma_{m_bar+1} when terminated
    std::int64_t m_bar = -1;
    double gamma_inf = 0.0;
    bool terminated = false;

    double explicit_form(std::int64_t m) const {
        return 1.0 + (gamma - 0.5 * alpha) * (1.0 - std::pow(gamma, static_cast<double>(m))) /
                         (1.0 - gamma);
    }
};

inline GammaSequence gamma_seq(double gamma, double alpha, std::size_t cap = 10000) {
    if (!(gamma > 0.5 && gamma < 1.0))
        throw std::invalid_argument("gamma_seq: gamma must lie in (1/2,1)");
    GammaSequence s;
    s.gamma = gamma;
    s.alpha = alpha;
    s.gamma_inf = (1.0 - 0.5 * alpha) / (1.0 - gamma);
    double g = 1.0;
    s.values.push_back(g);
    for (std::size_t m = 0; m < cap; ++m) {
        g = gamma * g + 1.0 - 0.5 * alpha;
        s.values.push_back(g);
        if (g > 2.0) {
            s.m_bar = static_cast<std::int64_t>(m);  // gamma_{m+1} > 2 >= gamma_m
            s.terminated = true;
            break;
        }
    }
    return s;
}

/** Admissible beta/lambda grid and the working scales derived from it. */
struct EpsGrid {
    double gamma = 0.0, alpha = 0.0;
    double eps0 = 0.0, eps1 = 0.0;
    std::int64_t L = 0;
    std::vector<double> betas;    // beta_0..beta_{L+1}
    std::vector<double> lambdas;  // lambda_0..lambda_L
};

inline double eps1_bound(double gamma, double alpha) {
    return (2.0 * (2.0 * gamma - 1.0) - alpha) / 32.0;
}
inline double eps0_bound(double gamma, double eps1) { return 0.25 * (1.0 - gamma) * eps1; }

inline EpsGrid eps_grid(double gamma, double alpha, double eps1, double eps0) {
    const double b1 = eps1_bound(gamma, alpha);
    if (!(b1 > 0.0))
        throw std::invalid_argument(
            "eps_grid: alpha < 2(2*gamma-1) required for a nonempty eps_1 range");
    if (!(eps1 > 0.0 && eps1 < b1))
        throw std::invalid_argument(
            "eps_grid: violated eps_1 in (0, (2(2*gamma-1)-alpha)/32)");
    const double b0 = eps0_bound(gamma, eps1);
    if (!(eps0 > 0.0 && eps0 < b0))
        throw std::invalid_argument("eps_grid: violated eps_0 in (0, (1-gamma)*eps_1/4)");
    EpsGrid g;
    g.gamma = gamma;
    g.alpha = alpha;
    g.eps0 = eps0;
    g.eps1 = eps1;
    g.L = static_cast<std::int64_t>(std::floor((0.5 - 6.0 * eps1) / eps0));
    g.betas.reserve(static_cast<std::size_t>(g.L) + 2);
    for (std::int64_t i = 0; i <= g.L; ++i)
        g.betas.push_back(static_cast<double>(i) * eps0);
    g.betas.push_back(0.5 - eps1);
    g.lambdas.reserve(static_cast<std::size_t>(g.L) + 1);
    for (std::int64_t i = 0; i <= g.L; ++i)
        g.lambdas.push_back(2.0 * (g.betas[static_cast<std::size_t>(i)] + eps1));
    return g;
}

/** Log-domain length scales and their ordering comparison. */
struct LengthScales {
    double log_l_n = 0.0;       // ln l_n(beta_i)
    double log_lbar_n = 0.0;    // ln lbar_n(beta_i)
    double log_sqrt_a_n = 0.0;  // ln sqrt(a_n)
    std::int64_t n_M = 0;
    std::int64_t n_0 = 0;
    bool lemma36_holds = false;
};

inline std::int64_t n_M_threshold(double eps1, std::int64_t M) {
    // smallest n >= 1 with eps1 * n(n+1)/2 >= (M+8) ln 2
    const double y = 2.0 * (static_cast<double>(M) + 8.0) * std::log(2.0) / eps1;
    auto ok = [&](std::int64_t n) {
        return static_cast<double>(n) * static_cast<double>(n + 1) >= y;
    };
    std::int64_t n = static_cast<std::int64_t>(std::floor((-1.0 + std::sqrt(1.0 + 4.0 * y)) / 2.0));
    if (n < 1) n = 1;
    while (!ok(n)) ++n;
    while (n > 1 && ok(n - 1)) --n;
    return n;
}

inline std::int64_t n_0_threshold(double eps0, double eps1) {
    // sup{n : ln(n(n+1)/4) > ln(ln 2) + (eps0*eps1/8) n(n+1)}  (log-log domain)
    const double c = eps0 * eps1 / 8.0;
    auto holds = [&](std::int64_t n) {
        const double y = static_cast<double>(n) * static_cast<double>(n + 1);
        return std::log(y / 4.0) > std::log(std::log(2.0)) + c * y;
    };
    if (!holds(2)) return holds(1) ? 1 : 0;
    std::int64_t lo = 2, hi = 4;
    while (holds(hi)) {
        lo = hi;
        if (hi > (std::int64_t(1) << 40)) break;
        hi *= 2;
    }
    while (hi - lo > 1) {
        const std::int64_t mid = lo + (hi - lo) / 2;
        (holds(mid) ? lo : hi) = mid;
    }
    return lo;
}

inline LengthScales length_scales(std::int64_t n, double beta_i, double beta_next, double gamma,
                                  double alpha, double eps1, std::int64_t M, double eps0) {
    LengthScales s;
    const double la = log_a(n);
    s.log_sqrt_a_n = 0.5 * la;
    s.log_l_n = std::max(std::log(129.0) + (1.0 - beta_next) * la,
                         (2.0 / alpha) * (gamma - beta_next - eps1) * la);
    s.log_lbar_n = (beta_i + 5.0 * eps1) * la;
    s.n_M = n_M_threshold(eps1, M);
    s.n_0 = n_0_threshold(eps0, eps1);
    s.lemma36_holds = (s.log_l_n < s.log_sqrt_a_n) &&
                      (s.log_sqrt_a_n < std::log(0.5) + s.log_lbar_n);
    return s;
}

}  // namespace spdelab::yw
