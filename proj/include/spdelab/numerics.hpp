#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace spdelab::num {

/** Least-squares line fit y = slope*x + icept; se_slope from residuals. */
struct LineFit {
    double slope = 0.0;
    double icept = 0.0;
    double se_slope = 0.0;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw std::invalid_argument("fit_line: need >= 2 points");
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < n; ++i) { sx += x[i]; sy += y[i]; }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("fit_line: degenerate abscissae");
    LineFit f;
    f.slope = sxy / sxx;
    f.icept = my - f.slope * mx;
    if (n > 2) {
        double ss = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = y[i] - (f.icept + f.slope * x[i]);
            ss += r * r;
        }
        f.se_slope = std::sqrt(ss / (n - 2) / sxx);
    }
    return f;
}

inline LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> lx(x.size()), ly(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0))
            throw std::invalid_argument("fit_loglog: needs positive data");
        lx[i] = std::log(x[i]);
        ly[i] = std::log(y[i]);
    }
    return fit_line(lx, ly);
}

/** Golden-section maximization of a unimodal f on [a,b]. */
inline double golden_max(const std::function<double(double)>& f, double a, double b,
                         double tol = 1e-10) {
    constexpr double inv_phi = 0.6180339887498948482;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc > fd) {
            b = d; d = c; fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c; c = d; fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

/** Midpoint nodes of [lo,hi] with n cells; spacing returned via step. */
inline std::vector<double> midpoints(double lo, double hi, std::size_t n, double& step) {
    step = (hi - lo) / static_cast<double>(n);
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = lo + (static_cast<double>(i) + 0.5) * step;
    return x;
}

inline std::vector<double> geomspace(double lo, double hi, std::size_t n) {
    std::vector<double> x(n);
    const double r = std::log(hi / lo) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) x[i] = lo * std::exp(r * static_cast<double>(i));
    x.front() = lo;
    x.back() = hi;
    return x;
}

/**
 * Cell-pair averaged Riesz factor for 1-d quadrature, alpha in (0,1):
 * average of |w-z|^-alpha over w,z uniform in cells at center distance d,
 * via the second difference of the double antiderivative
 * H(r) = |r|^{2-alpha} / ((1-alpha)(2-alpha)). Exact on the diagonal cell.
 */
struct RieszCellAvg1D {
    double alpha;  // must lie in (0,1): the 1-d kernel is integrable there
    double step;
    double operator()(double d) const {
        auto H = [&](double r) {
            return std::pow(std::fabs(r), 2.0 - alpha) / ((1.0 - alpha) * (2.0 - alpha));
        };
        return (H(d + step) - 2.0 * H(d) + H(d - step)) / (step * step);
    }
};

/**
 * Riesz factor for q=2 cells at center displacement (dx,dy), alpha in (0,2):
 * near-diagonal cells use a fixed subcell average (triangular difference
 * density), far cells the midpoint value.
 */
struct RieszCellAvg2D {
    double alpha;
    double step;
    double operator()(double dx, double dy) const {
        const double r2 = dx * dx + dy * dy;
        if (r2 > 9.0 * step * step) return std::pow(r2, -0.5 * alpha);
        // subcell average; triangular weights from the uniform-difference density
        constexpr int K = 8;
        double acc = 0.0, wsum = 0.0;
        for (int i = -K + 1; i < K; ++i) {
            const double wx = 1.0 - std::fabs(i) / static_cast<double>(K);
            const double ux = dx + step * static_cast<double>(i) / static_cast<double>(K);
            for (int j = -K + 1; j < K; ++j) {
                const double wy = 1.0 - std::fabs(j) / static_cast<double>(K);
                const double uy = dy + step * static_cast<double>(j) / static_cast<double>(K);
                const double rr = ux * ux + uy * uy;
                if (rr == 0.0) continue;  // measure-zero center of the diagonal cell
                acc += wx * wy * std::pow(rr, -0.5 * alpha);
                wsum += wx * wy;
            }
        }
        return acc / wsum;
    }
};

/**
 * Double integral  int int f(w) g(z) (|w-z|^-alpha + 1) dw dz  over [lo,hi]^2,
 * q=1, midpoint cells with cell-pair averaged singular factor.
 */
inline double pair_integral_1d(const std::function<double(double)>& f,
                               const std::function<double(double)>& g,
                               double lo, double hi, double alpha, std::size_t n) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("pair_integral_1d: alpha must lie in (0,1)");
    double step;
    const auto x = midpoints(lo, hi, n, step);
    std::vector<double> fv(n), gv(n);
    double fsum = 0.0, gsum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        fv[i] = f(x[i]);
        gv[i] = g(x[i]);
        fsum += fv[i];
        gsum += gv[i];
    }
    const RieszCellAvg1D K{alpha, step};
    // kernel depends on index distance only
    std::vector<double> kd(n);
    for (std::size_t d = 0; d < n; ++d) kd[d] = K(step * static_cast<double>(d));
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            row += gv[j] * kd[i >= j ? i - j : j - i];
        acc += fv[i] * row;
    }
    return step * step * (acc + fsum * gsum);  // singular part + the "+1" part
}

// Same but returns the two kernel parts separately: {singular, constant}.
inline std::pair<double, double> pair_integral_1d_parts(
    const std::function<double(double)>& f, const std::function<double(double)>& g,
    double lo, double hi, double alpha, std::size_t n) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("pair_integral_1d: alpha must lie in (0,1)");
    double step;
    const auto x = midpoints(lo, hi, n, step);
    std::vector<double> fv(n), gv(n);
    double fsum = 0.0, gsum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        fv[i] = f(x[i]);
        gv[i] = g(x[i]);
        fsum += fv[i];
        gsum += gv[i];
    }
    const RieszCellAvg1D K{alpha, step};
    std::vector<double> kd(n);
    for (std::size_t d = 0; d < n; ++d) kd[d] = K(step * static_cast<double>(d));
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            row += gv[j] * kd[i >= j ? i - j : j - i];
        acc += fv[i] * row;
    }
    return {step * step * acc, step * step * fsum * gsum};
}

/**
 * q=2 analogue on [lo,hi]^2 x [lo,hi]^2 (n cells per axis; n^4 kernel pairs;
 * keep n modest).
 */
inline double pair_integral_2d(const std::function<double(double, double)>& f,
                               const std::function<double(double, double)>& g,
                               double lo, double hi, double alpha, std::size_t n) {
    if (!(alpha > 0.0 && alpha < 2.0))
        throw std::invalid_argument("pair_integral_2d: alpha must lie in (0,2)");
    double step;
    const auto x = midpoints(lo, hi, n, step);
    std::vector<double> fv(n * n), gv(n * n);
    double fsum = 0.0, gsum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            fv[i * n + j] = f(x[i], x[j]);
            gv[i * n + j] = g(x[i], x[j]);
            fsum += fv[i * n + j];
            gsum += gv[i * n + j];
        }
    const RieszCellAvg2D K{alpha, step};
    // kernel by integer displacement
    std::vector<double> kd((2 * n - 1) * (2 * n - 1));
    for (long di = -(long)n + 1; di < (long)n; ++di)
        for (long dj = -(long)n + 1; dj < (long)n; ++dj)
            kd[(di + n - 1) * (2 * n - 1) + (dj + n - 1)] =
                K(step * static_cast<double>(di), step * static_cast<double>(dj));
    double acc = 0.0;
    for (std::size_t i1 = 0; i1 < n; ++i1)
        for (std::size_t j1 = 0; j1 < n; ++j1) {
            const double fw = fv[i1 * n + j1];
            if (fw == 0.0) continue;
            double row = 0.0;
            for (std::size_t i2 = 0; i2 < n; ++i2)
                for (std::size_t j2 = 0; j2 < n; ++j2)
                    row += gv[i2 * n + j2] *
                           kd[((long)i1 - (long)i2 + n - 1) * (2 * n - 1) +
                              ((long)j1 - (long)j2 + n - 1)];
            acc += fw * row;
        }
    const double w4 = step * step * step * step;
    return w4 * acc + w4 * fsum * gsum;
}

}  // namespace spdelab::num
