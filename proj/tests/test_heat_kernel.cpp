#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "spdelab/heat_kernel.hpp"
#include "spdelab/rng.hpp"

using namespace spdelab;
using namespace spdelab::hk;

TEST_CASE("pt closed form") {
    CHECK(pt1(1.0, 0.0) == Catch::Approx(1.0 / std::sqrt(2.0 * M_PI)).epsilon(1e-12));
    CHECK_THROWS_AS(pt1(0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(pt1(-1.0, 1.0), std::invalid_argument);

    // symmetry at random points
    rng::SplitMix64 r(5);
    for (int i = 0; i < 20; ++i) {
        const double x = r.uniform(-3.0, 3.0), t = r.uniform(0.05, 2.0);
        CHECK(pt1(t, x) == pt1(t, -x));
        CHECK(pt(t, {x, 0.4}) == pt(t, {-x, -0.4}));
    }

    // normalization by quadrature, truncated at 12 sqrt(t)
    for (double t : {0.01, 0.1, 1.0}) {
        const double R = 12.0 * std::sqrt(t);
        const std::size_t n = 40000;
        const double step = 2.0 * R / n;
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            acc += pt1(t, -R + (i + 0.5) * step);
        CHECK(std::fabs(acc * step - 1.0) < 1e-10);
    }
}

TEST_CASE("pt_deriv closed form and oracle") {
    CHECK(pt_deriv1(0.7, 0.0) == 0.0);
    CHECK(pt_deriv1(0.7, 0.5) < 0.0);
    CHECK_THROWS_AS(pt_deriv(0.0, {1.0}, 1), std::invalid_argument);
    CHECK_THROWS_AS(pt_deriv(1.0, {1.0}, 2), std::invalid_argument);

    // central finite differences of pt, step 1e-5, relative 1e-6
    rng::SplitMix64 r(9);
    for (int i = 0; i < 30; ++i) {
        const double x = r.uniform(-2.0, 2.0), t = r.uniform(0.1, 1.5);
        const double fd = (pt1(t, x + 1e-5) - pt1(t, x - 1e-5)) / 2e-5;
        const double an = pt_deriv1(t, x);
        CHECK(std::fabs(fd - an) <= 1e-6 * std::max(1.0, std::fabs(an)));
    }
    // q=2, axis 2
    const double fd2 = (pt(0.5, {0.3, 0.2 + 1e-5}) - pt(0.5, {0.3, 0.2 - 1e-5})) / 2e-5;
    CHECK(pt_deriv(0.5, {0.3, 0.2}, 2) == Catch::Approx(fd2).epsilon(1e-6));
}

TEST_CASE("algebra bound: exact sup constants") {
    const auto rep = verify_algebra_bound(1.0, 2.0, {1.0, 3.0, 10.0});
    for (const auto& row : rep.rows) {
        CHECK(row.lhs == Catch::Approx(row.envelope).margin(1e-6));  // sup equals analytic value
        CHECK(row.ratio == Catch::Approx(1.0).margin(1e-6));
    }
    // r=1, u=1: e^{-1}
    const auto r1 = verify_algebra_bound(1.0, 1.0, {1.0});
    CHECK(r1.rows[0].lhs == Catch::Approx(std::exp(-1.0)).margin(1e-9));
    // r=2, u=1: (1/2)^{1/2} e^{-1/2}
    const auto r2 = verify_algebra_bound(2.0, 2.0, {1.0});
    CHECK(r2.rows[0].lhs == Catch::Approx(std::sqrt(0.5) * std::exp(-0.5)).margin(1e-9));
    CHECK_THROWS_AS(verify_algebra_bound(0.0, 1.0, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(verify_algebra_bound(1.0, 1.0, {0.5}), std::invalid_argument);
}

TEST_CASE("algebra bound: numeric maximizer location") {
    for (double r : {1.0, 1.5, 2.0})
        for (double u : {1.0, 4.0}) {
            const auto f = [&](double a) {
                return a * std::exp(-std::pow(a, r) / u) * std::pow(u, -1.0 / r);
            };
            const double amax = num::golden_max(f, 0.0, 8.0 * std::pow(u / r, 1.0 / r) + 8.0, 1e-12);
            CHECK(amax == Catch::Approx(std::pow(u / r, 1.0 / r)).margin(1e-6));
        }
}

TEST_CASE("derivative envelope: ratio properties and q=1 constant") {
    // ratio at x=0 vanishes
    const auto rep0 = verify_deriv_bound({0.5}, {0.0}, 1);
    CHECK(rep0.rows[0].lhs == 0.0);

    // scale invariance under x -> c x, t -> c^2 t
    const auto a = verify_deriv_bound({0.2}, {0.3}, 1);
    const auto b = verify_deriv_bound({0.2 * 4.0}, {0.3 * 2.0}, 1);
    CHECK(a.rows[0].ratio == Catch::Approx(b.rows[0].ratio).epsilon(1e-12));

    // empirical constant over a scan: 2 e^{-1/2}  (maximum at |x|/sqrt(t) = sqrt(2))
    const auto ts = num::geomspace(0.01, 1.0, 7);
    std::vector<double> xs;
    for (double a2 = 0.0; a2 <= 6.0; a2 += 0.01) xs.push_back(a2);
    double cmax = 0.0;
    for (double t : ts) {
        std::vector<double> xg;
        for (double a2 : xs) xg.push_back(a2 * std::sqrt(t));
        cmax = std::max(cmax, verify_deriv_bound({t}, xg, 1).empirical_constant);
    }
    CHECK(cmax == Catch::Approx(2.0 * std::exp(-0.5)).margin(1e-3));
}

TEST_CASE("cross integral: degenerate and small checks") {
    // x=x', t=t': integrand identically zero
    const auto z = verify_cross_integral(0.1, 0.1, 0.4, 0.4, 0.5, 1);
    CHECK(z.rows[0].lhs == 0.0);

    // a couple of ratio rows are finite and positive
    const auto r = verify_cross_integral(0.05, 0.08, 0.0, 0.3, 0.5, 1);
    for (const auto& row : r.rows) {
        CHECK(row.lhs >= 0.0);
        CHECK(std::isfinite(row.ratio));
    }
    // signed form is dominated by the abs form
    CHECK(r.rows[1].lhs <= r.rows[0].lhs + 1e-12);
}

TEST_CASE("cross integral: quadrature stability under refinement") {
    const auto c1 = cross_integral_value(0.05, 0.05, 0.0, 0.5, 0.5, 1, 900);
    const auto c2 = cross_integral_value(0.05, 0.05, 0.0, 0.5, 0.5, 1, 1800);
    CHECK(std::fabs(c1.abs_value / c2.abs_value - 1.0) < 0.05);
    CHECK(std::fabs(c1.signed_value / c2.signed_value - 1.0) < 0.05);
}

TEST_CASE("weighted product integral basics") {
    // r1=r2=r3=0, alpha small, t=t'=1: the "+1" part contributes exactly 1
    const auto rep = verify_weighted_integral(1.0, 1.0, 0.0, 0.0, 0.0, 0.05, 0.0, 0.0, 1);
    CHECK(rep.rows[0].lhs >= 1.0);

    // ratio bounded over a t range at alpha=0.5
    double rmax = 0.0;
    for (double t : num::geomspace(0.01, 1.0, 5)) {
        const auto r = verify_weighted_integral(t, 1.0, 0.0, 0.0, 0.0, 0.5, 0.0, 0.0, 1);
        rmax = std::max(rmax, r.rows[0].ratio);
        CHECK(std::isfinite(r.rows[0].ratio));
    }
    CHECK(rmax < 10.0);

    // increasing r3 increases the lhs pointwise
    const auto lo = verify_weighted_integral(0.25, 0.5, 1.0, 1.0, 0.2, 0.5, 0.0, 0.0, 1);
    const auto hi = verify_weighted_integral(0.25, 0.5, 1.0, 1.0, 0.8, 0.5, 0.0, 0.0, 1);
    CHECK(hi.rows[0].lhs > lo.rows[0].lhs);

    CHECK_THROWS_AS(verify_weighted_integral(0.5, 0.25, 0, 0, 0, 0.5, 0, 0, 1),
                    std::invalid_argument);

    // shifted form (x,y nonzero) uses the (t^{r1/2}+1)(t'^{r2/2}+1) envelope
    const auto sh = verify_weighted_integral(0.1, 0.2, 1.0, 2.0, 0.3, 0.5, 0.7, -0.4, 1);
    CHECK(sh.rows[0].param_json.find("shifted") != std::string::npos);
    CHECK(std::isfinite(sh.rows[0].ratio));
    CHECK(sh.rows[0].ratio > 0.0);

    // empirical constant stable under quadrature refinement (< 5%)
    const auto q1 = verify_weighted_integral(0.25, 0.5, 1.0, 1.0, 0.5, 0.5, 0.0, 0.0, 1, 1000);
    const auto q2 = verify_weighted_integral(0.25, 0.5, 1.0, 1.0, 0.5, 0.5, 0.0, 0.0, 1, 2000);
    CHECK(std::fabs(q1.empirical_constant / q2.empirical_constant - 1.0) < 0.05);
}

TEST_CASE("outside-tail integral") {
    // indicator region empty: cutoff beyond the truncation reach
    const auto empty = verify_outside_tail(0.0, 0.001, 0.001, 0.0, 30.0, 0.45, 0.3, 0.0, 0.0, 0.5, 1);
    CHECK(empty.rows[0].lhs == 0.0);

    // restriction is dominated by the unrestricted integral (p=r=0)
    const double s = 0.0, t = 0.05, tp = 0.06, x = 0.0, xp = 0.02;
    const auto restricted = verify_outside_tail(s, t, tp, x, xp, 0.1, 0.3, 0.0, 0.0, 0.5, 1);
    const auto full = cross_integral_value(t - s, tp - s, x, xp, 0.5, 1);
    CHECK(restricted.rows[0].lhs <= full.abs_value + 1e-12);

    // super-polynomial smallness: lhs * (t-s)^{1+a/2} decays, and log(lhs)
    // drops at least linearly in (t'-s)^{-2 eta0}
    const double eta0 = 0.25, eta1 = 0.3;
    std::vector<double> us = {0.02, 0.01, 0.005}, logs, scales, weighted;
    for (double u : us) {
        const auto rep = verify_outside_tail(0.0, u, u * 1.2, 0.0, 0.0, eta0, eta1, 0.0, 0.0, 0.5, 1);
        logs.push_back(std::log(std::max(rep.rows[0].lhs, 1e-300)));
        scales.push_back(std::pow(1.2 * u, -2.0 * eta0));
        weighted.push_back(rep.rows[0].lhs * std::pow(u, 1.25));
    }
    CHECK(weighted[1] < weighted[0]);
    CHECK(weighted[2] < weighted[1]);
    // successive log-drops per unit of the scale variable do not flatten out
    const double rate1 = (logs[0] - logs[1]) / (scales[1] - scales[0]);
    const double rate2 = (logs[1] - logs[2]) / (scales[2] - scales[1]);
    CHECK(rate1 > 0.0);
    CHECK(rate2 > 0.5 * rate1);
}

TEST_CASE("verifiers are deterministic given parameters") {
    const auto a = verify_cross_integral(0.05, 0.08, 0.0, 0.3, 0.5, 1);
    const auto b = verify_cross_integral(0.05, 0.08, 0.0, 0.3, 0.5, 1);
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        CHECK(a.rows[i].lhs == b.rows[i].lhs);
        CHECK(a.rows[i].ratio == b.rows[i].ratio);
    }
}

TEST_CASE("pointwise difference bounds: degenerate cases and envelope rows") {
    // v = 0: spatial-difference lhs is 0
    const auto z = verify_difference_pointwise(0.1, 0.1, {0.4}, {0.0}, 1, 1);
    CHECK(z.rows[0].lhs == 0.0);  // A_2a
    CHECK(z.rows[1].lhs == 0.0);  // A_2b with t = t'

    // generic point: ratios finite; A.2(a)/(b) bounds hold with a modest constant
    const auto rep = verify_difference_pointwise(0.04, 0.09, {0.3}, {0.12}, 1, 1);
    for (const auto& row : rep.rows) {
        CHECK(row.lhs >= 0.0);
        CHECK(std::isfinite(row.ratio));
    }
    CHECK(rep.rows[0].ratio < 20.0);
    CHECK(rep.rows[1].ratio < 20.0);

    // q=2 version runs and stays finite
    const auto rep2 = verify_difference_pointwise(0.04, 0.09, {0.3, -0.1}, {0.12, 0.05}, 1, 2);
    for (const auto& row : rep2.rows) CHECK(std::isfinite(row.ratio));
}

TEST_CASE("masked derivative scan: max near |y| = t^{1/2-eta0}") {
    const double t = 0.05, eta0 = 0.1;
    const auto rep = verify_a3_scan(t, eta0, num::geomspace(1e-3, 2.0, 400));
    double best_y = 0.0, best_ratio = 0.0;
    for (const auto& row : rep.rows) {
        if (row.ratio > best_ratio) {
            best_ratio = row.ratio;
            // parse y back out of the param json
            const auto pos = row.param_json.find("\"y\":");
            best_y = std::stod(row.param_json.substr(pos + 4));
        }
        CHECK(std::isfinite(row.ratio));
    }
    const double cutoff = std::pow(t, 0.5 - eta0);
    CHECK(best_ratio > 0.0);
    CHECK(best_y == Catch::Approx(cutoff).epsilon(0.05));
}

TEST_CASE("report CSV schema") {
    const auto rep = verify_algebra_bound(1.0, 1.0, {1.0});
    std::ostringstream os;
    write_report_csv(os, rep);
    const auto text = os.str();
    CHECK(text.rfind("lemma_id,param_json,lhs,envelope,ratio\n", 0) == 0);
    CHECK(text.find("A_1") != std::string::npos);
}
