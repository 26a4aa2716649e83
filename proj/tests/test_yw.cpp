#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "spdelab/rng.hpp"
#include "spdelab/yw.hpp"

using namespace spdelab;
using namespace spdelab::yw;

TEST_CASE("a_n and m_n closed forms") {
    CHECK(a_seq(0) == 1.0);
    CHECK(a_seq(1) == Catch::Approx(std::exp(-1.0)).epsilon(1e-15));
    CHECK(a_seq(2) == Catch::Approx(std::exp(-3.0)).epsilon(1e-15));
    CHECK(m_seq(2) == Catch::Approx(std::exp(0.5)).epsilon(1e-15));
    CHECK(m_seq(1) == 1.0);
    CHECK_THROWS_AS(log_a(-1), std::invalid_argument);
    CHECK_THROWS_AS(log_m(0), std::invalid_argument);

    // a_{n+1}^{-1} = a_n^{-1-2/n} in log-domain
    for (std::int64_t n = 1; n <= 60; ++n) {
        const double lhs = -log_a(n + 1);
        const double rhs = (1.0 + 2.0 / static_cast<double>(n)) * (-log_a(n));
        CHECK(std::fabs(lhs - rhs) <= 1e-12 * std::fabs(lhs));
    }
}

TEST_CASE("mollifier invariants for n in 1..6 at two resolutions") {
    for (std::int64_t n = 1; n <= 6; ++n) {
        const auto p10 = make_mollifier(n, 1 << 10);
        const auto p12 = make_mollifier(n, 1 << 12);
        const auto r10 = phi_props_check(p10);
        const auto r12 = phi_props_check(p12);

        CHECK(r12.mass_error <= 1e-9);
        CHECK(r12.psi_cap_max <= 2.0 + 1e-9);
        CHECK(r12.phi_prime_max <= 1.0 + 1e-12);
        CHECK(r12.phi_second_cap_max <= 2.0 + 1e-9);
        CHECK(r12.uniform_gap <= a_seq(n - 1) + 1e-12);
        CHECK(r12.kappa > 0.0);
        CHECK(r12.kappa < a_seq(n - 1));

        // resolutions agree
        CHECK(std::fabs(r10.uniform_gap - r12.uniform_gap) < 1e-7);
        CHECK(std::fabs(p10.phi(0.5 * (p10.support_lo() + p10.support_hi())) -
                        p12.phi(0.5 * (p10.support_lo() + p10.support_hi()))) < 1e-7);

        // support and positivity
        CHECK(p12.psi(p12.support_lo()) == 0.0);
        CHECK(p12.psi(p12.support_hi()) == 0.0);
        CHECK(p12.psi(std::sqrt(p12.support_lo() * p12.support_hi())) > 0.0);

        // phi is even with phi(0) = 0
        CHECK(p12.phi(0.0) == 0.0);
        CHECK(p12.phi(0.3) == p12.phi(-0.3));
    }
}

TEST_CASE("uniform gap decreases in n") {
    double prev = 1e300;
    for (std::int64_t n = 1; n <= 6; ++n) {
        const auto rep = phi_props_check(make_mollifier(n, 1 << 11));
        CHECK(rep.uniform_gap < prev);
        prev = rep.uniform_gap;
    }
}

TEST_CASE("mollifier preconditions") {
    CHECK_THROWS_AS(make_mollifier(0, 1024), std::invalid_argument);
    CHECK_THROWS_AS(make_mollifier(40, 1024), std::invalid_argument);
    CHECK_THROWS_AS(make_mollifier(1, 8), std::invalid_argument);
}

TEST_CASE("gamma sequence: worked example") {
    const auto s = gamma_seq(0.9, 1.0);
    REQUIRE(s.terminated);
    REQUIRE(s.values.size() == 4);
    CHECK(s.values[0] == 1.0);
    CHECK(s.values[1] == Catch::Approx(1.4).epsilon(1e-14));
    CHECK(s.values[2] == Catch::Approx(1.76).epsilon(1e-14));
    CHECK(s.values[3] == Catch::Approx(2.084).epsilon(1e-14));
    CHECK(s.m_bar == 2);
    CHECK(s.gamma_inf == Catch::Approx(5.0).epsilon(1e-14));

    // recursion vs explicit form
    for (std::int64_t m = 0; m < static_cast<std::int64_t>(s.values.size()); ++m)
        CHECK(std::fabs(s.values[static_cast<std::size_t>(m)] - s.explicit_form(m)) < 1e-12);

    CHECK_THROWS_AS(gamma_seq(0.4, 0.2), std::invalid_argument);
    CHECK_THROWS_AS(gamma_seq(1.0, 0.2), std::invalid_argument);
}

TEST_CASE("gamma sequence: monotone and bracketing over 200 admissible draws") {
    rng::SplitMix64 r(2024);
    int done = 0;
    while (done < 200) {
        const double gamma = r.uniform(0.51, 0.999);
        const double bound = 2.0 * (2.0 * gamma - 1.0);
        if (bound <= 1e-4) continue;
        const double alpha = r.uniform(1e-4, bound - 1e-6);
        const auto s = gamma_seq(gamma, alpha);
        REQUIRE(s.terminated);
        for (std::size_t m = 0; m + 1 < s.values.size(); ++m)
            CHECK(s.values[m + 1] > s.values[m]);
        const auto mb = static_cast<std::size_t>(s.m_bar);
        CHECK(s.values[mb] <= 2.0);
        CHECK(s.values[mb + 1] > 2.0);
        CHECK(s.gamma_inf > 2.0);
        ++done;
    }
}

TEST_CASE("gamma sequence: non-terminating parameters reported with cap") {
    const auto s = gamma_seq(0.6, 1.1, 500);  // alpha > 2(2g-1) = 0.4
    CHECK_FALSE(s.terminated);
    CHECK(s.m_bar == -1);
    CHECK(s.gamma_inf < 2.0);
    CHECK(s.values.size() == 501);
}

TEST_CASE("eps grid: worked bounds and rejection") {
    // (gamma=0.9, alpha=1.0): eps1 bound = 0.6/32
    CHECK(eps1_bound(0.9, 1.0) == Catch::Approx(0.01875).epsilon(1e-12));
    CHECK(eps0_bound(0.9, 0.01) == Catch::Approx(0.00025).epsilon(1e-12));

    const auto g = eps_grid(0.9, 1.0, 0.01, 0.0002);
    CHECK(g.L == 2200);  // floor(0.44 / 0.0002)
    CHECK(g.betas.size() == static_cast<std::size_t>(g.L) + 2);
    CHECK(g.lambdas.size() == static_cast<std::size_t>(g.L) + 1);
    CHECK(g.betas[1] == Catch::Approx(0.0002));
    CHECK(g.betas.back() == Catch::Approx(0.5 - 0.01));
    for (std::size_t i = 0; i < g.lambdas.size(); ++i) {
        CHECK(g.lambdas[i] >= 0.0);
        CHECK(g.lambdas[i] <= 1.0);
        CHECK(g.lambdas[i] == Catch::Approx(2.0 * (g.betas[i] + g.eps1)));
    }

    CHECK_THROWS_WITH(eps_grid(0.9, 1.0, 0.02, 0.0002),
                      Catch::Matchers::ContainsSubstring("eps_1 in (0, (2(2*gamma-1)-alpha)/32)"));
    CHECK_THROWS_WITH(eps_grid(0.9, 1.0, 0.01, 0.001),
                      Catch::Matchers::ContainsSubstring("eps_0 in (0, (1-gamma)*eps_1/4)"));
    // no admissible eps1 at all
    CHECK_THROWS_AS(eps_grid(0.6, 1.0, 0.001, 1e-5), std::invalid_argument);
}

TEST_CASE("length scales: n_M example and formulas") {
    CHECK(n_M_threshold(0.01, 1) == 35);

    // lbar at beta_i = 0 is a_n^{5 eps1}
    const auto s = length_scales(10, 0.0, 0.0002, 0.9, 1.0, 0.01, 1, 0.0002);
    CHECK(s.log_lbar_n == Catch::Approx(5.0 * 0.01 * log_a(10)).epsilon(1e-12));
    CHECK(s.n_M == 35);
    CHECK(s.n_0 > 0);
}

TEST_CASE("length-scale ordering holds for n > n_M at admissible parameters") {
    rng::SplitMix64 r(77);
    int done = 0;
    while (done < 100) {
        const double gamma = r.uniform(0.6, 0.99);
        const double bound = 2.0 * (2.0 * gamma - 1.0);
        if (bound <= 0.05) continue;
        const double alpha = r.uniform(0.02, bound * 0.95);
        const double eps1 = r.uniform(1e-4, eps1_bound(gamma, alpha) * 0.99);
        const double eps0 = r.uniform(1e-6 * eps1, eps0_bound(gamma, eps1) * 0.99);
        const auto L = static_cast<std::int64_t>(std::floor((0.5 - 6.0 * eps1) / eps0));
        const auto i = static_cast<std::int64_t>(r.uniform(0.0, static_cast<double>(L)));
        const double beta_i = static_cast<double>(i) * eps0;
        const double beta_next = i == L ? 0.5 - eps1 : static_cast<double>(i + 1) * eps0;
        const auto M = static_cast<std::int64_t>(r.uniform(1.0, 6.0));
        const std::int64_t nM = n_M_threshold(eps1, M);
        const auto n = nM + 1 + static_cast<std::int64_t>(r.uniform(0.0, 200.0));
        const auto sc = length_scales(n, beta_i, beta_next, gamma, alpha, eps1, M, eps0);
        CHECK(sc.lemma36_holds);
        ++done;
    }
}

TEST_CASE("length-scale ordering can fail below n_M") {
    // tiny n with beta_i near 1/2: sqrt(a_n) < lbar/2 needs a_n^{eps1} small
    const auto sc = length_scales(1, 0.4, 0.4002, 0.9, 1.0, 0.01, 30, 0.0002);
    CHECK_FALSE(sc.lemma36_holds);
}
