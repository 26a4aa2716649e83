#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "spdelab/numerics.hpp"
#include "spdelab/solver.hpp"

using namespace spdelab;

namespace {

Field periodized_gaussian(const TorusGrid& g, double c, double s2) {
    Field f(g);
    for (std::size_t j = 0; j < g.N; ++j) {
        double acc = 0.0;
        for (int w = -6; w <= 6; ++w) {
            const double d = g.coord(j) - c + g.L * w;
            acc += std::exp(-d * d / (2.0 * s2)) / std::sqrt(2.0 * M_PI * s2);
        }
        f[j] = acc;
    }
    return f;
}

SolveConfig base_config(std::size_t N = 128, double T = 0.1, double dt = 1e-3) {
    SolveConfig cfg;
    cfg.grid = make_grid(1, 1.0, N);
    cfg.noise.alpha = 0.5;
    cfg.noise.seed = 12;
    cfg.coeff = CoefficientSpec::none();
    cfg.T_end = T;
    cfg.dt = dt;
    cfg.ic = Field(cfg.grid);
    return cfg;
}

}  // namespace

TEST_CASE("coefficient builtins: Holder and growth spot-checks") {
    const auto pw = CoefficientSpec::power_abs(0.75);
    const auto chk = check_coefficients(pw);
    CHECK(chk.holder_ok);
    CHECK(chk.growth_ok);

    const auto lin = CoefficientSpec::linear();
    CHECK(check_coefficients(lin).holder_ok);

    CoefficientSpec sq;
    sq.sigma_tag = CoefficientSpec::Sigma::sqrt_pos;
    sq.gamma_meta = 0.5;
    CHECK(check_coefficients(sq).holder_ok);

    CHECK_THROWS_AS(CoefficientSpec::power_abs(0.0), std::invalid_argument);
    CHECK_THROWS_AS(CoefficientSpec::power_abs(1.5), std::invalid_argument);
}

TEST_CASE("step: reductions") {
    auto cfg = base_config();
    const auto ic = periodized_gaussian(cfg.grid, 0.5, 0.002);
    noise::IncrementSampler sampler(cfg.grid, cfg.noise);
    const auto dW = sampler.sample(cfg.dt, 0);

    // sigma=0, b=0: step equals the semigroup
    const auto s0 = step(ic, 0.0, dW, cfg);
    CHECK(sup_distance(s0, heat_semigroup_apply(ic, cfg.dt)) == 0.0);

    // sigma=0, b=c: X + c dt propagated; semigroup preserves constants
    auto cfg_b = cfg;
    cfg_b.coeff.drift_tag = CoefficientSpec::Drift::constant;
    cfg_b.coeff.b_coeff = 2.0;
    const auto sb = step(ic, 0.0, dW, cfg_b);
    Field expect = heat_semigroup_apply(ic, cfg.dt);
    for (auto& v : expect.values) v += 2.0 * cfg.dt;
    CHECK(sup_distance(sb, expect) < 1e-13);

    // increment dt mismatch rejected
    const auto wrong = sampler.sample(cfg.dt * 2.0, 0);
    CHECK_THROWS_AS(step(ic, 0.0, wrong, cfg), std::invalid_argument);
}

TEST_CASE("step: linear sigma against per-mode closed form") {
    auto cfg = base_config();
    cfg.coeff = CoefficientSpec::linear();
    Field one(cfg.grid, 1.0);
    noise::IncrementSampler sampler(cfg.grid, cfg.noise);
    const auto dW = sampler.sample(cfg.dt, 3);
    const auto out = step(one, 0.0, dW, cfg);
    // X_1 = P_dt(1 + dW): convolution computed by hand per mode
    Field arg = one;
    for (std::size_t j = 0; j < arg.size(); ++j) arg[j] += dW.field[j];
    const auto expect = heat_semigroup_apply(arg, cfg.dt);
    CHECK(sup_distance(out, expect) == 0.0);
}

TEST_CASE("solve: deterministic heat flow matches analytic evolution") {
    auto cfg = base_config(512, 0.004, 1e-5);
    const double s2 = 0.001;
    cfg.ic = periodized_gaussian(cfg.grid, 0.5, s2);
    const auto res = solve(cfg);
    const auto exact = periodized_gaussian(cfg.grid, 0.5, s2 + cfg.T_end);
    CHECK(sup_distance(res.final_field(), exact) < 1e-8);
    CHECK(res.increments_consumed == 400);
}

TEST_CASE("solve: bit-identical reruns") {
    auto cfg = base_config(128, 0.05, 1e-3);
    cfg.coeff = CoefficientSpec::power_abs(0.75);
    cfg.ic = Field(cfg.grid, 0.5);
    const auto a = solve(cfg);
    const auto b = solve(cfg);
    REQUIRE(a.snapshots.size() == b.snapshots.size());
    for (std::size_t i = 0; i < a.final_field().size(); ++i)
        CHECK(a.final_field()[i] == b.final_field()[i]);
}

TEST_CASE("solve: reduction to a single semigroup application") {
    auto cfg = base_config(128, 0.05, 1e-3);
    rng::SplitMix64 r(4);
    cfg.ic = Field(cfg.grid);
    for (std::size_t j = 0; j < cfg.grid.N; ++j)
        cfg.ic[j] = std::sin(2.0 * M_PI * cfg.grid.coord(j)) + 0.3 * r.uniform(-1.0, 1.0);
    cfg.ic = heat_semigroup_apply(cfg.ic, 1e-4);  // smooth the roughness a little
    const auto res = solve(cfg);
    CHECK(sup_distance(res.final_field(), heat_semigroup_apply(cfg.ic, cfg.T_end)) < 1e-10);
}

TEST_CASE("solve: affine in the initial condition when sigma=0, b linear") {
    auto cfg = base_config(64, 0.03, 1e-3);
    cfg.coeff = CoefficientSpec::none();
    cfg.coeff.drift_tag = CoefficientSpec::Drift::linear;
    cfg.coeff.b_coeff = 0.8;
    rng::SplitMix64 r(6);
    Field ic1(cfg.grid), ic2(cfg.grid);
    for (std::size_t j = 0; j < cfg.grid.N; ++j) {
        ic1[j] = r.uniform(-1.0, 1.0);
        ic2[j] = r.uniform(-1.0, 1.0);
    }
    const double lam = 0.37;
    auto run = [&](const Field& ic) {
        auto c = cfg;
        c.ic = ic;
        return solve(c).final_field();
    };
    Field mix(cfg.grid);
    for (std::size_t j = 0; j < cfg.grid.N; ++j) mix[j] = lam * ic1[j] + (1.0 - lam) * ic2[j];
    const auto fmix = run(mix);
    const auto f1 = run(ic1), f2 = run(ic2);
    double err = 0.0;
    for (std::size_t j = 0; j < cfg.grid.N; ++j)
        err = std::max(err, std::fabs(fmix[j] - lam * f1[j] - (1.0 - lam) * f2[j]));
    CHECK(err < 1e-10);
}

TEST_CASE("solve: Holder coefficient runs stay finite; zero is a fixed point") {
    auto cfg = base_config(256, 0.25, 5e-4);
    cfg.coeff = CoefficientSpec::power_abs(0.75);

    // exact zero data is a fixed point of the scheme (sigma(0) = 0)
    const auto rz = solve(cfg);
    CHECK(rz.final_field().sup_norm() == 0.0);

    // noise-excited from a tiny perturbation: nontrivial but finite over 50 seeds
    for (std::size_t j = 0; j < cfg.grid.N; ++j)
        cfg.ic[j] = 1e-10 * std::sin(2.0 * M_PI * cfg.grid.coord(j));
    double max_sup = 0.0, min_sup = 1e300;
    for (std::uint64_t s = 0; s < 50; ++s) {
        cfg.noise.stream_id = s;
        const auto res = solve(cfg);
        CHECK(res.final_field().all_finite());
        max_sup = std::max(max_sup, res.sup_norms.back());
        min_sup = std::min(min_sup, res.sup_norms.back());
    }
    CHECK(max_sup < 1e3);
    CHECK(min_sup > 1e-8);
}

TEST_CASE("solve: truncation diagnostic records the hit time") {
    auto cfg = base_config(64, 0.2, 1e-3);
    cfg.coeff = CoefficientSpec::none();
    cfg.coeff.drift_tag = CoefficientSpec::Drift::constant;
    cfg.coeff.b_coeff = 10.0;  // sup-norm grows ~10 t
    cfg.truncation_K = 1.0;
    const auto res = solve(cfg);
    REQUIRE(res.truncation_hit.has_value());
    CHECK(*res.truncation_hit == Catch::Approx(0.1).margin(2e-3));
    CHECK(res.final_time == *res.truncation_hit);
}

TEST_CASE("solve: blow-up carries the step index and last good snapshot") {
    auto cfg = base_config(64, 0.5, 1e-3);
    cfg.coeff.sigma_tag = CoefficientSpec::Sigma::custom;
    cfg.coeff.sigma_fn = [](double t, double, double) {
        return t > 0.01 ? std::numeric_limits<double>::quiet_NaN() : 0.0;
    };
    try {
        solve(cfg);
        FAIL("expected SolveBlowup");
    } catch (const SolveBlowup& e) {
        CHECK(e.step_index == 11);  // first step with t_k > 0.01
        CHECK_FALSE(e.partial.snapshots.empty());
        CHECK(e.partial.snapshots.back().second.all_finite());
    }
}

TEST_CASE("paired solve: identical data gives identically zero difference") {
    auto cfg = base_config(128, 0.05, 1e-3);
    cfg.coeff = CoefficientSpec::power_abs(0.5);
    Field ic(cfg.grid, 0.2);
    const auto pr = paired_solve(cfg, ic, ic);
    CHECK(pr.d_max == 0.0);
    CHECK(pr.shared_increments == 50);
    CHECK(pr.first.increments_consumed == pr.shared_increments);
    CHECK(pr.second.increments_consumed == pr.shared_increments);
}

TEST_CASE("paired solve: Lipschitz stability of tiny perturbations") {
    auto cfg = base_config(256, 0.5, 2e-4);
    cfg.coeff = CoefficientSpec::power_abs(1.0);
    Field ic1(cfg.grid);
    Field ic2(cfg.grid, 1e-12);
    const auto pr = paired_solve(cfg, ic1, ic2);
    CHECK(pr.d_final < 1e-6);
}

TEST_CASE("self-convergence of the additive scheme is O(dt^{1/2})") {
    // couple refinements by aggregating fine increments into coarse steps
    const auto g = make_grid(1, 1.0, 128);
    const double T = 0.1;
    const double dt_fine = T / 1024.0;
    std::vector<double> dts = {T / 64.0, T / 128.0, T / 256.0};
    std::vector<double> errs(dts.size(), 0.0);
    const std::size_t seeds = 10;
    for (std::uint64_t s = 0; s < seeds; ++s) {
        noise::NoiseSpec spec;
        spec.alpha = 0.5;
        spec.seed = 1000 + s;
        noise::IncrementSampler sampler(g, spec);
        const std::size_t nfine = 1024;
        std::vector<Field> fine;
        fine.reserve(nfine);
        for (std::size_t k = 0; k < nfine; ++k) fine.push_back(sampler.sample(dt_fine, k).field);
        auto run_at = [&](std::size_t agg) {
            SolveConfig cfg;
            cfg.grid = g;
            cfg.coeff = CoefficientSpec::additive();
            cfg.dt = dt_fine * static_cast<double>(agg);
            cfg.T_end = T;
            cfg.ic = Field(g);
            Field x = cfg.ic;
            const std::size_t steps = nfine / agg;
            for (std::size_t k = 0; k < steps; ++k) {
                noise::NoiseIncrement dW;
                dW.dt = cfg.dt;
                dW.field = Field(g);
                for (std::size_t a = 0; a < agg; ++a)
                    for (std::size_t j = 0; j < g.N; ++j)
                        dW.field[j] += fine[k * agg + a][j];
                x = step(x, cfg.dt * static_cast<double>(k), dW, cfg);
            }
            return x;
        };
        const auto ref = run_at(1);
        for (std::size_t i = 0; i < dts.size(); ++i) {
            const auto agg = static_cast<std::size_t>(std::llround(dts[i] / dt_fine));
            errs[i] += sup_distance(run_at(agg), ref) / static_cast<double>(seeds);
        }
    }
    const auto fit = num::fit_loglog(dts, errs);
    CHECK(fit.slope >= 0.4);
}

TEST_CASE("config advisory and snapshot cadence") {
    auto cfg = base_config(64, 0.02, 1e-3);
    CHECK_FALSE(cfg.dt_advisory_ok());  // h^2/2 = 1.2e-4 < 1e-3
    cfg.dt = 1e-4;
    CHECK(cfg.dt_advisory_ok());

    cfg = base_config(64, 0.02, 1e-3);
    cfg.snapshot_every = 5;
    cfg.coeff = CoefficientSpec::additive();
    const auto res = solve(cfg);
    REQUIRE(res.snapshots.size() >= 3);
    for (std::size_t i = 1; i < res.snapshots.size(); ++i)
        CHECK(res.snapshots[i].first > res.snapshots[i - 1].first);
    CHECK(res.snapshots.front().first == 0.0);
    CHECK(res.snapshots.back().first == Catch::Approx(0.02));
}

TEST_CASE("2d solve smoke and binary round trip") {
    SolveConfig cfg;
    cfg.grid = make_grid(2, 1.0, 16);
    cfg.noise.alpha = 1.0;
    cfg.noise.seed = 77;
    cfg.coeff = CoefficientSpec::additive();
    cfg.T_end = 0.01;
    cfg.dt = 1e-3;
    cfg.ic = Field(cfg.grid);
    const auto res = solve(cfg);
    CHECK(res.final_field().all_finite());
    CHECK(res.final_field().sup_norm() > 0.0);

    std::stringstream buf;
    write_field_binary(buf, res.final_field(), res.final_time);
    double t = 0.0;
    const auto back = read_field_binary(buf, &t);
    CHECK(back.grid.q == 2);
    CHECK(sup_distance(back, res.final_field()) == 0.0);
}

TEST_CASE("snapshot binary round trip and CSV schema") {
    const auto g = make_grid(1, 2.0, 64);
    Field f(g);
    for (std::size_t j = 0; j < g.N; ++j) f[j] = std::cos(3.0 * g.coord(j));
    std::stringstream buf;
    write_field_binary(buf, f, 0.75);
    double t = 0.0;
    const auto f2 = read_field_binary(buf, &t);
    CHECK(t == 0.75);
    CHECK(f2.grid.N == g.N);
    CHECK(f2.grid.L == g.L);
    CHECK(sup_distance(f, f2) == 0.0);

    std::ostringstream csv;
    write_field_csv(csv, f);
    CHECK(csv.str().rfind("x,value\n", 0) == 0);

    std::stringstream bad("not a field");
    CHECK_THROWS_AS(read_field_binary(bad), std::runtime_error);
}
