#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "spdelab/analysis.hpp"
#include "spdelab/parallel.hpp"
#include "spdelab/solver.hpp"

namespace spdelab::analysis {

/**
 * (alpha, gamma) cell of the uniqueness probe. The divergence statistic is an
 * exploratory proxy for discretized paired trajectories, not a reproduction
 * of any statement about the continuum equation; cells are annotated by their
 * side of the alpha = 2(2*gamma-1) boundary.
 */
struct PhaseCell {
    double alpha = 0.0;
    double gamma = 0.0;
    std::string boundary_side;  // below | on | above, relative to alpha = 2(2g-1)
    std::size_t replicas = 0;
    double d_median = 0.0;
    double d_max = 0.0;
    double divergence_fraction = 0.0;
    double threshold = 0.0;
    double perturbation = 0.0;
    std::uint64_t seed = 0;
    std::size_t failures = 0;  // solver blow-ups, recorded, never aborting the sweep
};

struct PhaseTable {
    std::vector<PhaseCell> cells;  // row-major over (alpha, gamma)
    std::size_t n_alpha = 0, n_gamma = 0;
};

struct SweepParams {
    std::vector<double> alphas;
    std::vector<double> gammas;
    std::size_t replicas = 10;
    double perturbation = 1e-12;
    double threshold = 1e-6;
    std::uint64_t master_seed = 1;
    std::size_t jobs = 1;
};

inline const char* boundary_side(double alpha, double gamma) {
    const double b = 2.0 * (2.0 * gamma - 1.0);
    if (alpha < b) return "below";
    if (alpha > b) return "above";
    return "on";
}

/** Centered C^inf bump of the given sup-norm, support radius L/4. */
inline Field perturbation_field(const TorusGrid& g, double magnitude) {
    Field f(g);
    const double c0 = 0.5 * g.L, r = 0.25 * g.L;
    for (std::size_t j = 0; j < f.size(); ++j) {
        const double d0 = g.wrap(g.coord(g.q == 1 ? j : j / g.N) - c0);
        const double d1 = g.q == 2 ? g.wrap(g.coord(j % g.N) - c0) : 0.0;
        const double r2 = (d0 * d0 + d1 * d1) / (r * r);
        f[j] = r2 < 1.0 ? std::exp(-1.0 / (1.0 - r2)) * std::exp(1.0) * magnitude : 0.0;
    }
    return f;
}

/**
 * Paired solves from zero initial data vs an injected perturbation, per
 * (alpha, gamma) cell, on disjoint noise streams; fully deterministic under
 * the master seed regardless of the jobs count.
 */
inline PhaseTable uniqueness_sweep(const SweepParams& p, const SolveConfig& base_cfg) {
    for (double a : p.alphas) noise::validate_alpha(a, base_cfg.grid.q);
    for (double gmm : p.gammas)
        if (!(gmm > 0.0 && gmm <= 1.0))
            throw std::invalid_argument("uniqueness_sweep: gamma must lie in (0,1]");
    PhaseTable table;
    table.n_alpha = p.alphas.size();
    table.n_gamma = p.gammas.size();
    const std::size_t ncells = p.alphas.size() * p.gammas.size();
    table.cells.resize(ncells);

    struct RepOut { double d = 0.0; bool failed = false; };
    std::vector<std::vector<RepOut>> results(ncells, std::vector<RepOut>(p.replicas));

    parallel_for(ncells * p.replicas, p.jobs, [&](std::size_t idx) {
        const std::size_t cell = idx / p.replicas, rep = idx % p.replicas;
        const std::size_t ia = cell / p.gammas.size(), ig = cell % p.gammas.size();
        SolveConfig cfg = base_cfg;
        cfg.noise.alpha = p.alphas[ia];
        cfg.noise.seed = p.master_seed;
        cfg.noise.stream_id = static_cast<std::uint64_t>(cell) * 1000003ULL + rep;
        cfg.coeff = CoefficientSpec::power_abs(p.gammas[ig]);
        const Field zero(cfg.grid);
        const Field pert = perturbation_field(cfg.grid, p.perturbation);
        try {
            const auto pr = paired_solve(cfg, zero, pert);
            results[cell][rep].d = pr.d_final;
        } catch (const SolveBlowup&) {
            results[cell][rep].failed = true;
        }
    });

    for (std::size_t cell = 0; cell < ncells; ++cell) {
        const std::size_t ia = cell / p.gammas.size(), ig = cell % p.gammas.size();
        PhaseCell& c = table.cells[cell];
        c.alpha = p.alphas[ia];
        c.gamma = p.gammas[ig];
        c.boundary_side = boundary_side(c.alpha, c.gamma);
        c.replicas = p.replicas;
        c.threshold = p.threshold;
        c.perturbation = p.perturbation;
        c.seed = p.master_seed;
        std::vector<double> ds;
        for (const auto& r : results[cell]) {
            if (r.failed) {
                ++c.failures;
                continue;
            }
            ds.push_back(r.d);
        }
        if (!ds.empty()) {
            std::sort(ds.begin(), ds.end());
            c.d_max = ds.back();
            const std::size_t mid = ds.size() / 2;
            c.d_median = ds.size() % 2 == 1 ? ds[mid] : 0.5 * (ds[mid - 1] + ds[mid]);
            std::size_t over = 0;
            for (double d : ds)
                if (d > p.threshold) ++over;
            c.divergence_fraction = static_cast<double>(over) / static_cast<double>(ds.size());
        } else {
            c.d_median = std::nan("");
            c.d_max = std::nan("");
            c.divergence_fraction = std::nan("");
        }
    }
    return table;
}

/** Deterministic CSV (fixed %.12g formatting); schema pinned, disclaimer as a comment line. */
inline void write_phase_table_csv(std::ostream& os, const PhaseTable& t) {
    os << "# exploratory diagnostic of discretized paired trajectories; no claim about "
          "pathwise uniqueness of the continuum equation is made\n";
    os << "alpha,gamma,boundary_side,replicas,d_median,d_max,divergence_fraction,threshold,"
          "perturbation,seed\n";
    char buf[320];
    for (const auto& c : t.cells) {
        std::snprintf(buf, sizeof buf, "%.12g,%.12g,%s,%zu,%.12g,%.12g,%.12g,%.12g,%.12g,%llu\n",
                      c.alpha, c.gamma, c.boundary_side.c_str(), c.replicas, c.d_median, c.d_max,
                      c.divergence_fraction, c.threshold, c.perturbation,
                      static_cast<unsigned long long>(c.seed));
        os << buf;
    }
}

/** Bin occupancy CSV: n, i, beta_i, measure, envelope_log, admissible_measure. */
inline void write_bins_csv(std::ostream& os, const GradientBins& b, const yw::EpsGrid& eps) {
    os << "n,i,beta_i,measure,envelope_log,admissible_measure\n";
    char buf[200];
    for (const auto& bin : b.bins) {
        std::snprintf(buf, sizeof buf, "%lld,%lld,%.12g,%.12g,%.12g,%.12g\n",
                      static_cast<long long>(bin.n), static_cast<long long>(bin.i),
                      eps.betas[static_cast<std::size_t>(bin.i)], bin.measure, bin.envelope_log,
                      b.admissible_measure);
        os << buf;
    }
}

}  // namespace spdelab::analysis
