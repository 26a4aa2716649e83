#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "spdelab/coefficients.hpp"
#include "spdelab/grid.hpp"
#include "spdelab/noise.hpp"

namespace spdelab {

/**
 * Mild-solution time integrator configuration.
 * dt <= h^2/2 is advisory only (nonlinearity sampling accuracy); the spectral
 * semigroup step is unconditionally stable. The advisory state is recorded.
 */
struct SolveConfig {
    TorusGrid grid;
    noise::NoiseSpec noise;
    CoefficientSpec coeff;
    double T_end = 0.25;
    double dt = 1e-4;
    Field ic;
    std::size_t history_depth = 64;         // ring buffer of recent fields
    std::optional<double> truncation_K;     // sup-norm cap diagnostic (T_K analogue)
    std::size_t snapshot_every = 0;         // steps between stored snapshots; 0 = final only

    bool dt_advisory_ok() const { return dt <= 0.5 * grid.h * grid.h; }
};

/** Time-stamped field history (ascending t). */
using HistoryEntry = std::pair<double, Field>;
using History = std::vector<HistoryEntry>;

struct RunResult {
    std::vector<HistoryEntry> snapshots;   // at configured cadence (plus t=0 and final)
    History history;                       // ring buffer contents at final time
    std::vector<double> sup_norms;         // per step (after the step)
    std::vector<double> means;             // per step
    std::optional<double> truncation_hit;  // time the sup-norm cap was hit, if any
    std::uint64_t increments_consumed = 0;
    // provenance
    std::uint64_t seed = 0, stream_id = 0;
    std::string config_digest;
    double final_time = 0.0;

    const Field& final_field() const { return snapshots.back().second; }
};

struct SolveBlowup : std::runtime_error {
    std::size_t step_index;
    RunResult partial;
    SolveBlowup(std::size_t step, RunResult r)
        : std::runtime_error("solve: non-finite field at step " + std::to_string(step)),
          step_index(step), partial(std::move(r)) {}
};

/**
 * One exponential-Euler step of the mild form:
 *   X_{k+1} = P_dt[ X_k + b(t_k,.,X_k) dt + sigma(t_k,.,X_k) dW ].
 * Noise and drift are sampled at the left endpoint, then propagated.
 */
inline Field step(const Field& x_k, double t_k, const noise::NoiseIncrement& dW,
                  const SolveConfig& cfg) {
    if (dW.dt != cfg.dt) throw std::invalid_argument("step: increment dt mismatch");
    Field y = x_k;
    const auto& c = cfg.coeff;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double xi = cfg.grid.coord(cfg.grid.q == 1 ? i : i / cfg.grid.N);
        const double u = x_k[i];
        y[i] = u + c.b(t_k, xi, u) * cfg.dt + c.sigma(t_k, xi, u) * dW.field[i];
    }
    Field out = heat_semigroup_apply(y, cfg.dt);
    if (!out.all_finite()) throw std::runtime_error("step: non-finite field produced");
    return out;
}

namespace detail {

inline void push_history(History& h, std::size_t depth, double t, const Field& f) {
    h.emplace_back(t, f);
    if (h.size() > depth) h.erase(h.begin());
}

}  // namespace detail

/** Integrate to T_end; deterministic given the config. */
inline RunResult solve(const SolveConfig& cfg) {
    if (!(cfg.dt > 0.0)) throw std::invalid_argument("solve: dt must be positive");
    if (!(cfg.T_end >= 0.0)) throw std::invalid_argument("solve: T_end must be >= 0");
    if (!(cfg.ic.grid == cfg.grid)) throw std::invalid_argument("solve: ic grid mismatch");
    const auto nsteps = static_cast<std::size_t>(std::llround(cfg.T_end / cfg.dt));
    noise::IncrementSampler sampler(cfg.grid, cfg.noise);
    RunResult res;
    res.seed = cfg.noise.seed;
    res.stream_id = cfg.noise.stream_id;
    Field x = cfg.ic;
    res.snapshots.emplace_back(0.0, x);
    detail::push_history(res.history, cfg.history_depth, 0.0, x);
    for (std::size_t k = 0; k < nsteps; ++k) {
        const double t_k = cfg.dt * static_cast<double>(k);
        const auto dW = sampler.sample(cfg.dt, k);
        ++res.increments_consumed;
        Field next;
        try {
            next = step(x, t_k, dW, cfg);
        } catch (const std::runtime_error&) {
            res.final_time = t_k;
            throw SolveBlowup(k, std::move(res));
        }
        x = std::move(next);
        const double t_next = cfg.dt * static_cast<double>(k + 1);
        res.sup_norms.push_back(x.sup_norm());
        res.means.push_back(x.mean());
        detail::push_history(res.history, cfg.history_depth, t_next, x);
        if (cfg.snapshot_every > 0 && (k + 1) % cfg.snapshot_every == 0 && k + 1 < nsteps)
            res.snapshots.emplace_back(t_next, x);
        if (cfg.truncation_K && res.sup_norms.back() > *cfg.truncation_K) {
            res.truncation_hit = t_next;
            res.final_time = t_next;
            if (res.snapshots.back().first != t_next) res.snapshots.emplace_back(t_next, x);
            return res;
        }
    }
    res.final_time = cfg.dt * static_cast<double>(nsteps);
    if (res.snapshots.back().first != res.final_time)
        res.snapshots.emplace_back(res.final_time, x);
    return res;
}

struct PairedResult {
    RunResult first, second;
    std::vector<double> d_series;  // sup-norm difference after every step
    double d_final = 0.0;
    double d_max = 0.0;
    std::uint64_t shared_increments = 0;
};

/**
 * Two solves in lockstep on one shared noise realization (identical seed
 * triple); only the initial data differ. d(t) = ||X1(t)-X2(t)||_inf.
 */
inline PairedResult paired_solve(const SolveConfig& cfg, const Field& ic1, const Field& ic2) {
    if (!(ic1.grid == cfg.grid) || !(ic2.grid == cfg.grid))
        throw std::invalid_argument("paired_solve: ic grid mismatch");
    const auto nsteps = static_cast<std::size_t>(std::llround(cfg.T_end / cfg.dt));
    noise::IncrementSampler sampler(cfg.grid, cfg.noise);
    PairedResult pr;
    pr.first.seed = pr.second.seed = cfg.noise.seed;
    pr.first.stream_id = pr.second.stream_id = cfg.noise.stream_id;
    Field x1 = ic1, x2 = ic2;
    pr.first.snapshots.emplace_back(0.0, x1);
    pr.second.snapshots.emplace_back(0.0, x2);
    detail::push_history(pr.first.history, cfg.history_depth, 0.0, x1);
    detail::push_history(pr.second.history, cfg.history_depth, 0.0, x2);
    for (std::size_t k = 0; k < nsteps; ++k) {
        const double t_k = cfg.dt * static_cast<double>(k);
        const auto dW = sampler.sample(cfg.dt, k);  // one increment, consumed by both
        ++pr.shared_increments;
        pr.first.increments_consumed = pr.second.increments_consumed = pr.shared_increments;
        Field n1, n2;
        try {
            n1 = step(x1, t_k, dW, cfg);
            n2 = step(x2, t_k, dW, cfg);
        } catch (const std::runtime_error&) {
            pr.first.final_time = pr.second.final_time = t_k;
            throw SolveBlowup(k, std::move(pr.first));
        }
        x1 = std::move(n1);
        x2 = std::move(n2);
        const double t_next = cfg.dt * static_cast<double>(k + 1);
        pr.first.sup_norms.push_back(x1.sup_norm());
        pr.second.sup_norms.push_back(x2.sup_norm());
        detail::push_history(pr.first.history, cfg.history_depth, t_next, x1);
        detail::push_history(pr.second.history, cfg.history_depth, t_next, x2);
        pr.d_series.push_back(sup_distance(x1, x2));
        pr.d_max = std::max(pr.d_max, pr.d_series.back());
    }
    pr.first.final_time = pr.second.final_time = cfg.dt * static_cast<double>(nsteps);
    pr.first.snapshots.emplace_back(pr.first.final_time, x1);
    pr.second.snapshots.emplace_back(pr.second.final_time, x2);
    pr.d_final = pr.d_series.empty() ? sup_distance(x1, x2) : pr.d_series.back();
    return pr;
}

// ---------------------------------------------------------------------------
// Snapshot export: flat binary (magic, version, q, N, L, t; little-endian f64
// payload, row-major) and CSV for q=1.
// ---------------------------------------------------------------------------

constexpr char kFieldMagic[8] = {'T', 'O', 'R', 'U', 'S', 'F', 'L', 'D'};
constexpr std::uint32_t kFieldVersion = 1;

inline void write_field_binary(std::ostream& os, const Field& f, double t) {
    os.write(kFieldMagic, 8);
    const std::uint32_t ver = kFieldVersion, q = static_cast<std::uint32_t>(f.grid.q);
    const std::uint64_t N = f.grid.N;
    const double L = f.grid.L;
    os.write(reinterpret_cast<const char*>(&ver), 4);
    os.write(reinterpret_cast<const char*>(&q), 4);
    os.write(reinterpret_cast<const char*>(&N), 8);
    os.write(reinterpret_cast<const char*>(&L), 8);
    os.write(reinterpret_cast<const char*>(&t), 8);
    os.write(reinterpret_cast<const char*>(f.values.data()),
             static_cast<std::streamsize>(f.values.size() * sizeof(double)));
}

inline Field read_field_binary(std::istream& is, double* t_out = nullptr) {
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kFieldMagic, 8) != 0)
        throw std::runtime_error("read_field_binary: bad magic");
    std::uint32_t ver = 0, q = 0;
    std::uint64_t N = 0;
    double L = 0.0, t = 0.0;
    is.read(reinterpret_cast<char*>(&ver), 4);
    is.read(reinterpret_cast<char*>(&q), 4);
    is.read(reinterpret_cast<char*>(&N), 8);
    is.read(reinterpret_cast<char*>(&L), 8);
    is.read(reinterpret_cast<char*>(&t), 8);
    if (!is || ver != kFieldVersion) throw std::runtime_error("read_field_binary: bad header");
    Field f(make_grid(static_cast<int>(q), L, N));
    is.read(reinterpret_cast<char*>(f.values.data()),
            static_cast<std::streamsize>(f.values.size() * sizeof(double)));
    if (!is) throw std::runtime_error("read_field_binary: truncated payload");
    if (t_out) *t_out = t;
    return f;
}

inline void write_field_csv(std::ostream& os, const Field& f) {
    if (f.grid.q != 1) throw std::invalid_argument("write_field_csv: q=1 only");
    os << "x,value\n";
    char buf[80];
    for (std::size_t j = 0; j < f.size(); ++j) {
        std::snprintf(buf, sizeof buf, "%.12g,%.17g\n", f.grid.coord(j), f[j]);
        os << buf;
    }
}

}  // namespace spdelab
