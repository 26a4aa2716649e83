#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "spdelab/analysis.hpp"
#include "spdelab/config.hpp"
#include "spdelab/heat_kernel.hpp"
#include "spdelab/sweep.hpp"

namespace spdelab::cli {

inline constexpr const char* kCodeVersion = "spdelab 1.0.0";

// FNV-1a 64 over the canonical (sorted-key) config dump
inline std::string config_digest(const json& j) {
    const std::string s = j.dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

struct RunContext {
    std::filesystem::path dir;
    std::vector<std::string> artifacts;
};

namespace detail {

inline void write_text(RunContext& ctx, const std::string& name, const std::string& body) {
    std::ofstream out(ctx.dir / name, std::ios::binary);
    out << body;
    ctx.artifacts.push_back(name);
}

template <typename Fn>
void write_stream(RunContext& ctx, const std::string& name, Fn&& fn) {
    std::ofstream out(ctx.dir / name, std::ios::binary);
    fn(out);
    ctx.artifacts.push_back(name);
}

inline void run_simulate(const ExperimentConfig& cfg, RunContext& ctx) {
    auto scfg = cfg.make_solve_config();
    const auto res = solve(scfg);
    write_stream(ctx, "final.field", [&](std::ostream& os) {
        write_field_binary(os, res.final_field(), res.final_time);
    });
    if (cfg.grid.q == 1)
        write_stream(ctx, "final.csv",
                     [&](std::ostream& os) { write_field_csv(os, res.final_field()); });
    write_stream(ctx, "diagnostics.csv", [&](std::ostream& os) {
        os << "t,sup_norm,mean\n";
        char buf[120];
        for (std::size_t k = 0; k < res.sup_norms.size(); ++k) {
            std::snprintf(buf, sizeof buf, "%.12g,%.17g,%.17g\n",
                          scfg.dt * static_cast<double>(k + 1), res.sup_norms[k], res.means[k]);
            os << buf;
        }
    });
}

inline void run_paired(const ExperimentConfig& cfg, RunContext& ctx) {
    auto scfg = cfg.make_solve_config();
    const Field ic1(cfg.grid);
    const Field ic2 = analysis::perturbation_field(cfg.grid, cfg.paired_perturbation);
    const auto pr = paired_solve(scfg, ic1, ic2);
    write_stream(ctx, "difference.csv", [&](std::ostream& os) {
        os << "t,d_sup\n";
        char buf[80];
        for (std::size_t k = 0; k < pr.d_series.size(); ++k) {
            std::snprintf(buf, sizeof buf, "%.12g,%.17g\n", scfg.dt * static_cast<double>(k + 1),
                          pr.d_series[k]);
            os << buf;
        }
    });
    write_stream(ctx, "first.field", [&](std::ostream& os) {
        write_field_binary(os, pr.first.final_field(), pr.first.final_time);
    });
    write_stream(ctx, "second.field", [&](std::ostream& os) {
        write_field_binary(os, pr.second.final_field(), pr.second.final_time);
    });
}

inline void run_sweep(const ExperimentConfig& cfg, RunContext& ctx) {
    analysis::SweepParams p;
    p.alphas = cfg.sweep_alphas;
    p.gammas = cfg.sweep_gammas;
    p.replicas = cfg.sweep_replicas;
    p.perturbation = cfg.sweep_perturbation;
    p.threshold = cfg.sweep_threshold;
    p.master_seed = cfg.master_seed;
    p.jobs = cfg.jobs;
    const auto table = analysis::uniqueness_sweep(p, cfg.make_solve_config());
    write_stream(ctx, "phase_table.csv",
                 [&](std::ostream& os) { analysis::write_phase_table_csv(os, table); });
}

inline void run_verify_kernels(const ExperimentConfig& cfg, RunContext& ctx) {
    (void)cfg;
    std::vector<hk::KernelLemmaReport> reports;
    reports.push_back(hk::verify_algebra_bound(1.0, 2.0, {1.0, 2.0, 4.0}));
    reports.push_back(hk::verify_deriv_bound(num::geomspace(0.01, 1.0, 7),
                                             num::geomspace(1e-3, 4.0, 60), 1));
    reports.push_back(hk::verify_cross_integral_sweep(num::geomspace(0.02, 0.2, 7), 3.0, 0.5, 1));
    reports.push_back(
        hk::verify_cross_integral_offset_sweep(0.1, num::geomspace(0.01, 0.04, 6), 0.5, 1));
    reports.push_back(hk::verify_weighted_integral(0.25, 0.5, 1.0, 1.0, 0.5, 0.5, 0.0, 0.0, 1));
    reports.push_back(hk::verify_outside_tail(0.0, 0.05, 0.06, 0.0, 0.02, 0.1, 0.3, 1.0, 0.5, 0.5, 1));
    reports.push_back(hk::verify_difference_pointwise(0.04, 0.09, {0.3}, {0.12}, 1, 1));
    reports.push_back(hk::verify_a3_scan(0.05, 0.1, num::geomspace(1e-3, 2.0, 200)));
    write_stream(ctx, "kernel_reports.csv", [&](std::ostream& os) {
        os << "lemma_id,param_json,lhs,envelope,ratio\n";
        char buf[400];
        for (const auto& rep : reports)
            for (const auto& row : rep.rows) {
                std::snprintf(buf, sizeof buf, "%s,%s,%.12g,%.12g,%.12g\n",
                              hk::lemma_name(rep.lemma_id), hk::csv_quote(row.param_json).c_str(),
                              row.lhs, row.envelope, row.ratio);
                os << buf;
            }
    });
    write_stream(ctx, "kernel_slopes.csv", [&](std::ostream& os) {
        os << "lemma_id,context,slope\n";
        char buf[160];
        for (const auto& rep : reports)
            if (rep.scaling_slope) {
                std::snprintf(buf, sizeof buf, "%s,%s,%.12g\n", hk::lemma_name(rep.lemma_id),
                              rep.rows.empty() ? "" : "sweep", *rep.scaling_slope);
                os << buf;
            }
    });
}

inline void run_verify_yw(const ExperimentConfig& cfg, RunContext& ctx) {
    write_stream(ctx, "mollifier_checks.csv", [&](std::ostream& os) {
        os << "n,shape,mass_error,psi_cap_max,phi_prime_max,phi_second_cap_max,uniform_gap,"
              "kappa,a_nm1\n";
        char buf[320];
        for (std::int64_t n = cfg.yw_n_min; n <= cfg.yw_n_max; ++n) {
            const auto pair = yw::make_mollifier(n, cfg.yw_quad_resolution);
            const auto rep = yw::phi_props_check(pair);
            std::snprintf(buf, sizeof buf, "%lld,%s,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n",
                          static_cast<long long>(n), yw::MollifierPair::shape_name(),
                          rep.mass_error, rep.psi_cap_max, rep.phi_prime_max,
                          rep.phi_second_cap_max, rep.uniform_gap, rep.kappa,
                          yw::a_seq(n - 1));
            os << buf;
        }
    });
}

inline void run_analyze(const ExperimentConfig& cfg, RunContext& ctx) {
    Field f(cfg.grid);
    History history;
    if (cfg.analyze_input) {
        std::ifstream in(*cfg.analyze_input, std::ios::binary);
        if (!in) throw ConfigError(".analyze.input: file not readable: " + *cfg.analyze_input);
        double t = 0.0;
        f = read_field_binary(in, &t);
        history.emplace_back(t, f);
    } else {
        auto scfg = cfg.make_solve_config();
        const auto res = solve(scfg);
        f = res.final_field();
        history = res.history;
    }
    if (!cfg.analyze_lags.empty()) {
        const auto est = analysis::holder_exponent(f, cfg.analyze_lags);
        write_stream(ctx, "holder.csv", [&](std::ostream& os) {
            os << "lag,S2\n";
            char buf[80];
            for (const auto& [r, s2] : est.structure) {
                std::snprintf(buf, sizeof buf, "%.12g,%.17g\n", r, s2);
                os << buf;
            }
            std::snprintf(buf, sizeof buf, "# zeta,%.12g,std_error,%.12g\n", est.zeta,
                          est.std_error);
            os << buf;
        });
    }
    if (cfg.bins_n) {
        const auto eps = yw::eps_grid(cfg.coeff.gamma_meta, cfg.noise_spec.alpha, cfg.bins_eps1,
                                      cfg.bins_eps0);
        const auto bins = analysis::gradient_bins(history, history.back().first, *cfg.bins_n, eps,
                                                  cfg.bins_K0);
        write_stream(ctx, "bins.csv",
                     [&](std::ostream& os) { analysis::write_bins_csv(os, bins, eps); });
    }
    if (cfg.in_monitor_n) {
        const std::size_t center = cfg.grid.q == 1 ? cfg.grid.N / 2
                                                   : (cfg.grid.N / 2) * cfg.grid.N + cfg.grid.N / 2;
        const Field Psi = analysis::bump_test_fn(cfg.grid, cfg.in_monitor_m_psi, center);
        write_stream(ctx, "in_monitor.csv", [&](std::ostream& os) {
            os << "t,In\n";
            char buf[80];
            const std::size_t stride = std::max<std::size_t>(1, history.size() / 16);
            for (std::size_t k = stride; k < history.size(); k += stride) {
                const double t = history[k].first;
                const double v = analysis::In_monitor(history, t, *cfg.in_monitor_n,
                                                      cfg.coeff.gamma_meta, cfg.noise_spec.alpha,
                                                      Psi);
                std::snprintf(buf, sizeof buf, "%.12g,%.17g\n", t, v);
                os << buf;
            }
        });
    }
}

}  // namespace detail

/**
 * Dispatch a validated config. Every artifact directory carries a manifest
 * (full config, digest, code version, seed, wall time). Exit status: 0 ok,
 * 1 validation failure, 2 runtime failure (with a FAILED marker next to any
 * partial outputs).
 */
inline int run(const ExperimentConfig& cfg) {
    namespace fs = std::filesystem;
    const std::string digest = config_digest(cfg.raw);
    RunContext ctx;
    ctx.dir = fs::path(cfg.output_dir) /
              (std::string(command_name(cfg.command)) + "-" + digest.substr(0, 12));
    const auto t0 = std::chrono::steady_clock::now();
    try {
        fs::create_directories(ctx.dir);
        switch (cfg.command) {
            case Command::simulate: detail::run_simulate(cfg, ctx); break;
            case Command::paired: detail::run_paired(cfg, ctx); break;
            case Command::sweep: detail::run_sweep(cfg, ctx); break;
            case Command::verify_kernels: detail::run_verify_kernels(cfg, ctx); break;
            case Command::verify_yw: detail::run_verify_yw(cfg, ctx); break;
            case Command::analyze: detail::run_analyze(cfg, ctx); break;
        }
    } catch (const ConfigError&) {
        std::ofstream(ctx.dir / "FAILED") << "validation failure\n";
        throw;
    } catch (const std::exception& e) {
        std::ofstream(ctx.dir / "FAILED") << e.what() << "\n";
        json manifest;
        manifest["command"] = command_name(cfg.command);
        manifest["config"] = cfg.raw;
        manifest["config_digest"] = digest;
        manifest["code_version"] = kCodeVersion;
        manifest["master_seed"] = cfg.master_seed;
        manifest["error"] = e.what();
        std::ofstream(ctx.dir / "manifest.json") << manifest.dump(2) << "\n";
        return 2;
    }
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    json manifest;
    manifest["command"] = command_name(cfg.command);
    manifest["config"] = cfg.raw;
    manifest["config_digest"] = digest;
    manifest["code_version"] = kCodeVersion;
    manifest["master_seed"] = cfg.master_seed;
    manifest["wall_time_s"] = wall;
    manifest["artifacts"] = ctx.artifacts;
    if (cfg.command == Command::sweep)
        manifest["disclaimer"] =
            "exploratory diagnostic of discretized paired trajectories; no claim about "
            "pathwise uniqueness of the continuum equation is made";
    std::ofstream(ctx.dir / "manifest.json") << manifest.dump(2) << "\n";
    return 0;
}

}  // namespace spdelab::cli
