#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "spdelab/coefficients.hpp"
#include "spdelab/grid.hpp"
#include "spdelab/noise.hpp"
#include "spdelab/solver.hpp"
#include "spdelab/yw.hpp"

namespace spdelab::cli {

using nlohmann::json;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Command { simulate, paired, sweep, verify_kernels, verify_yw, analyze };

inline Command parse_command(const std::string& s) {
    if (s == "simulate") return Command::simulate;
    if (s == "paired") return Command::paired;
    if (s == "sweep") return Command::sweep;
    if (s == "verify_kernels") return Command::verify_kernels;
    if (s == "verify_yw") return Command::verify_yw;
    if (s == "analyze") return Command::analyze;
    throw ConfigError(".command: unknown command '" + s + "'");
}

inline const char* command_name(Command c) {
    switch (c) {
        case Command::simulate: return "simulate";
        case Command::paired: return "paired";
        case Command::sweep: return "sweep";
        case Command::verify_kernels: return "verify_kernels";
        case Command::verify_yw: return "verify_yw";
        case Command::analyze: return "analyze";
    }
    return "?";
}

/** Parsed and validated experiment description. */
struct ExperimentConfig {
    Command command = Command::simulate;
    std::string output_dir = "out";
    std::uint64_t master_seed = 1;
    std::size_t jobs = 1;
    json raw;  // canonical source of truth, reproduced in the manifest

    // grid/noise/coefficient/solve sections (populated when present)
    TorusGrid grid;
    noise::NoiseSpec noise_spec;
    CoefficientSpec coeff;
    double T_end = 0.25;
    double dt = 1e-4;
    std::string ic_name = "zero";
    double ic_amplitude = 1.0;
    double ic_width = 0.05;
    std::size_t history_depth = 64;
    std::size_t snapshot_every = 0;
    std::optional<double> truncation_K;

    // sweep section
    std::vector<double> sweep_alphas, sweep_gammas;
    std::size_t sweep_replicas = 10;
    double sweep_perturbation = 1e-12;
    double sweep_threshold = 1e-6;

    // paired section
    double paired_perturbation = 1e-12;

    // verify_yw section
    std::int64_t yw_n_min = 1, yw_n_max = 6;
    std::size_t yw_quad_resolution = 4096;

    // analyze section
    std::vector<double> analyze_lags;
    std::optional<std::string> analyze_input;  // snapshot binary; else simulate first
    std::optional<std::int64_t> bins_n;
    double bins_eps1 = 0.0, bins_eps0 = 0.0, bins_K0 = 0.0;
    std::optional<std::int64_t> in_monitor_n;
    double in_monitor_m_psi = 8.0;  // Psi = test bump rescaled to cover the central quarter

    SolveConfig make_solve_config() const {
        SolveConfig cfg;
        cfg.grid = grid;
        cfg.noise = noise_spec;
        cfg.noise.seed = master_seed;
        cfg.coeff = coeff;
        cfg.T_end = T_end;
        cfg.dt = dt;
        cfg.history_depth = history_depth;
        cfg.snapshot_every = snapshot_every;
        cfg.truncation_K = truncation_K;
        cfg.ic = make_ic();
        return cfg;
    }

    Field make_ic() const {
        Field f(grid);
        if (ic_name == "zero") return f;
        if (ic_name == "constant") {
            for (auto& v : f.values) v = ic_amplitude;
            return f;
        }
        if (ic_name == "sine") {
            // zero-mean profile with a zero set, ic_width = mode count per axis
            const double k = 2.0 * M_PI * std::max(1.0, std::round(ic_width)) / grid.L;
            for (std::size_t j = 0; j < f.size(); ++j) {
                const double x0 = grid.coord(grid.q == 1 ? j : j / grid.N);
                const double x1 = grid.q == 2 ? grid.coord(j % grid.N) : 0.0;
                f[j] = ic_amplitude * std::sin(k * x0) * (grid.q == 2 ? std::cos(k * x1) : 1.0);
            }
            return f;
        }
        if (ic_name == "gaussian_bump") {
            // periodized Gaussian centered at L/2 with variance ic_width^2
            const double s2 = ic_width * ic_width;
            for (std::size_t j = 0; j < f.size(); ++j) {
                const double d0 = grid.wrap(grid.coord(grid.q == 1 ? j : j / grid.N) - 0.5 * grid.L);
                const double d1 =
                    grid.q == 2 ? grid.wrap(grid.coord(j % grid.N) - 0.5 * grid.L) : 0.0;
                double acc = 0.0;
                for (int w0 = -3; w0 <= 3; ++w0)
                    for (int w1 = -3; w1 <= (grid.q == 2 ? 3 : -3); ++w1) {
                        const double dd0 = d0 + grid.L * w0;
                        const double dd1 = grid.q == 2 ? d1 + grid.L * w1 : 0.0;
                        acc += std::exp(-(dd0 * dd0 + dd1 * dd1) / (2.0 * s2));
                    }
                f[j] = ic_amplitude * acc;
            }
            return f;
        }
        throw ConfigError(".solve.ic: unknown profile '" + ic_name + "'");
    }
};

namespace detail {

template <typename T>
T require(const json& j, const std::string& path, const std::string& key) {
    if (!j.contains(key)) throw ConfigError(path + "." + key + ": missing required key");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(path + "." + key + ": " + e.what());
    }
}

template <typename T>
T get_or(const json& j, const std::string& path, const std::string& key, T def) {
    if (!j.contains(key)) return def;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(path + "." + key + ": " + e.what());
    }
}

}  // namespace detail

inline ExperimentConfig parse_config_json(const json& j) {
    ExperimentConfig c;
    c.raw = j;
    c.command = parse_command(detail::require<std::string>(j, "", "command"));
    c.output_dir = detail::get_or<std::string>(j, "", "output_dir", "out");
    c.master_seed = detail::get_or<std::uint64_t>(j, "", "master_seed", 1);
    c.jobs = detail::get_or<std::size_t>(j, "", "jobs", 1);

    if (j.contains("grid")) {
        const auto& gj = j.at("grid");
        const int q = detail::require<int>(gj, ".grid", "q");
        const double L = detail::require<double>(gj, ".grid", "L");
        const auto N = detail::require<std::size_t>(gj, ".grid", "N");
        try {
            c.grid = make_grid(q, L, N);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string(".grid: ") + e.what());
        }
    }
    if (j.contains("noise")) {
        const auto& nj = j.at("noise");
        c.noise_spec.alpha = detail::require<double>(nj, ".noise", "alpha");
        try {
            noise::validate_alpha(c.noise_spec.alpha, c.grid.q);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string(".noise.alpha: ") + e.what());
        }
        const auto pol = detail::get_or<std::string>(nj, ".noise", "zero_mode_policy",
                                                     "clamp_to_first_mode");
        if (pol == "clamp_to_first_mode")
            c.noise_spec.zero_mode_policy = noise::ZeroModePolicy::clamp_to_first_mode;
        else if (pol == "zero")
            c.noise_spec.zero_mode_policy = noise::ZeroModePolicy::zero;
        else
            throw ConfigError(".noise.zero_mode_policy: must be 'clamp_to_first_mode' or 'zero'");
        c.noise_spec.include_constant_part =
            detail::get_or<bool>(nj, ".noise", "include_constant_part", false);
        c.noise_spec.stream_id = detail::get_or<std::uint64_t>(nj, ".noise", "stream_id", 0);
    }
    if (j.contains("coefficient")) {
        const auto& cj = j.at("coefficient");
        const auto sig = detail::get_or<std::string>(cj, ".coefficient", "sigma", "power_abs");
        const double gamma = detail::get_or<double>(cj, ".coefficient", "gamma", 0.75);
        if (sig == "power_abs") {
            if (!(gamma > 0.0 && gamma <= 1.0))
                throw ConfigError(".coefficient.gamma: gamma must lie in (0,1]");
            c.coeff = CoefficientSpec::power_abs(gamma);
        } else if (sig == "linear") {
            c.coeff = CoefficientSpec::linear();
        } else if (sig == "constant") {
            c.coeff = CoefficientSpec::additive();
        } else if (sig == "sqrt_pos") {
            c.coeff.sigma_tag = CoefficientSpec::Sigma::sqrt_pos;
            c.coeff.gamma_meta = 0.5;
        } else if (sig == "none") {
            c.coeff = CoefficientSpec::none();
        } else {
            throw ConfigError(".coefficient.sigma: unknown builtin '" + sig + "'");
        }
        c.coeff.growth_c = detail::get_or<double>(cj, ".coefficient", "growth_c", 1.0);
        const auto drift = detail::get_or<std::string>(cj, ".coefficient", "drift", "zero");
        if (drift == "zero")
            c.coeff.drift_tag = CoefficientSpec::Drift::zero;
        else if (drift == "constant")
            c.coeff.drift_tag = CoefficientSpec::Drift::constant;
        else if (drift == "linear")
            c.coeff.drift_tag = CoefficientSpec::Drift::linear;
        else
            throw ConfigError(".coefficient.drift: unknown builtin '" + drift + "'");
        c.coeff.b_coeff = detail::get_or<double>(cj, ".coefficient", "b_coeff", 0.0);
    }
    if (j.contains("solve")) {
        const auto& sj = j.at("solve");
        c.T_end = detail::require<double>(sj, ".solve", "T_end");
        c.dt = detail::require<double>(sj, ".solve", "dt");
        if (!(c.dt > 0.0)) throw ConfigError(".solve.dt: must be positive");
        if (!(c.T_end >= 0.0)) throw ConfigError(".solve.T_end: must be >= 0");
        c.ic_name = detail::get_or<std::string>(sj, ".solve", "ic", "zero");
        c.ic_amplitude = detail::get_or<double>(sj, ".solve", "ic_amplitude", 1.0);
        c.ic_width = detail::get_or<double>(sj, ".solve", "ic_width", 0.05);
        c.history_depth = detail::get_or<std::size_t>(sj, ".solve", "history_depth", 64);
        c.snapshot_every = detail::get_or<std::size_t>(sj, ".solve", "snapshot_every", 0);
        if (sj.contains("truncation_K") && !sj.at("truncation_K").is_null())
            c.truncation_K = detail::require<double>(sj, ".solve", "truncation_K");
    }
    if (j.contains("sweep")) {
        const auto& sj = j.at("sweep");
        c.sweep_alphas = detail::require<std::vector<double>>(sj, ".sweep", "alphas");
        c.sweep_gammas = detail::require<std::vector<double>>(sj, ".sweep", "gammas");
        for (double a : c.sweep_alphas) {
            try {
                noise::validate_alpha(a, c.grid.q);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(std::string(".sweep.alphas: ") + e.what());
            }
        }
        for (double gmm : c.sweep_gammas)
            if (!(gmm > 0.0 && gmm <= 1.0))
                throw ConfigError(".sweep.gammas: gamma must lie in (0,1]");
        c.sweep_replicas = detail::get_or<std::size_t>(sj, ".sweep", "replicas", 10);
        c.sweep_perturbation = detail::get_or<double>(sj, ".sweep", "perturbation", 1e-12);
        c.sweep_threshold = detail::get_or<double>(sj, ".sweep", "threshold", 1e-6);
    }
    if (j.contains("paired")) {
        c.paired_perturbation =
            detail::get_or<double>(j.at("paired"), ".paired", "perturbation", 1e-12);
    }
    if (j.contains("verify_yw")) {
        const auto& vj = j.at("verify_yw");
        c.yw_n_min = detail::get_or<std::int64_t>(vj, ".verify_yw", "n_min", 1);
        c.yw_n_max = detail::get_or<std::int64_t>(vj, ".verify_yw", "n_max", 6);
        c.yw_quad_resolution =
            detail::get_or<std::size_t>(vj, ".verify_yw", "quad_resolution", 4096);
        if (c.yw_n_min < 1 || c.yw_n_max < c.yw_n_min)
            throw ConfigError(".verify_yw: need 1 <= n_min <= n_max");
    }
    if (j.contains("analyze")) {
        const auto& aj = j.at("analyze");
        c.analyze_lags = detail::get_or<std::vector<double>>(aj, ".analyze", "lags", {});
        if (aj.contains("input")) {
            c.analyze_input = detail::require<std::string>(aj, ".analyze", "input");
            if (!std::filesystem::exists(*c.analyze_input))
                throw ConfigError(".analyze.input: referenced file does not exist: " +
                                  *c.analyze_input);
        }
        if (aj.contains("in_monitor")) {
            const auto& mj = aj.at("in_monitor");
            c.in_monitor_n = detail::require<std::int64_t>(mj, ".analyze.in_monitor", "n");
            c.in_monitor_m_psi =
                detail::get_or<double>(mj, ".analyze.in_monitor", "psi_scale", 8.0 / c.grid.L);
        }
        if (aj.contains("bins")) {
            const auto& bj = aj.at("bins");
            c.bins_n = detail::require<std::int64_t>(bj, ".analyze.bins", "n");
            c.bins_eps1 = detail::require<double>(bj, ".analyze.bins", "eps1");
            c.bins_eps0 = detail::require<double>(bj, ".analyze.bins", "eps0");
            c.bins_K0 = detail::get_or<double>(bj, ".analyze.bins", "K0", 0.5 * c.grid.L);
            // surfaces the eps-grid admissibility inequalities with key context
            try {
                (void)yw::eps_grid(c.coeff.gamma_meta, c.noise_spec.alpha, c.bins_eps1,
                                   c.bins_eps0);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(std::string(".analyze.bins: ") + e.what());
            }
        }
    }
    return c;
}

/** Load, parse and validate; parse errors carry the line number. */
inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config file not readable: " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("parse error in " + path + ": " + e.what());
    }
    return parse_config_json(j);
}

}  // namespace spdelab::cli
