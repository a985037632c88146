#include "circadian/config.hpp"
#include "circadian/mfg.hpp"
#include "circadian/oracle_check.hpp"
#include "circadian/persistence.hpp"
#include "circadian/recovery.hpp"
#include "circadian/sweep.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <filesystem>

namespace fs = std::filesystem;
using namespace circadian;

namespace {

enum Exit { kOk = 0, kOther = 1, kNotConverged = 2, kInvalid = 3, kConfig = 4 };

int exit_for(Outcome o) {
    switch (o) {
        case Outcome::Converged: return kOk;
        case Outcome::NotConverged: return kNotConverged;
        case Outcome::InvalidSolution: return kInvalid;
    }
    return kOther;
}

struct Common {
    std::string config;
    std::vector<std::string> overrides;
};

RunConfig resolve(const Common& c) {
    RunConfig cfg = c.config.empty() ? RunConfig{} : load_config(c.config);
    for (const auto& kv : c.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError(fmt::format("--set expects key=value, got '{}'", kv));
        auto key = kv.substr(0, eq);
        key.erase(key.find_last_not_of(' ') + 1);
        set_config_value(cfg, key, kv.substr(eq + 1));
    }
    cfg.validate();
    return cfg;
}

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config, "key = value configuration file")->check(CLI::ExistingFile);
    cmd->add_option("--set", c.overrides, "override a config key, e.g. --set K=0.02")->take_all();
}

std::string summary(const ErgodicSolution& s) {
    return fmt::format("outcome={} reason={} method={} scheme={} n={} iterations={} lambda={:.10e} psi={:.3e} "
                       "min_mu={:.3e} max_beta={:.4f}",
                       to_string(s.outcome.kind), to_string(s.outcome.reason), to_string(s.method),
                       to_string(s.scheme), s.grid.size(), s.iterations, s.lambda,
                       phase_offset(s.mu, s.grid, s.params.p), s.mu.min(), s.beta.max_abs());
}

ErgodicSolution solve_home(const RunConfig& cfg) {
    ErgodicOptions o{cfg.method, cfg.scheme, cfg.eps, cfg.max_iter};
    return solve_ergodic(cfg.grid(), cfg.home(), o);
}

int cmd_ergodic(const Common& c, std::string out) {
    const RunConfig cfg = resolve(c);
    const ErgodicSolution s = solve_home(cfg);
    const fs::path file = out.empty() ? fs::path(cfg.out_dir) / "solution.json" : fs::path(out);
    save_solution(file, s, cfg);
    fmt::print("{}\nsolution written to {}\n", summary(s), file.string());
    return exit_for(s.outcome.kind);
}

int cmd_recover(const Common& c, const std::string& mode_text, const std::string& solution_path) {
    const RunConfig cfg = resolve(c);
    const RecoveryMode mode = parse_mode(mode_text);
    ErgodicSolution erg = [&] {
        if (solution_path.empty()) {
            fmt::print("no --solution given; solving the ergodic problem first\n");
            return solve_home(cfg);
        }
        StoredSolution stored = load_solution(solution_path);
        if (stored.solution.grid.size() != cfg.n) {
            throw ConfigError(fmt::format("solution has n={}, config has n={}", stored.solution.grid.size(), cfg.n));
        }
        if (stored.fingerprint != solver_fingerprint(cfg) || stored.fingerprint != solver_fingerprint(stored.config)) {
            throw ConfigError("solution file is stale: model or solver settings differ from the config");
        }
        return std::move(stored.solution);
    }();
    fmt::print("ergodic: {}\n", summary(erg));
    if (erg.outcome.kind != Outcome::Converged) return exit_for(erg.outcome.kind);

    const double p = cfg.destination();
    const RecoveryThresholds th{cfg.eps_w, cfg.eps_z, 240.0};
    const std::string stem = fmt::format("{}_p{:+d}", to_string(mode), cfg.p_hours);
    const fs::path dir(cfg.out_dir);
    RecoveryReport rep;
    std::vector<std::pair<std::string, std::string>> extra;
    int status = kOk;
    if (mode == RecoveryMode::Ergodic) {
        RecoveryOptions o;
        o.horizon_hours = cfg.horizon_days * 24.0;
        o.sample_hours = cfg.subsample_hours;
        const DensityPath path = run_recovery(erg, p, o);
        rep = report_recovery(path, erg, th);
        write_text(dir / (stem + "_path.csv"), path_csv(path.samples.times, path.samples.densities));
        extra = {{"dt_hours", fmt::format("{:.17g}", path.dt)}, {"mass_drift", fmt::format("{:.3e}", path.mass_drift)}};
    } else {
        MfgOptions o;
        o.T_hours = cfg.T_days * 24.0;
        o.eps = cfg.eps;
        if (cfg.max_iter) o.max_iter = *cfg.max_iter;
        o.sample_hours = cfg.subsample_hours;
        o.progress = [](const MfgProgress& pr) {
            fmt::print(stderr, "iteration {:4d}  max density change {:.3e}  max control change {:.3e}\n",
                       pr.iteration, pr.density_change, pr.control_change);
        };
        const MfgPath path = solve_recovery_mfg(erg, p, o);
        const SampledPath samples = path.sampled(cfg.subsample_hours);
        rep = recovery_report(samples, erg.mu.values(), path.params, path.grid, th);
        write_text(dir / (stem + "_path.csv"), path_csv(samples.times, samples.densities));
        write_text(dir / (stem + "_controls.csv"), path_csv(samples.times, samples.controls));
        extra = {{"dt_hours", fmt::format("{:.17g}", path.dt)},
                 {"iterations", std::to_string(path.iterations)},
                 {"converged", path.converged ? "true" : "false"},
                 {"T_hours", fmt::format("{:.17g}", path.T)}};
        if (!path.converged) status = kNotConverged;
    }
    write_text(dir / (stem + "_z.csv"), z_path_csv(rep));
    write_text(dir / (stem + "_costs.csv"), cost_trace_csv(rep));
    write_text(dir / (stem + "_report.json"), report_json(rep, to_string(mode), cfg, extra));
    auto days = [](const std::optional<double>& t) { return t ? fmt::format("{:.2f} d", *t / 24.0) : "none"; };
    fmt::print("p_hours={} tau_w={} tau_z={} f_alpha={:.6f} f_osc={:.6f} f_sun={:.6f} f={:.6f}\n", cfg.p_hours,
               days(rep.tau_w), days(rep.tau_z), rep.f_alpha, rep.f_osc, rep.f_sun, rep.f_total);
    fmt::print("outputs in {} ({}_*)\n", dir.string(), stem);
    return status;
}

std::vector<double> parse_values(const std::string& text) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const auto item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        try {
            out.push_back(parse_config_number(item));
        } catch (const ConfigError& e) {
            throw ConfigError(fmt::format("--values: {}", e.what()));
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

int cmd_sweep(const Common& c, const std::string& param, const std::string& values, const std::string& mode,
              unsigned workers) {
    SweepSpec spec{param, parse_values(values), resolve(c), parse_mode(mode), workers};
    const auto rows = run_sweep(spec);
    const fs::path file = fs::path(spec.base.out_dir) / fmt::format("sweep_{}_{}.csv", param, mode);
    write_text(file, sweep_csv(rows));
    fmt::print("{}", sweep_csv(rows));
    fmt::print("sweep written to {}\n", file.string());
    return kOk;
}

int cmd_oracle_check(const Common& c) {
    const auto rep = oracle_check(resolve(c));
    fmt::print("{}", rep.render());
    fmt::print("{}\n", rep.all_pass() ? "all checks passed" : "some checks failed");
    return rep.all_pass() ? kOk : kOther;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mean-field-game model of circadian jet-lag recovery"};
    app.require_subcommand(1);

    Common common;
    std::string out, mode = "ergodic", solution, param, values;
    unsigned workers = 0;

    auto* erg = app.add_subcommand("ergodic", "solve the stationary problem at the home zone");
    add_common(erg, common);
    erg->add_option("--out", out, "solution file (default <out_dir>/solution.json)");

    auto* rec = app.add_subcommand("recover", "simulate recovery after travelling p_hours zones");
    add_common(rec, common);
    rec->add_option("--mode", mode, "ergodic|mfg")->check(CLI::IsMember({"ergodic", "mfg"}));
    rec->add_option("--solution", solution, "ergodic solution file")->check(CLI::ExistingFile);

    auto* sw = app.add_subcommand("sweep", "vary one parameter, east and west trips");
    add_common(sw, common);
    sw->add_option("--sweep-param", param, "p|omega_0|sigma|K|F")->required();
    sw->add_option("--values", values, "comma-separated values (p in whole zones)")->required();
    sw->add_option("--mode", mode, "ergodic|mfg")->check(CLI::IsMember({"ergodic", "mfg"}));
    sw->add_option("--workers", workers, "worker threads (0: all cores)");

    auto* oc = app.add_subcommand("oracle-check", "compare the solver with the analytic special cases");
    add_common(oc, common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    try {
        if (*erg) return cmd_ergodic(common, out);
        if (*rec) return cmd_recover(common, mode, solution);
        if (*sw) return cmd_sweep(common, param, values, mode, workers);
        if (*oc) return cmd_oracle_check(common);
    } catch (const ConfigError& e) {
        fmt::print(stderr, "config error: {}\n", e.what());
        return kConfig;
    } catch (const SolverError& e) {
        fmt::print(stderr, "solver error at iteration {}: {}\n", e.iteration(), e.what());
        return kOther;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kOther;
    }
    return kOther;
}
