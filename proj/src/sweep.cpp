#include "circadian/sweep.hpp"

#include "circadian/mfg.hpp"
#include "circadian/recovery.hpp"

#include <algorithm>
#include <atomic>
#include <fmt/format.h>
#include <limits>
#include <map>
#include <thread>

namespace circadian {

std::string_view to_string(RecoveryMode m) noexcept { return m == RecoveryMode::Mfg ? "mfg" : "ergodic"; }

RecoveryMode parse_mode(std::string_view text) {
    if (text == "ergodic") return RecoveryMode::Ergodic;
    if (text == "mfg") return RecoveryMode::Mfg;
    throw ConfigError(fmt::format("unknown mode '{}' (expected ergodic|mfg)", text));
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Task {
    double value;
    int p_hours;
    std::string direction;
};

std::string direction_of(int hours) { return hours > 0 ? "east" : hours < 0 ? "west" : "home"; }

RunConfig config_for(const SweepSpec& spec, double value) {
    RunConfig cfg = spec.base;
    if (spec.param == "omega_0") cfg.omega_0 = value;
    else if (spec.param == "sigma") cfg.sigma = value;
    else if (spec.param == "K") cfg.K = value;
    else if (spec.param == "F") cfg.F = value;
    return cfg;
}

void fill_failure(SweepRow& row, std::string outcome, std::string error) {
    row.outcome = std::move(outcome);
    row.error = std::move(error);
    row.f_alpha = row.f_osc = row.f_sun = row.f_total = kNaN;
}

void evaluate(SweepRow& row, const ErgodicSolution& ergodic, const RunConfig& cfg, RecoveryMode mode) {
    const RecoveryThresholds th{cfg.eps_w, cfg.eps_z, 240.0};
    const double p = time_zone_angle(row.p_hours, cfg.omega_S);
    RecoveryReport rep;
    if (mode == RecoveryMode::Ergodic) {
        RecoveryOptions o;
        o.horizon_hours = cfg.horizon_days * 24.0;
        o.sample_hours = cfg.subsample_hours;
        rep = report_recovery(run_recovery(ergodic, p, o), ergodic, th);
        row.outcome = "converged";
    } else {
        MfgOptions o;
        o.T_hours = cfg.T_days * 24.0;
        o.eps = cfg.eps;
        if (cfg.max_iter) o.max_iter = *cfg.max_iter;
        o.sample_hours = cfg.subsample_hours;
        const MfgPath path = solve_recovery_mfg(ergodic, p, o);
        rep = report_recovery(path, ergodic, th, cfg.subsample_hours);
        row.outcome = path.converged ? "converged" : "mfg_not_converged";
    }
    row.tau_w_hours = rep.tau_w;
    row.tau_z_hours = rep.tau_z;
    row.f_alpha = rep.f_alpha;
    row.f_osc = rep.f_osc;
    row.f_sun = rep.f_sun;
    row.f_total = rep.f_total;
}

/// Runs fn(i) for i in [0, count) on `workers` threads.
template <class Fn>
void parallel_for(std::size_t count, unsigned workers, Fn fn) {
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(count, 1)));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < count; i = next++) fn(i);
    };
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
}

}  // namespace

void validate_sweep(const SweepSpec& spec) {
    static const std::vector<std::string> names{"p", "omega_0", "sigma", "K", "F"};
    if (std::find(names.begin(), names.end(), spec.param) == names.end()) {
        throw ConfigError(fmt::format("cannot sweep '{}' (expected p, omega_0, sigma, K or F)", spec.param));
    }
    if (spec.values.empty()) throw ConfigError("sweep needs at least one value");
    for (double v : spec.values) {
        if (!std::isfinite(v)) throw ConfigError("sweep values must be finite");
        if (spec.param == "p" && v != std::round(v)) {
            throw ConfigError(fmt::format("p is swept in whole zones, got {}", v));
        }
        RunConfig cfg = config_for(spec, v);
        cfg.validate();
    }
    spec.base.validate();
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
    validate_sweep(spec);
    std::vector<Task> tasks;
    for (double v : spec.values) {
        if (spec.param == "p") {
            const int h = static_cast<int>(v);
            tasks.push_back({v, h, direction_of(h)});
        } else {
            const int h = std::abs(spec.base.p_hours);
            tasks.push_back({v, h, "east"});
            tasks.push_back({v, -h, "west"});
        }
    }
    std::sort(tasks.begin(), tasks.end(), [](const Task& a, const Task& b) {
        return a.value != b.value ? a.value < b.value : a.p_hours > b.p_hours;
    });

    // Ergodic solutions depend on the swept value only (never on p).
    std::map<double, std::size_t> index;
    std::vector<double> model_values;
    for (const auto& t : tasks) {
        const double key = spec.param == "p" ? 0.0 : t.value;
        if (index.emplace(key, model_values.size()).second) model_values.push_back(key);
    }
    std::vector<std::optional<ErgodicSolution>> solutions(model_values.size());
    std::vector<std::string> solve_errors(model_values.size());
    parallel_for(model_values.size(), spec.workers, [&](std::size_t i) {
        const RunConfig cfg = spec.param == "p" ? spec.base : config_for(spec, model_values[i]);
        try {
            ErgodicOptions o{cfg.method, cfg.scheme, cfg.eps, cfg.max_iter};
            solutions[i] = solve_ergodic(cfg.grid(), cfg.home(), o);
        } catch (const std::exception& e) {
            solve_errors[i] = e.what();
        }
    });

    std::vector<SweepRow> rows(tasks.size());
    parallel_for(tasks.size(), spec.workers, [&](std::size_t i) {
        const Task& t = tasks[i];
        SweepRow& row = rows[i];
        row.param = spec.param;
        row.value = t.value;
        row.direction = t.direction;
        row.p_hours = t.p_hours;
        const std::size_t s = index.at(spec.param == "p" ? 0.0 : t.value);
        if (!solutions[s]) {
            fill_failure(row, "error", solve_errors[s]);
            return;
        }
        const ErgodicSolution& erg = *solutions[s];
        if (erg.outcome.kind != Outcome::Converged) {
            fill_failure(row, std::string(to_string(erg.outcome.kind)), "");
            return;
        }
        RunConfig cfg = spec.param == "p" ? spec.base : config_for(spec, t.value);
        cfg.p_hours = t.p_hours;
        try {
            evaluate(row, erg, cfg, spec.mode);
        } catch (const std::exception& e) {
            fill_failure(row, "error", e.what());
        }
    });
    return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    auto num = [](double v) { return std::isnan(v) ? std::string("nan") : fmt::format("{:.17g}", v); };
    auto tau = [&](const SweepRow& r, const std::optional<double>& t) {
        if (r.outcome != "converged" && r.outcome != "mfg_not_converged") return std::string("nan");
        return t ? num(*t) : std::string("inf");
    };
    std::string out = "param,value,direction,p_hours,outcome,tau_w_hours,tau_z_hours,f_alpha_costhours,"
                      "f_osc_costhours,f_sun_costhours,f_total_costhours,error\n";
    for (const auto& r : rows) {
        std::string err = r.error;
        std::replace(err.begin(), err.end(), ',', ';');
        std::replace(err.begin(), err.end(), '\n', ' ');
        out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", r.param, num(r.value), r.direction, r.p_hours,
                           r.outcome, tau(r, r.tau_w_hours), tau(r, r.tau_z_hours), num(r.f_alpha), num(r.f_osc),
                           num(r.f_sun), num(r.f_total), err);
    }
    return out;
}

}  // namespace circadian
