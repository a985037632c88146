#include "circadian/recovery.hpp"

#include <algorithm>
#include <fmt/format.h>

namespace circadian {

namespace {

double sample_time(long step, double dt) { return std::round(static_cast<double>(step) * dt * 1e9) / 1e9; }

long steps_per_sample(double dt, double sample_hours) {
    const double k = sample_hours / dt;
    const double nearest = std::round(k);
    if (nearest < 1.0 || std::abs(k - nearest) > 1e-9 * nearest) {
        throw std::invalid_argument(fmt::format("time step {} does not divide the sampling interval {}", dt,
                                                sample_hours));
    }
    return static_cast<long>(nearest);
}

}  // namespace

double aligned_dt(const PeriodicGrid& grid, const ModelParams& params, double bound, double sample_hours) {
    if (!(sample_hours > 0.0)) throw std::invalid_argument("sampling interval must be positive");
    const double limit = cfl_dt(grid, params, bound);
    return sample_hours / std::ceil(sample_hours / limit - 1e-12);
}

DensityPath propagate_density(const PeriodicGrid& grid, const ModelParams& params, std::span<const double> M0,
                              const ControlField& beta, Scheme scheme, double dt, long steps, long sample_every) {
    const int n = grid.size();
    if (M0.size() != static_cast<std::size_t>(n)) throw std::invalid_argument("initial density length mismatch");
    if (!(dt > 0.0) || steps < 0 || sample_every < 1) throw std::invalid_argument("bad stepping parameters");
    const double h = grid.step();
    const auto L = build_transport_operator(grid, params, beta.values(), scheme);

    DensityPath path{grid, dt, steps, params.p, beta, scheme, {}, 0.0, 0.0};
    std::vector<double> M(M0.begin(), M0.end()), LtM(n);
    path.min_value = *std::min_element(M.begin(), M.end());
    path.samples.times.push_back(0.0);
    path.samples.densities.push_row(M);
    path.samples.controls.push_row(beta.values());
    for (long i = 1; i <= steps; ++i) {
        L.apply_transpose(M, LtM);
        double mass = 0.0, low = M[0];
        for (int j = 0; j < n; ++j) {
            M[j] += dt * LtM[j];
            mass += M[j];
            low = std::min(low, M[j]);
        }
        path.mass_drift = std::max(path.mass_drift, std::abs(mass * h - 1.0));
        path.min_value = std::min(path.min_value, low);
        if (i % sample_every == 0) {
            path.samples.times.push_back(sample_time(i, dt));
            path.samples.densities.push_row(M);
            path.samples.controls.push_row(beta.values());
        }
    }
    return path;
}

DensityPath run_recovery(const ErgodicSolution& ergodic, double p, const RecoveryOptions& opts) {
    if (ergodic.outcome.kind != Outcome::Converged) {
        throw std::invalid_argument(fmt::format("recovery needs a converged ergodic solution (outcome {})",
                                                to_string(ergodic.outcome.kind)));
    }
    if (!(opts.horizon_hours > 0.0)) throw std::invalid_argument("recovery horizon must be positive");
    const PeriodicGrid& grid = ergodic.grid;
    ModelParams params = ergodic.params;
    params.p = wrap_angle(p);
    const int r = rotation_steps(grid, params.p);
    ControlField beta_p(rotate_field(ergodic.beta.values(), r));

    const double limit = cfl_dt(grid, params, beta_p.max_abs());
    double dt = aligned_dt(grid, params, beta_p.max_abs(), opts.sample_hours);
    if (opts.dt) {
        if (*opts.dt > limit * (1.0 + 1e-12)) {
            throw std::invalid_argument(fmt::format("time step {} violates the CFL limit {}", *opts.dt, limit));
        }
        dt = *opts.dt;
    }
    const long every = steps_per_sample(dt, opts.sample_hours);
    const long steps = static_cast<long>(std::ceil(opts.horizon_hours / dt - 1e-9));
    return propagate_density(grid, params, ergodic.mu.values(), beta_p, opts.scheme.value_or(ergodic.scheme), dt,
                             steps, every);
}

RecoveryReport report_recovery(const DensityPath& path, const ErgodicSolution& ergodic,
                               const RecoveryThresholds& thresholds) {
    ModelParams params = ergodic.params;
    params.p = path.p;
    return recovery_report(path.samples, ergodic.mu.values(), params, path.grid, thresholds);
}

}  // namespace circadian
