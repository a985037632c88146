#include "circadian/mfg.hpp"

#include "circadian/recovery.hpp"

#include <algorithm>
#include <fmt/format.h>

namespace circadian {

namespace {

struct SweepResult {
    double density_change = 0.0;
    double control_change = 0.0;
    bool bound_violated = false;
    bool finite = true;
};

double slice_l2(std::span<const double> a, std::span<const double> b, double scale) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double d = (a[j] - b[j]) * scale;
        s += d * d;
    }
    return std::sqrt(s);
}

/// One fixed-point update in place: backward HJB with the stored iterate, new
/// controls, forward Fokker-Planck from μ*.
class Sweeper {
public:
    Sweeper(const PeriodicGrid& grid, const ModelParams& params, Scheme scheme, double dt, double bound)
        : grid_(grid), params_(params), scheme_(scheme), dt_(dt), bound_(bound), kernel_(grid),
          sun_(sun_cost(grid, params.p)),
          L_(build_transport_operator(grid, params, std::vector<double>(grid.size(), 0.0), scheme)) {}

    SweepResult run(SliceMatrix& M, SliceMatrix& U, SliceMatrix& B, std::span<const double> mu_star,
                    double relaxation) {
        const int n = grid_.size();
        const std::size_t m = M.rows() - 1;
        std::vector<double> cost(n), LU(n), beta_new(n), raw(mu_star.begin(), mu_star.end()), raw_next(n);
        SweepResult out;

        auto refresh_control = [&](std::size_t i) {
            extract_control(U.row(i), grid_, params_, scheme_, beta_new);
            auto row = B.row(i);
            out.control_change = std::max(out.control_change, slice_l2(row, beta_new, 1.0));
            for (int j = 0; j < n; ++j) {
                if (!(std::abs(beta_new[j]) <= bound_)) {
                    out.bound_violated = out.bound_violated || std::isfinite(beta_new[j]);
                    out.finite = out.finite && std::isfinite(beta_new[j]);
                }
                row[j] = beta_new[j];
            }
        };

        std::fill(U.row(m).begin(), U.row(m).end(), 0.0);
        for (std::size_t i = m; i-- > 0;) {
            const auto b = B.row(i + 1);
            rebuild_transport_operator(grid_, params_, b, scheme_, L_);
            kernel_.apply(M.row(i + 1), cost);
            L_.apply(U.row(i + 1), LU);
            auto next = U.row(i + 1);
            auto cur = U.row(i);
            for (int j = 0; j < n; ++j) {
                cur[j] = next[j] + dt_ * (LU[j] + 0.5 * b[j] * b[j] + params_.K * cost[j] + params_.F * sun_[j]);
            }
            refresh_control(i + 1);
            if (out.bound_violated || !out.finite) return out;
        }
        refresh_control(0);
        if (out.bound_violated || !out.finite) return out;

        const double h = grid_.step();
        for (std::size_t i = 0; i < m; ++i) {
            rebuild_transport_operator(grid_, params_, B.row(i), scheme_, L_);
            L_.apply_transpose(raw, raw_next);
            for (int j = 0; j < n; ++j) raw_next[j] = raw[j] + dt_ * raw_next[j];
            std::swap(raw, raw_next);
            auto row = M.row(i + 1);
            double s = 0.0;
            for (int j = 0; j < n; ++j) {
                const double v = (1.0 - relaxation) * row[j] + relaxation * raw[j];
                const double d = (v - row[j]) * h;
                s += d * d;
                row[j] = v;
                out.finite = out.finite && std::isfinite(v);
            }
            out.density_change = std::max(out.density_change, std::sqrt(s));
        }
        return out;
    }

private:
    const PeriodicGrid& grid_;
    ModelParams params_;
    Scheme scheme_;
    double dt_;
    double bound_;
    InteractionKernel kernel_;
    std::vector<double> sun_;
    TransportOperator L_;
};

long every_for(double dt, double sample_hours) {
    const double k = sample_hours / dt;
    const double nearest = std::round(k);
    if (nearest < 1.0 || std::abs(k - nearest) > 1e-9 * nearest) {
        throw std::invalid_argument(fmt::format("sampling interval {} is not a multiple of the step {}",
                                                sample_hours, dt));
    }
    return static_cast<long>(nearest);
}

}  // namespace

SampledPath MfgPath::sampled(double sample_hours) const {
    const long every = every_for(dt, sample_hours);
    SampledPath out;
    for (long i = 0; i <= steps; i += every) {
        out.times.push_back(std::round(static_cast<double>(i) * dt * 1e9) / 1e9);
        out.densities.push_row(densities.row(i));
        out.controls.push_row(controls.row(i));
    }
    return out;
}

MfgPath solve_recovery_mfg(const ErgodicSolution& ergodic, double p, const MfgOptions& opts) {
    if (ergodic.outcome.kind != Outcome::Converged) {
        throw std::invalid_argument(fmt::format("recovery needs a converged ergodic solution (outcome {})",
                                                to_string(ergodic.outcome.kind)));
    }
    if (!(opts.T_hours > 0.0) || !(opts.eps > 0.0) || opts.max_iter < 1) {
        throw std::invalid_argument("MFG recovery needs T > 0, eps > 0, max_iter >= 1");
    }
    if (!(opts.relaxation > 0.0) || opts.relaxation > 1.0) throw std::invalid_argument("relaxation must be in (0, 1]");
    const PeriodicGrid& grid = ergodic.grid;
    ModelParams params = ergodic.params;
    params.p = wrap_angle(p);
    rotation_steps(grid, params.p);
    const Scheme scheme = opts.scheme.value_or(ergodic.scheme);
    const int n = grid.size();
    const auto mu_star = ergodic.mu.values();

    double bound = opts.initial_bound;
    for (int attempt = 0; attempt <= opts.max_bound_doublings; ++attempt, bound *= 2.0) {
        const double dt = aligned_dt(grid, params, bound, opts.sample_hours);
        const long m = static_cast<long>(std::ceil(opts.T_hours / dt - 1e-9));

        MfgPath path{grid, params, scheme, dt, m, m * dt, bound, SliceMatrix(m + 1, n), SliceMatrix(m + 1, n),
                     SliceMatrix(m + 1, n), 0, false, 0.0, 0.0};
        for (long i = 0; i <= m; ++i) std::copy(mu_star.begin(), mu_star.end(), path.densities.row(i).begin());

        Sweeper sweeper(grid, params, scheme, dt, bound);
        bool violated = false;
        for (long k = 1; k <= opts.max_iter; ++k) {
            const SweepResult r = sweeper.run(path.densities, path.values, path.controls, mu_star, opts.relaxation);
            if (r.bound_violated) {
                violated = true;
                break;
            }
            path.iterations = k;
            path.density_change = r.density_change;
            path.control_change = r.control_change;
            if (opts.progress) opts.progress({k, r.density_change, r.control_change});
            if (!r.finite) break;
            if (r.density_change < opts.eps && r.control_change < opts.eps) {
                path.converged = true;
                break;
            }
        }
        if (!violated) return path;
    }
    throw SolverError(fmt::format("CFL bound still violated after {} doublings", opts.max_bound_doublings), 0);
}

FixedPointResidual fixed_point_residual(const MfgPath& path, std::span<const double> mu_star) {
    SliceMatrix M = path.densities, U = path.values, B = path.controls;
    Sweeper sweeper(path.grid, path.params, path.scheme, path.dt, std::numeric_limits<double>::infinity());
    const SweepResult r = sweeper.run(M, U, B, mu_star, 1.0);
    return {r.density_change, r.control_change};
}

StationarityReport stationarity_check(const MfgPath& path, const ErgodicSolution& ergodic, double eps_w,
                                      double sample_hours) {
    const SampledPath s = path.sampled(sample_hours);
    StationarityReport rep;
    rep.min_w2 = std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t i = 0; i < s.times.size(); ++i) {
        if (s.times[i] < 0.25 * path.T || s.times[i] > 0.75 * path.T) continue;
        const double w = circular_w2(s.densities.row(i), ergodic.mu.values(), path.grid);
        rep.max_w2 = std::max(rep.max_w2, w);
        rep.min_w2 = std::min(rep.min_w2, w);
        any = true;
    }
    if (!any) rep.min_w2 = 0.0;
    rep.exceeds_throughout = any && rep.min_w2 > eps_w;
    rep.within_throughout = any && rep.max_w2 < eps_w;
    return rep;
}

RecoveryReport report_recovery(const MfgPath& path, const ErgodicSolution& ergodic,
                               const RecoveryThresholds& thresholds, double sample_hours) {
    return recovery_report(path.sampled(sample_hours), ergodic.mu.values(), path.params, path.grid, thresholds);
}

}  // namespace circadian
