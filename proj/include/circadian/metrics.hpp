#pragma once

#include "circadian/grid.hpp"

#include <complex>
#include <optional>
#include <span>
#include <vector>

namespace circadian {

/// Hourly (or otherwise subsampled) snapshot of a recovery run.
struct SampledPath {
    std::vector<double> times;  ///< hours since travel
    SliceMatrix densities;      ///< M(t_i, φ_j), per radian
    SliceMatrix controls;       ///< β(t_i, φ_j) in force at t_i
};

/// z = Σ_j e^{i jΔφ} M_j Δφ.
std::complex<double> order_parameter(std::span<const double> mu, const PeriodicGrid& grid);

/// Negative entries tolerated by circular_w2 before it refuses the input.
inline constexpr double kNegativeMassTolerance = 1e-5;

/// 2-Wasserstein distance between a·Δφ and b·Δφ on the circle with the
/// geodesic ground metric. Exact: the optimal circle plan is a quantile
/// coupling with b's cumulative mass shifted by θ, and the shifted cost is
/// convex and piecewise linear in θ, so it is minimized over the breakpoints
/// θ = F_i - G_j by ternary search. O(n² log n).
///
/// Entries in (-1e-5, 0) are clamped to zero and the measure renormalized;
/// anything more negative throws std::domain_error.
double circular_w2(std::span<const double> a, std::span<const double> b, const PeriodicGrid& grid);

/// Same transport on raw non-negative weights (each summing to 1) at the grid points.
double circular_w2_weights(std::span<const double> wa, std::span<const double> wb, const PeriodicGrid& grid);

/// Clamps every negative entry regardless of size. Used on intermediate solver
/// iterates, which are not yet required to be valid densities.
double circular_w2_lenient(std::span<const double> a, std::span<const double> b, const PeriodicGrid& grid);

/// First sampled time with W₂(M(t), target) < eps_w; nullopt if never.
std::optional<double> recovery_time_w(const SampledPath& path, std::span<const double> target,
                                      const PeriodicGrid& grid, double eps_w);

/// First sampled time with |z(t) - e^{ip} z*| < eps_z; nullopt if never.
std::optional<double> recovery_time_z(const SampledPath& path, std::complex<double> z_star, double p,
                                      const PeriodicGrid& grid, double eps_z);

struct RecoveryThresholds {
    double eps_w = 0.01;
    double eps_z = 0.2;
    double window_hours = 240.0;  ///< integration window of the accrued costs
};

struct RecoveryReport {
    std::optional<double> tau_w;  ///< hours
    std::optional<double> tau_z;  ///< hours
    double f_alpha = 0.0;         ///< cost·hours over the window
    double f_osc = 0.0;
    double f_sun = 0.0;
    double f_total = 0.0;

    std::vector<double> times;
    std::vector<double> trace_alpha;
    std::vector<double> trace_osc;
    std::vector<double> trace_sun;
    std::vector<double> trace_total;
    std::vector<std::complex<double>> z_path;
    std::vector<double> w2_path;  ///< W₂ to the target, empty when no target given
};

/// Instantaneous population costs along the path and their trapezoid integrals over
/// [0, window]: f_α = Σ ½β² M Δφ, f_osc = Σ c̄(M) M Δφ, f_sun = Σ c_sun(·,p) M Δφ,
/// f = (f_α + K f_osc + F f_sun)/(1 + K + F).
RecoveryReport cost_traces(const SampledPath& path, const ModelParams& params, const PeriodicGrid& grid,
                           double window_hours = 240.0);

/// Costs plus both recovery times measured against the entrained target density
/// (the ergodic density rotated to the new zone) and its order parameter z*.
RecoveryReport recovery_report(const SampledPath& path, std::span<const double> unrotated_target,
                               const ModelParams& params, const PeriodicGrid& grid,
                               const RecoveryThresholds& thresholds = {});

}  // namespace circadian
