#pragma once

#include "circadian/ergodic.hpp"
#include "circadian/metrics.hpp"

#include <functional>
#include <optional>

namespace circadian {

/// Finite-horizon forward-backward solution after travelling to zone p.
struct MfgPath {
    PeriodicGrid grid;
    ModelParams params;  ///< params.p is the zone travelled to
    Scheme scheme = Scheme::Centered;
    double dt = 0.0;
    long steps = 0;      ///< m, with T = m·dt
    double T = 0.0;      ///< hours
    double bound = 0.0;  ///< CFL bound A on |β̃| the step was sized for
    SliceMatrix densities;  ///< M̃_{i,j}, i = 0..m
    SliceMatrix values;     ///< Ũ_{i,j}
    SliceMatrix controls;   ///< β̃_{i,j}
    long iterations = 0;
    bool converged = false;
    double density_change = 0.0;  ///< max_i ℓ₂ change of M̃_iΔφ in the last iterate
    double control_change = 0.0;  ///< max_i ℓ₂ change of β̃_i in the last iterate

    /// Slices every `sample_hours`, starting at t = 0.
    SampledPath sampled(double sample_hours = 1.0) const;
};

struct MfgProgress {
    long iteration;
    double density_change;
    double control_change;
};

struct MfgOptions {
    double T_hours = 2400.0;
    double eps = 1e-5;
    long max_iter = 500;
    std::optional<Scheme> scheme;  ///< defaults to the scheme of the ergodic solution
    double sample_hours = 1.0;     ///< the step divides this interval exactly
    double initial_bound = 0.25;
    int max_bound_doublings = 8;
    double relaxation = 1.0;       ///< M̃ ← (1-θ)M̃ᵏ + θ·(forward sweep); 1 is plain substitution
    std::function<void(const MfgProgress&)> progress;
};

MfgPath solve_recovery_mfg(const ErgodicSolution& ergodic, double p, const MfgOptions& opts = {});

/// Largest slice changes produced by one more backward and forward sweep.
struct FixedPointResidual {
    double density_change = 0.0;
    double control_change = 0.0;
};

FixedPointResidual fixed_point_residual(const MfgPath& path, std::span<const double> mu_star);

struct StationarityReport {
    double max_w2 = 0.0;  ///< over sampled t in [T/4, 3T/4]
    double min_w2 = 0.0;
    bool exceeds_throughout = false;  ///< W₂ > eps_w at every sample of the window
    bool within_throughout = false;   ///< W₂ < eps_w at every sample of the window
};

/// W₂ between the p = 0 path and μ* over the middle half of the horizon.
StationarityReport stationarity_check(const MfgPath& path, const ErgodicSolution& ergodic, double eps_w,
                                      double sample_hours = 1.0);

RecoveryReport report_recovery(const MfgPath& path, const ErgodicSolution& ergodic,
                               const RecoveryThresholds& thresholds = {}, double sample_hours = 1.0);

}  // namespace circadian
