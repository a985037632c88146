#pragma once

#include "circadian/ergodic.hpp"
#include "circadian/metrics.hpp"

#include <optional>

namespace circadian {

/// Density evolution of travellers who keep the ergodic control, rotated to the new zone.
struct DensityPath {
    PeriodicGrid grid;
    double dt = 0.0;     ///< hours
    long steps = 0;      ///< m, so the final time is m·dt
    double p = 0.0;      ///< zone angle travelled to
    ControlField beta_p; ///< rotated, time-independent control
    Scheme scheme = Scheme::Centered;
    SampledPath samples; ///< slices at every sampling instant, t = 0 included
    double mass_drift = 0.0;  ///< max_i |Σ_j M_{i,j}Δφ - 1| over every step
    double min_value = 0.0;   ///< min_{i,j} M_{i,j} over every step
};

struct RecoveryOptions {
    double horizon_hours = 480.0;
    double sample_hours = 1.0;
    std::optional<Scheme> scheme;  ///< defaults to the scheme of the ergodic solution
    std::optional<double> dt;      ///< must respect the CFL limit and divide sample_hours
};

/// Largest step below the CFL limit for |β| ≤ bound that fits a whole number of
/// times into `sample_hours`.
double aligned_dt(const PeriodicGrid& grid, const ModelParams& params, double bound, double sample_hours);

/// Forward Euler on M_{i+1} = M_i + Δt L_{β^p}ᵀ M_i from M_0 = μ*, β^p_j = β_{j-r}.
DensityPath run_recovery(const ErgodicSolution& ergodic, double p, const RecoveryOptions& opts = {});

/// Same stepping from an arbitrary start and control; `params.p` is not used.
DensityPath propagate_density(const PeriodicGrid& grid, const ModelParams& params, std::span<const double> M0,
                              const ControlField& beta, Scheme scheme, double dt, long steps, long sample_every);

/// Costs and recovery times of `path` against the entrained target of `ergodic`.
RecoveryReport report_recovery(const DensityPath& path, const ErgodicSolution& ergodic,
                               const RecoveryThresholds& thresholds = {});

}  // namespace circadian
