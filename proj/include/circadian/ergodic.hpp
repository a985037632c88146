#pragma once

#include "circadian/grid.hpp"
#include "circadian/operators.hpp"

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string_view>

namespace circadian {

enum class ErgodicMethod {
    Method1,  ///< alternating linear solves (HJB system, least-squares Poisson)
    Method2,  ///< artificial-time explicit iteration
};

std::string_view to_string(ErgodicMethod m) noexcept;
ErgodicMethod parse_method(std::string_view text);

enum class Outcome { Converged, InvalidSolution, NotConverged };

/// Which validity check an otherwise converged iterate failed.
enum class InvalidReason { None, PhaseAngle, Negativity };

struct OutcomeClass {
    Outcome kind = Outcome::NotConverged;
    InvalidReason reason = InvalidReason::None;

    bool operator==(const OutcomeClass&) const = default;
};

std::string_view to_string(Outcome o) noexcept;
std::string_view to_string(InvalidReason r) noexcept;

/// Raised for numerical breakdowns that are not ordinary non-convergence.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, long iteration) : std::runtime_error(what), iteration_(iteration) {}
    long iteration() const noexcept { return iteration_; }

private:
    long iteration_;
};

/// Discrete stationary equilibrium (M, U, Λ, β) and how it was obtained.
struct ErgodicSolution {
    PeriodicGrid grid;
    ModelParams params;
    Density mu;
    ValueField U;
    double lambda = 0.0;  ///< ergodic average cost, cost/hour
    ControlField beta;
    Scheme scheme = Scheme::Centered;
    ErgodicMethod method = ErgodicMethod::Method1;
    long iterations = 0;
    bool criteria_met = false;  ///< the method's own stopping rule was satisfied
    OutcomeClass outcome;
    double lsq_residual = 0.0;  ///< Method 1: ε of the final Poisson least-squares solve
    double cfl_bound = 0.0;     ///< Method 2: bound A on |β| used for the step size
    double dt = 0.0;            ///< Method 2: artificial time step
};

struct Method1Options {
    double eps = 1e-5;
    long max_iter = 1000;
};

struct Method2Options {
    double eps = 1e-5;
    long max_iter = 1'000'000;
    std::optional<double> dt;     ///< defaults to the CFL step for the working bound
    double initial_bound = 0.25;  ///< first guess for A; doubled whenever |β| exceeds it
    int max_bound_doublings = 12;
};

ErgodicSolution solve_method1(const PeriodicGrid& grid, const ModelParams& params, Scheme scheme,
                              const Method1Options& opts = {});

ErgodicSolution solve_method2(const PeriodicGrid& grid, const ModelParams& params, Scheme scheme,
                              const Method2Options& opts = {});

struct ErgodicOptions {
    ErgodicMethod method = ErgodicMethod::Method1;
    Scheme scheme = Scheme::Centered;
    double eps = 1e-5;
    std::optional<long> max_iter;  ///< method default when unset
};

ErgodicSolution solve_ergodic(const PeriodicGrid& grid, const ModelParams& params, const ErgodicOptions& opts);

/// Phase of the order parameter relative to the zone angle, in [-π, π];
/// zero when |z| < 1e-8 (uniform density).
double phase_offset(const Density& mu, const PeriodicGrid& grid, double p);

/// Converged = stopping criteria met, |ψ| < 0.1 and min M > -eps.
OutcomeClass classify_outcome(const ErgodicSolution& candidate, double eps);

/// Λ = Σ_j [½β_j² + K c̄(φ_j, M) + F c_sun(φ_j)] M_j Δφ.
double ergodic_average_cost(const Density& mu, const ValueField& U, const ControlField& beta,
                            const ModelParams& params, const PeriodicGrid& grid);

/// Residual vectors of the discrete stationary system at a candidate solution.
struct ErgodicResidual {
    double hjb_inf = 0.0;      ///< ‖L_β U + ½β² + K c̄ + F c_sun - Λ‖_∞
    double poisson_inf = 0.0;  ///< ‖L_βᵀ M‖_∞
    double hjb_mean = 0.0;     ///< mean of L_β U + ½β² + K c̄ + F c_sun
};

ErgodicResidual ergodic_residual(const ErgodicSolution& s);

}  // namespace circadian
