#pragma once

#include "circadian/grid.hpp"

#include <Eigen/Dense>
#include <span>
#include <string_view>
#include <vector>

namespace circadian {

/// First-derivative discretization used inside the transport operator.
enum class Scheme { Monotone, Centered };

std::string_view to_string(Scheme s) noexcept;
Scheme parse_scheme(std::string_view text);

/// Discrete generator L_β on the periodic grid, stored as a cyclic band:
/// (L u)_j = lower_j u_{j-1} + diag_j u_j + upper_j u_{j+1}.
///
/// The first-order part uses the drift ω₀ - ω_S + β_j, upwinded (Monotone) or
/// centered (Centered); the second-order part is (σ²/2)·second difference.
/// The diagonal is set to -(lower + upper), so every row sums to zero and the
/// transpose conserves Σ M_j.
class TransportOperator {
public:
    TransportOperator(std::vector<double> lower, std::vector<double> diag, std::vector<double> upper,
                      Scheme scheme);

    int size() const noexcept { return static_cast<int>(diag_.size()); }
    Scheme scheme() const noexcept { return scheme_; }

    std::span<const double> lower() const noexcept { return lower_; }
    std::span<const double> diag() const noexcept { return diag_; }
    std::span<const double> upper() const noexcept { return upper_; }

    /// out = L u
    void apply(std::span<const double> u, std::span<double> out) const;
    /// out = Lᵀ m
    void apply_transpose(std::span<const double> m, std::span<double> out) const;

    std::vector<double> apply(std::span<const double> u) const;
    std::vector<double> apply_transpose(std::span<const double> m) const;

    Eigen::MatrixXd dense() const;

private:
    friend void rebuild_transport_operator(const PeriodicGrid&, const ModelParams&, std::span<const double>,
                                           Scheme, TransportOperator&);

    std::vector<double> lower_;
    std::vector<double> diag_;
    std::vector<double> upper_;
    Scheme scheme_;
};

/// c_sun(φ_j, p) = ½ sin²((p - φ_j)/2).
std::vector<double> sun_cost(const PeriodicGrid& grid, double p);

/// c̄(φ_j, M) = ½ Σ_k sin²((φ_k - φ_j)/2) M_k Δφ.
///
/// Evaluated in O(n) through ½sin²(x/2) = ¼(1 - cos x) and the first Fourier
/// moments of M; agrees with the direct double sum to round-off.
std::vector<double> interaction_cost(const PeriodicGrid& grid, std::span<const double> mu);
void interaction_cost(const PeriodicGrid& grid, std::span<const double> mu, std::span<double> out);

/// interaction_cost with the grid trigonometry tabulated once, for repeated use.
class InteractionKernel {
public:
    explicit InteractionKernel(const PeriodicGrid& grid);
    void apply(std::span<const double> mu, std::span<double> out) const;

private:
    double dphi_;
    std::vector<double> cos_, sin_;
};

TransportOperator build_transport_operator(const PeriodicGrid& grid, const ModelParams& params,
                                           std::span<const double> beta, Scheme scheme);

/// Control read off a value field. Monotone: one-sided slope consistent with the
/// sign of the drift on both sides of j, zero otherwise. Centered: -(U_{j+1}-U_{j-1})/(2Δφ).
std::vector<double> extract_control(std::span<const double> U, const PeriodicGrid& grid,
                                    const ModelParams& params, Scheme scheme);
void extract_control(std::span<const double> U, const PeriodicGrid& grid, const ModelParams& params,
                     Scheme scheme, std::span<double> beta);

/// Largest explicit step allowed with |β| ≤ bound:
/// Δt = 1 / (2 (σ²/Δφ² + (|ω_S - ω₀| + bound)/Δφ)).
double cfl_dt(const PeriodicGrid& grid, const ModelParams& params, double bound);

/// Rebuilds `op` in place for a new control (avoids reallocating inside solver loops).
void rebuild_transport_operator(const PeriodicGrid& grid, const ModelParams& params,
                                std::span<const double> beta, Scheme scheme, TransportOperator& op);

}  // namespace circadian
