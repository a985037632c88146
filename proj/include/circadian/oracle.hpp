#pragma once

#include "circadian/grid.hpp"

#include <span>
#include <vector>

namespace circadian {

/// Lowest even π-periodic solution of f'' + [a - 2q cos 2x] f = 0, as the cosine
/// series Σ_k A_{2k} cos(2kx) normalized to f(0) = Σ A_{2k} = 1.
struct MathieuEven {
    double q = 0.0;
    double a = 0.0;               ///< characteristic value of the lowest even mode
    std::vector<double> coeffs;   ///< A_0, A_2, A_4, ...

    double operator()(double x) const noexcept;
    double derivative(double x) const noexcept;
    double second_derivative(double x) const noexcept;
};

/// Smallest eigenvalue of the truncated symmetric recurrence matrix for the
/// even coefficients (diag 4k², off-diagonals √2·q then q), computed by Sturm
/// bisection. Truncation doubles until the value moves by less than 1e-10.
double mathieu_char_value(double q);

/// Characteristic value and normalized coefficients (inverse iteration on the
/// converged truncation).
MathieuEven mathieu_even(double q);

double mathieu_eval(const MathieuEven& m, double x) noexcept;

/// Closed-form stationary solution for K = 0, ω₀ = ω_S.
///
/// With W = exp(-V/σ²) the HJB becomes W'' + (2/σ⁴)(λ - F/4 + (F/4) cos φ) W = 0,
/// i.e. Mathieu's equation in x = φ/2 with q = -F/σ⁴ and a = 8(λ - F/4)/σ⁴. Hence
///   μ ∝ M(a, q, φ/2)²,  V' = -σ² (log W)',  λ = F/4 + (σ⁴/8)·a(q).
struct SpecialCaseSolution {
    double q = 0.0;
    MathieuEven mathieu;
    Density mu_K0;
    std::vector<double> W_K0;   ///< M(a, q, φ_j/2)
    std::vector<double> dV_K0;  ///< ∂_φ V at the grid points
    double lambda_K0 = 0.0;
};

SpecialCaseSolution special_case_solution(double F, double sigma, const PeriodicGrid& grid);

/// The closed form exactly as printed alongside the special case:
/// λ = F/2 + (σ²/8)·a(-2F/σ⁴). Kept for reporting; it does not solve the model
/// with c_sun = ½ sin²((p - φ)/2) (see README).
double printed_special_case_lambda(double F, double sigma);

/// Printed density variant ∝ M(a(q), q, φ/2)² with q = -2F/σ⁴.
Density printed_special_case_density(double F, double sigma, const PeriodicGrid& grid);

/// First-order (in K) correction of the ergodic cost.
struct FirstOrderLambda {
    double literal = 0.0;   ///< ∫ (½sin²(·/2) * μ₀)(φ) dφ
    double weighted = 0.0;  ///< ∫ (½sin²(·/2) * μ₀)(φ) μ₀(φ) dφ, the solvability condition
};

FirstOrderLambda perturbation_lambda1(const Density& mu_K0, const PeriodicGrid& grid);

/// ∂_φ V₁ = (2/(σ² μ₀)) [c + ∫₀^φ μ₀ (λ₁ - c̄(·, μ₀))], with c fixed by Σ ∂_φV₁ Δφ = 0.
/// Throws std::domain_error when min μ₀ < 1e-12.
std::vector<double> perturbation_dV1(const Density& mu_K0, double lambda1, double sigma, const PeriodicGrid& grid);

/// μ₁ = Γ W₀ where (σ²/2)(Γ W₀'' - W₀ Γ'') = (2/σ²) μ₀ (λ₁ - c̄(·, μ₀)), solved by
/// periodic finite differences. W₀'' is taken as the discrete second difference
/// of the samples, which makes Γ = W₀ an exact null vector; it is removed by the
/// side condition Σ μ₁ Δφ = Σ Γ W₀ Δφ = 0. The system is only consistent for the
/// weighted λ₁.
std::vector<double> perturbation_mu1(const Density& mu_K0, std::span<const double> W_K0, double lambda1,
                                     double sigma, const PeriodicGrid& grid);

}  // namespace circadian
