#include "circadian/oracle.hpp"

#include "circadian/operators.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <fmt/format.h>
#include <limits>

namespace circadian {

namespace {

struct Tridiagonal {
    std::vector<double> diag;
    std::vector<double> off;  // off[i] couples i and i+1
};

/// Symmetrized recurrence for the even π-periodic coefficients, with the first
/// unknown scaled by √2.
Tridiagonal even_recurrence(double q, int size) {
    Tridiagonal t;
    t.diag.resize(size);
    t.off.resize(size - 1);
    for (int k = 0; k < size; ++k) t.diag[k] = 4.0 * k * k;
    for (int k = 0; k + 1 < size; ++k) t.off[k] = q;
    t.off[0] = std::sqrt(2.0) * q;
    return t;
}

/// Number of eigenvalues strictly below x (Sturm sequence).
int count_below(const Tridiagonal& t, double x) {
    int count = 0;
    double d = 1.0;
    for (std::size_t i = 0; i < t.diag.size(); ++i) {
        const double e2 = i == 0 ? 0.0 : t.off[i - 1] * t.off[i - 1];
        d = (t.diag[i] - x) - (i == 0 ? 0.0 : e2 / d);
        if (d == 0.0) d = -std::numeric_limits<double>::epsilon() * (std::abs(x) + 1.0);
        if (d < 0.0) ++count;
    }
    return count;
}

double smallest_eigenvalue(const Tridiagonal& t) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < t.diag.size(); ++i) {
        const double r = (i > 0 ? std::abs(t.off[i - 1]) : 0.0) + (i + 1 < t.diag.size() ? std::abs(t.off[i]) : 0.0);
        lo = std::min(lo, t.diag[i] - r);
        hi = std::max(hi, t.diag[i] + r);
    }
    for (int it = 0; it < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(lo));
         ++it) {
        const double mid = 0.5 * (lo + hi);
        if (count_below(t, mid) >= 1) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return 0.5 * (lo + hi);
}

/// Solves (T - shift I) y = b for a symmetric positive definite shifted tridiagonal.
std::vector<double> solve_shifted(const Tridiagonal& t, double shift, std::vector<double> b) {
    const std::size_t n = t.diag.size();
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = t.diag[i] - shift;
    for (std::size_t i = 1; i < n; ++i) {
        const double w = t.off[i - 1] / d[i - 1];
        d[i] -= w * t.off[i - 1];
        b[i] -= w * b[i - 1];
    }
    b[n - 1] /= d[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) b[i] = (b[i] - t.off[i] * b[i + 1]) / d[i];
    return b;
}

struct Converged {
    double a;
    int size;
};

Converged converge_truncation(double q) {
    constexpr int kMaxSize = 1 << 14;
    int size = std::max(16, static_cast<int>(2.0 * std::sqrt(std::abs(q))) + 16);
    double prev = smallest_eigenvalue(even_recurrence(q, size));
    while (size < kMaxSize) {
        size *= 2;
        const double a = smallest_eigenvalue(even_recurrence(q, size));
        if (std::abs(a - prev) < 1e-10) return {a, size};
        prev = a;
    }
    throw std::runtime_error(fmt::format("Mathieu truncation did not settle for q={} (reached N={})", q, size));
}

}  // namespace

double mathieu_char_value(double q) {
    if (!std::isfinite(q)) throw std::invalid_argument("Mathieu parameter must be finite");
    return converge_truncation(q).a;
}

MathieuEven mathieu_even(double q) {
    if (!std::isfinite(q)) throw std::invalid_argument("Mathieu parameter must be finite");
    const auto [a, size] = converge_truncation(q);
    const auto t = even_recurrence(q, size);
    const double shift = a - 1e-9 * std::max(1.0, std::abs(a));
    std::vector<double> y(size, 1.0);
    for (int it = 0; it < 4; ++it) {
        y = solve_shifted(t, shift, std::move(y));
        double norm = 0.0;
        for (double v : y) norm += v * v;
        norm = std::sqrt(norm);
        for (double& v : y) v /= norm;
    }
    y[0] /= std::sqrt(2.0);
    double total = 0.0;
    for (double v : y) total += v;
    for (double& v : y) v /= total;
    // trailing coefficients below round-off carry no information
    std::size_t keep = y.size();
    while (keep > 1 && std::abs(y[keep - 1]) < 1e-300) --keep;
    y.resize(keep);
    return MathieuEven{q, a, std::move(y)};
}

double MathieuEven::operator()(double x) const noexcept {
    double s = 0.0;
    for (std::size_t k = 0; k < coeffs.size(); ++k) s += coeffs[k] * std::cos(2.0 * k * x);
    return s;
}

double MathieuEven::derivative(double x) const noexcept {
    double s = 0.0;
    for (std::size_t k = 1; k < coeffs.size(); ++k) s -= 2.0 * k * coeffs[k] * std::sin(2.0 * k * x);
    return s;
}

double MathieuEven::second_derivative(double x) const noexcept {
    double s = 0.0;
    for (std::size_t k = 1; k < coeffs.size(); ++k) s -= 4.0 * k * k * coeffs[k] * std::cos(2.0 * k * x);
    return s;
}

double mathieu_eval(const MathieuEven& m, double x) noexcept { return m(x); }

SpecialCaseSolution special_case_solution(double F, double sigma, const PeriodicGrid& grid) {
    if (!(F >= 0.0) || !(sigma > 0.0)) throw std::invalid_argument("special case needs F >= 0 and sigma > 0");
    const double s2 = sigma * sigma;
    const double s4 = s2 * s2;
    const double q = -F / s4;
    MathieuEven m = mathieu_even(q);
    const int n = grid.size();
    std::vector<double> W(n), W2(n), dV(n);
    for (int j = 0; j < n; ++j) {
        const double x = 0.5 * grid.phi(j);
        W[j] = m(x);
        W2[j] = W[j] * W[j];
        // d/dφ log M(φ/2) = ½ M'(x)/M(x)
        dV[j] = -s2 * 0.5 * m.derivative(x) / W[j];
    }
    Density mu = normalize_density(W2, grid);
    const double lambda = 0.25 * F + 0.125 * s4 * m.a;
    return SpecialCaseSolution{q, std::move(m), std::move(mu), std::move(W), std::move(dV), lambda};
}

double printed_special_case_lambda(double F, double sigma) {
    const double s2 = sigma * sigma;
    return 0.5 * F + 0.125 * s2 * mathieu_char_value(-2.0 * F / (s2 * s2));
}

Density printed_special_case_density(double F, double sigma, const PeriodicGrid& grid) {
    const double s2 = sigma * sigma;
    const MathieuEven m = mathieu_even(-2.0 * F / (s2 * s2));
    std::vector<double> w(grid.size());
    for (int j = 0; j < grid.size(); ++j) {
        const double v = m(0.5 * grid.phi(j));
        w[j] = v * v;
    }
    return normalize_density(w, grid);
}

FirstOrderLambda perturbation_lambda1(const Density& mu_K0, const PeriodicGrid& grid) {
    const auto conv = interaction_cost(grid, mu_K0.values());
    FirstOrderLambda out;
    for (int j = 0; j < grid.size(); ++j) {
        out.literal += conv[j];
        out.weighted += conv[j] * mu_K0[j];
    }
    out.literal *= grid.step();
    out.weighted *= grid.step();
    return out;
}

std::vector<double> perturbation_dV1(const Density& mu_K0, double lambda1, double sigma, const PeriodicGrid& grid) {
    if (mu_K0.min() < 1e-12) {
        throw std::domain_error(fmt::format("base density minimum {} too small for the integrating factor", mu_K0.min()));
    }
    const int n = grid.size();
    const double h = grid.step();
    const auto conv = interaction_cost(grid, mu_K0.values());
    std::vector<double> integral(n, 0.0);
    double prev = mu_K0[0] * (lambda1 - conv[0]);
    for (int j = 1; j < n; ++j) {
        const double g = mu_K0[j] * (lambda1 - conv[j]);
        integral[j] = integral[j - 1] + 0.5 * h * (prev + g);
        prev = g;
    }
    double num = 0.0, den = 0.0;
    for (int j = 0; j < n; ++j) {
        num += integral[j] / mu_K0[j];
        den += 1.0 / mu_K0[j];
    }
    const double c = -num / den;
    std::vector<double> out(n);
    for (int j = 0; j < n; ++j) out[j] = 2.0 / (sigma * sigma * mu_K0[j]) * (c + integral[j]);
    return out;
}

std::vector<double> perturbation_mu1(const Density& mu_K0, std::span<const double> W_K0, double lambda1,
                                     double sigma, const PeriodicGrid& grid) {
    const int n = grid.size();
    if (W_K0.size() != static_cast<std::size_t>(n)) throw std::invalid_argument("W_K0 length does not match grid");
    const double h = grid.step();
    const double s2 = sigma * sigma;
    const auto conv = interaction_cost(grid, mu_K0.values());

    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n + 1, n);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 1);
    for (int j = 0; j < n; ++j) {
        const int jm = grid.wrap(j - 1), jp = grid.wrap(j + 1);
        const double w2 = (W_K0[jp] - 2.0 * W_K0[j] + W_K0[jm]) / (h * h);
        // (σ²/2)(Γ_j W''_j - W_j (Γ_{j+1} - 2Γ_j + Γ_{j-1})/h²)
        A(j, j) += 0.5 * s2 * (w2 + 2.0 * W_K0[j] / (h * h));
        A(j, jp) -= 0.5 * s2 * W_K0[j] / (h * h);
        A(j, jm) -= 0.5 * s2 * W_K0[j] / (h * h);
        rhs(j) = 2.0 / s2 * mu_K0[j] * (lambda1 - conv[j]);
        A(n, j) = W_K0[j] * h;
    }
    const Eigen::VectorXd gamma = A.colPivHouseholderQr().solve(rhs);
    const double residual = (A * gamma - rhs).norm();
    if (!std::isfinite(residual) || residual > 1e-6 * std::max(1.0, rhs.norm())) {
        throw std::runtime_error(fmt::format("first-order density system is inconsistent (residual {})", residual));
    }
    std::vector<double> mu1(n);
    for (int j = 0; j < n; ++j) mu1[j] = gamma(j) * W_K0[j];
    return mu1;
}

}  // namespace circadian
