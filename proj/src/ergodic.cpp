#include "circadian/ergodic.hpp"

#include "circadian/metrics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <fmt/format.h>
#include <numeric>

namespace circadian {

std::string_view to_string(ErgodicMethod m) noexcept { return m == ErgodicMethod::Method1 ? "method1" : "method2"; }

ErgodicMethod parse_method(std::string_view text) {
    if (text == "1" || text == "method1") return ErgodicMethod::Method1;
    if (text == "2" || text == "method2") return ErgodicMethod::Method2;
    throw std::invalid_argument(fmt::format("unknown method '{}' (expected 1|2)", text));
}

std::string_view to_string(Outcome o) noexcept {
    switch (o) {
        case Outcome::Converged: return "converged";
        case Outcome::InvalidSolution: return "invalid_solution";
        case Outcome::NotConverged: return "not_converged";
    }
    return "?";
}

std::string_view to_string(InvalidReason r) noexcept {
    switch (r) {
        case InvalidReason::None: return "none";
        case InvalidReason::PhaseAngle: return "phase_angle";
        case InvalidReason::Negativity: return "negativity";
    }
    return "?";
}

namespace {

double l2_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
    return std::sqrt(s);
}

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

/// Right-hand-side running cost ½β² + K c̄(M) + F c_sun.
void running_cost(const PeriodicGrid& grid, const ModelParams& params, std::span<const double> M,
                  std::span<const double> beta, std::span<const double> sun, std::span<double> out) {
    interaction_cost(grid, M, out);
    for (int j = 0; j < grid.size(); ++j) {
        out[j] = 0.5 * beta[j] * beta[j] + params.K * out[j] + params.F * sun[j];
    }
}

struct HjbSolve {
    std::vector<double> U;
    double lambda;
};

/// Solves {(L_β U)_j - Λ = -(½β_j² + K c̄_j + F c_sun,j); Σ U_j = 0}.
HjbSolve solve_stationary_hjb(const TransportOperator& L, std::span<const double> cost, long iteration) {
    const int n = L.size();
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n + 1, n + 1);
    A.topLeftCorner(n, n) = L.dense();
    A.col(n).head(n).setConstant(-1.0);
    A.row(n).head(n).setOnes();
    Eigen::VectorXd rhs(n + 1);
    for (int j = 0; j < n; ++j) rhs(j) = -cost[j];
    rhs(n) = 0.0;

    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    if (!lu.isInvertible()) {
        throw SolverError(fmt::format("singular HJB system at iteration {}", iteration), iteration);
    }
    Eigen::VectorXd x = lu.solve(rhs);
    HjbSolve out{std::vector<double>(x.data(), x.data() + n), x(n)};
    return out;
}

/// Least-squares solution of {L_βᵀ M = 0; Σ M_j Δφ = 1}; returns M and the residual ε.
std::pair<std::vector<double>, double> solve_stationary_poisson(const TransportOperator& L, double dphi) {
    const int n = L.size();
    Eigen::MatrixXd A(n + 1, n);
    A.topRows(n) = L.dense().transpose();
    A.row(n).setConstant(dphi);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 1);
    rhs(n) = 1.0;
    Eigen::VectorXd M = A.colPivHouseholderQr().solve(rhs);
    const double eps = (A * M - rhs).norm();
    return {std::vector<double>(M.data(), M.data() + n), eps};
}

ErgodicSolution package(const PeriodicGrid& grid, const ModelParams& params, Scheme scheme, ErgodicMethod method,
                        std::span<const double> M, std::vector<double> U, double lambda, std::vector<double> beta,
                        long iterations, bool criteria_met, double eps) {
    // Non-finite iterates cannot be normalized; fall back to uniform so the
    // result still carries a well-formed (clearly non-converged) state.
    Density mu = all_finite(M) && std::accumulate(M.begin(), M.end(), 0.0) > 0.0
                     ? normalize_density(M, grid)
                     : normalize_density(std::vector<double>(grid.size(), 1.0), grid);
    if (!all_finite(beta)) std::fill(beta.begin(), beta.end(), 0.0);
    if (!all_finite(U)) std::fill(U.begin(), U.end(), 0.0);
    ErgodicSolution s{grid, params, std::move(mu), ValueField(std::move(U)), lambda, ControlField(std::move(beta)),
                      scheme, method, iterations, criteria_met, {}, 0.0, 0.0, 0.0};
    s.outcome = classify_outcome(s, eps);
    return s;
}

}  // namespace

ErgodicSolution solve_method1(const PeriodicGrid& grid, const ModelParams& params, Scheme scheme,
                              const Method1Options& opts) {
    params.validate();
    if (!(opts.eps > 0.0) || opts.max_iter < 1) throw std::invalid_argument("method 1 needs eps > 0, max_iter >= 1");
    const int n = grid.size();
    const double h = grid.step();
    const auto sun = sun_cost(grid, params.p);

    std::vector<double> M(n, 1.0 / kTwoPi);
    std::vector<double> beta(n, 0.0);
    std::vector<double> cost(n);

    TransportOperator L = build_transport_operator(grid, params, beta, scheme);
    running_cost(grid, params, M, beta, sun, cost);
    HjbSolve hjb = solve_stationary_hjb(L, cost, 0);

    std::vector<double> beta_next(n);
    double lsq_eps = 0.0;
    for (long k = 0; k < opts.max_iter; ++k) {
        extract_control(hjb.U, grid, params, scheme, beta_next);
        if (!all_finite(beta_next)) break;
        rebuild_transport_operator(grid, params, beta_next, scheme, L);
        auto [M_next, eps_next] = solve_stationary_poisson(L, h);
        lsq_eps = eps_next;
        running_cost(grid, params, M_next, beta_next, sun, cost);
        HjbSolve hjb_next = solve_stationary_hjb(L, cost, k + 1);

        const bool finite = all_finite(M_next) && all_finite(hjb_next.U) && std::isfinite(hjb_next.lambda);
        bool done = false;
        if (finite) {
            const double d_beta = l2_distance(beta, beta_next);
            const double d_lambda = std::abs(hjb.lambda - hjb_next.lambda);
            if (d_beta < opts.eps && d_lambda < opts.eps && eps_next < opts.eps) {
                done = circular_w2_lenient(M, M_next, grid) < opts.eps;
            }
        }
        M = std::move(M_next);
        beta = beta_next;
        hjb = std::move(hjb_next);
        if (!finite) break;
        if (done) {
            auto s = package(grid, params, scheme, ErgodicMethod::Method1, M, std::move(hjb.U), hjb.lambda,
                             std::move(beta), k + 1, true, opts.eps);
            s.lsq_residual = lsq_eps;
            return s;
        }
    }
    auto s = package(grid, params, scheme, ErgodicMethod::Method1, M, std::move(hjb.U), hjb.lambda, std::move(beta),
                     opts.max_iter, false, opts.eps);
    s.lsq_residual = lsq_eps;
    return s;
}

ErgodicSolution solve_method2(const PeriodicGrid& grid, const ModelParams& params, Scheme scheme,
                              const Method2Options& opts) {
    params.validate();
    if (!(opts.eps > 0.0) || opts.max_iter < 1) throw std::invalid_argument("method 2 needs eps > 0, max_iter >= 1");
    const int n = grid.size();
    const auto sun = sun_cost(grid, params.p);

    double bound = opts.initial_bound;
    for (int attempt = 0; attempt <= opts.max_bound_doublings; ++attempt, bound *= 2.0) {
        const double dt_max = cfl_dt(grid, params, bound);
        const double dt = opts.dt.value_or(dt_max);
        if (dt > dt_max * (1.0 + 1e-12)) {
            throw SolverError(fmt::format("time step {} violates the CFL limit {} for |beta| <= {}", dt, dt_max, bound),
                              0);
        }

        std::vector<double> M(n, 1.0 / kTwoPi), U(n, 0.0), beta(n, 0.0);
        std::vector<double> M_next(n), U_next(n), beta_next(n), cost(n), LU(n), LtM(n);
        TransportOperator L = build_transport_operator(grid, params, beta, scheme);

        bool bound_violated = false;
        bool done = false;
        long k = 0;
        for (; k < opts.max_iter; ++k) {
            // U^{k+1} = U^k + Δt [L_{β^k} U^k + ½β² + K c̄(M^k) + F c_sun]
            running_cost(grid, params, M, beta, sun, cost);
            L.apply(U, LU);
            double mean = 0.0;
            for (int j = 0; j < n; ++j) {
                U_next[j] = U[j] + dt * (LU[j] + cost[j]);
                mean += U_next[j];
            }
            // Λ grows U uniformly in artificial time; pin Σ U = 0.
            mean /= n;
            for (double& u : U_next) u -= mean;

            extract_control(U_next, grid, params, scheme, beta_next);
            if (!all_finite(beta_next)) break;
            const double peak = std::accumulate(beta_next.begin(), beta_next.end(), 0.0,
                                                [](double a, double b) { return std::max(a, std::abs(b)); });
            if (peak > bound) {
                bound_violated = true;
                break;
            }

            rebuild_transport_operator(grid, params, beta_next, scheme, L);
            L.apply_transpose(M, LtM);
            for (int j = 0; j < n; ++j) M_next[j] = M[j] + dt * LtM[j];

            if (l2_distance(beta, beta_next) < opts.eps) {
                done = circular_w2_lenient(M, M_next, grid) < opts.eps;
            }
            std::swap(M, M_next);
            std::swap(U, U_next);
            std::swap(beta, beta_next);
            if (done) {
                ++k;
                break;
            }
        }
        if (bound_violated && !opts.dt) continue;
        if (bound_violated) {
            throw SolverError(fmt::format("|beta| exceeded {} with a fixed time step", bound), k);
        }

        ValueField Uf(U);
        ControlField bf(all_finite(beta) ? beta : std::vector<double>(n, 0.0));
        double lambda = 0.0;
        if (all_finite(M) && std::accumulate(M.begin(), M.end(), 0.0) > 0.0) {
            lambda = ergodic_average_cost(normalize_density(M, grid), Uf, bf, params, grid);
        }
        auto s = package(grid, params, scheme, ErgodicMethod::Method2, M, std::move(U), lambda, std::move(beta), k,
                         done, opts.eps);
        s.cfl_bound = bound;
        s.dt = dt;
        return s;
    }
    throw SolverError(fmt::format("CFL bound still violated after {} doublings", opts.max_bound_doublings),
                      opts.max_iter);
}

ErgodicSolution solve_ergodic(const PeriodicGrid& grid, const ModelParams& params, const ErgodicOptions& opts) {
    if (opts.method == ErgodicMethod::Method1) {
        Method1Options o;
        o.eps = opts.eps;
        if (opts.max_iter) o.max_iter = *opts.max_iter;
        return solve_method1(grid, params, opts.scheme, o);
    }
    Method2Options o;
    o.eps = opts.eps;
    if (opts.max_iter) o.max_iter = *opts.max_iter;
    return solve_method2(grid, params, opts.scheme, o);
}

double phase_offset(const Density& mu, const PeriodicGrid& grid, double p) {
    const auto z = order_parameter(mu.values(), grid) * std::polar(1.0, -p);
    if (std::abs(z) < 1e-8) return 0.0;
    return std::arg(z);
}

OutcomeClass classify_outcome(const ErgodicSolution& candidate, double eps) {
    if (!candidate.criteria_met) return {Outcome::NotConverged, InvalidReason::None};
    if (!(std::abs(phase_offset(candidate.mu, candidate.grid, candidate.params.p)) < 0.1)) {
        return {Outcome::InvalidSolution, InvalidReason::PhaseAngle};
    }
    if (!(candidate.mu.min() > -eps)) return {Outcome::InvalidSolution, InvalidReason::Negativity};
    return {Outcome::Converged, InvalidReason::None};
}

double ergodic_average_cost(const Density& mu, const ValueField& /*U*/, const ControlField& beta,
                            const ModelParams& params, const PeriodicGrid& grid) {
    const int n = grid.size();
    const auto sun = sun_cost(grid, params.p);
    std::vector<double> cost(n);
    running_cost(grid, params, mu.values(), beta.values(), sun, cost);
    double acc = 0.0;
    for (int j = 0; j < n; ++j) acc += cost[j] * mu[j];
    return acc * grid.step();
}

ErgodicResidual ergodic_residual(const ErgodicSolution& s) {
    const int n = s.grid.size();
    const auto L = build_transport_operator(s.grid, s.params, s.beta.values(), s.scheme);
    const auto sun = sun_cost(s.grid, s.params.p);
    std::vector<double> cost(n);
    running_cost(s.grid, s.params, s.mu.values(), s.beta.values(), sun, cost);
    const auto LU = L.apply(s.U.values());
    const auto LtM = L.apply_transpose(s.mu.values());
    ErgodicResidual r;
    for (int j = 0; j < n; ++j) {
        const double g = LU[j] + cost[j];
        r.hjb_mean += g / n;
        r.hjb_inf = std::max(r.hjb_inf, std::abs(g - s.lambda));
        r.poisson_inf = std::max(r.poisson_inf, std::abs(LtM[j]));
    }
    return r;
}

}  // namespace circadian
