#include "circadian/oracle_check.hpp"

#include "circadian/oracle.hpp"

#include <algorithm>
#include <fmt/format.h>

namespace circadian {

namespace {

double max_diff(std::span<const double> a, std::span<const double> b) {
    double d = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) d = std::max(d, std::abs(a[j] - b[j]));
    return d;
}

ErgodicSolution solve(const RunConfig& cfg, const ModelParams& params, int n, double eps) {
    ErgodicOptions o{cfg.method, cfg.scheme, eps, cfg.max_iter};
    return solve_ergodic(PeriodicGrid(n), params, o);
}

}  // namespace

bool OracleCheckReport::all_pass() const {
    return std::all_of(lines.begin(), lines.end(), [](const OracleCheckLine& l) { return l.informational || l.pass; });
}

std::string OracleCheckReport::render() const {
    std::string out;
    for (const auto& l : lines) {
        out += fmt::format("{:<40} {:>14.6e}  {:<22} {}\n", l.name, l.value, l.bound, l.informational ? "info" : (l.pass ? "PASS" : "FAIL"));
    }
    return out;
}

OracleCheckReport oracle_check(const RunConfig& cfg) {
    cfg.validate();
    OracleCheckReport rep;
    auto add = [&](std::string name, double value, std::string bound, bool pass) {
        rep.lines.push_back({std::move(name), value, std::move(bound), pass, false});
    };
    auto info = [&](std::string name, double value, std::string note) {
        rep.lines.push_back({std::move(name), value, std::move(note), true, true});
    };
    const bool centered = cfg.scheme == Scheme::Centered;

    ModelParams base = cfg.home();
    base.omega_0 = base.omega_S;
    base.K = 0.0;

    // closed form at n and n/2
    const PeriodicGrid grid = cfg.grid();
    const auto exact = special_case_solution(base.F, base.sigma, grid);
    const auto fine = solve(cfg, base, cfg.n, cfg.eps);
    const double err_fine = max_diff(fine.mu.values(), exact.mu_K0.values());
    add("K=0 outcome", static_cast<double>(fine.iterations), std::string(to_string(fine.outcome.kind)),
        fine.outcome.kind == Outcome::Converged);
    info(fmt::format("K=0 |mu - mu_exact|_inf (n={})", cfg.n), err_fine, err_fine <= 1e-3 ? "<= 1e-3" : "> 1e-3");
    const double lam_err = std::abs(fine.lambda - exact.lambda_K0);
    add("K=0 |Lambda - lambda_exact|", lam_err, "<= 1e-4", lam_err <= 1e-4);
    if (cfg.n % 2 == 0 && cfg.n / 2 >= 3 && base.F > 0.0) {
        const PeriodicGrid coarse_grid(cfg.n / 2);
        const auto coarse_exact = special_case_solution(base.F, base.sigma, coarse_grid);
        const auto coarse = solve(cfg, base, cfg.n / 2, cfg.eps);
        const double err_coarse = max_diff(coarse.mu.values(), coarse_exact.mu_K0.values());
        const double ratio = err_coarse / err_fine;
        add(fmt::format("K=0 error ratio n={}/n={}", cfg.n / 2, cfg.n), ratio, centered ? "in [3, 5]" : "in [1.5, 2.5]",
            centered ? (ratio >= 3.0 && ratio <= 5.0) : (ratio >= 1.5 && ratio <= 2.5));
    }
    const double printed = printed_special_case_lambda(base.F, base.sigma);
    info("K=0 |Lambda - printed closed form|", std::abs(fine.lambda - printed), "printed variant");

    // F = 0: uniform
    ModelParams flat = base;
    flat.F = 0.0;
    const auto uniform = solve(cfg, flat, cfg.n, cfg.eps);
    const double dev = max_diff(uniform.mu.values(), std::vector<double>(cfg.n, 1.0 / kTwoPi));
    add("F=0 |mu - 1/2pi|_inf", dev, "<= 1e-12", dev <= 1e-12);
    add("F=0 |Lambda|", std::abs(uniform.lambda), "<= 1e-12", std::abs(uniform.lambda) <= 1e-12);

    // first order in K
    if (base.F > 0.0) {
        constexpr double kTightEps = 1e-7;
        const auto l1 = perturbation_lambda1(exact.mu_K0, grid);
        const auto mu1 = perturbation_mu1(exact.mu_K0, exact.W_K0, l1.weighted, base.sigma, grid);
        const auto s0 = solve(cfg, base, cfg.n, kTightEps);
        auto residual = [&](double K, double& dlam) {
            ModelParams p = base;
            p.K = K;
            const auto s = solve(cfg, p, cfg.n, kTightEps);
            dlam = (s.lambda - s0.lambda) / K;
            double r = 0.0;
            for (int j = 0; j < cfg.n; ++j) r = std::max(r, std::abs(s.mu[j] - s0.mu[j] - K * mu1[j]));
            return r;
        };
        constexpr double kK = 1e-3;
        double dlam = 0.0, dlam_half = 0.0;
        const double r = residual(kK, dlam);
        const double r_half = residual(0.5 * kK, dlam_half);
        info("K=1e-3 |mu_K - mu_0 - K mu1|_inf", r, "");
        info("K=1e-3 C = residual / K^2", r / (kK * kK), "");
        add("residual ratio K=1e-3 / K=5e-4", r / r_half, ">= 2.5 (superlinear)", r / r_half >= 2.5);
        const double rel = std::abs(dlam_half - l1.weighted) / l1.weighted;
        add("dLambda/dK vs weighted lambda1 (rel)", rel, "<= 5e-2", rel <= 5e-2);
        info("dLambda/dK vs literal lambda1 (rel)", std::abs(dlam_half - l1.literal) / l1.literal, "literal variant");
    }
    return rep;
}

}  // namespace circadian
