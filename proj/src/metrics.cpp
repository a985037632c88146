#include "circadian/metrics.hpp"

#include "circadian/operators.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace circadian {

std::complex<double> order_parameter(std::span<const double> mu, const PeriodicGrid& grid) {
    double re = 0.0, im = 0.0;
    for (int j = 0; j < grid.size(); ++j) {
        re += std::cos(grid.phi(j)) * mu[j];
        im += std::sin(grid.phi(j)) * mu[j];
    }
    return {re * grid.step(), im * grid.step()};
}

namespace {

std::vector<double> to_weights(std::span<const double> m, const PeriodicGrid& grid, bool strict) {
    if (m.size() != static_cast<std::size_t>(grid.size())) {
        throw std::invalid_argument("density length does not match grid");
    }
    std::vector<double> w(m.size());
    double total = 0.0;
    for (std::size_t j = 0; j < m.size(); ++j) {
        if (strict && m[j] < -kNegativeMassTolerance) {
            throw std::domain_error(
                fmt::format("density entry {} = {} is below the negativity tolerance", j, m[j]));
        }
        w[j] = std::max(m[j], 0.0);
        total += w[j];
    }
    if (!(total > 0.0)) throw std::domain_error("density has no positive mass");
    for (double& x : w) x /= total;
    return w;
}

}  // namespace

namespace {

/// ∫₀¹ |x_a(t) - x_b(t - θ)|² dt for the quantile functions of the atoms, with b
/// lifted periodically (x_b(s + 1) = x_b(s) + 2π). Atom positions are counted
/// from `start`.
double shifted_cost(const std::vector<double>& Fa, const std::vector<double>& Fb, double theta, double h) {
    const int n = static_cast<int>(Fa.size());
    const double s0 = -theta;
    long k = static_cast<long>(std::floor(s0));
    const double r = s0 - static_cast<double>(k);
    int i = 0, j = 0;
    while (j < n - 1 && Fb[j] <= r) ++j;
    double ea = Fa[0];
    double eb = Fb[j] + static_cast<double>(k) + theta;
    double t = 0.0, cost = 0.0;
    const double period = static_cast<double>(n) * h;
    for (;;) {
        const double next = std::min({ea, eb, 1.0});
        if (next > t) {
            const double d = static_cast<double>(i - j) * h - static_cast<double>(k) * period;
            cost += (next - t) * d * d;
            t = next;
        }
        if (t >= 1.0) break;
        if (ea <= t && i < n - 1) {
            ea = Fa[++i];
        } else if (eb <= t) {
            if (++j == n) {
                j = 0;
                ++k;
            }
            eb = Fb[j] + static_cast<double>(k) + theta;
        } else {
            break;
        }
    }
    return cost;
}

double ordered_w2(std::span<const double> wa, std::span<const double> wb, int start, double h) {
    const int n = static_cast<int>(wa.size());
    std::vector<double> Fa(n), Fb(n);
    double ca = 0.0, cb = 0.0;
    for (int q = 0; q < n; ++q) {
        ca += wa[(start + q) % n];
        cb += wb[(start + q) % n];
        Fa[q] = ca;
        Fb[q] = cb;
    }
    for (int q = 0; q < n; ++q) {
        Fa[q] /= ca;
        Fb[q] /= cb;
    }
    Fa[n - 1] = Fb[n - 1] = 1.0;

    // convex and piecewise linear in θ, kinks at F_i - G_j
    std::vector<double> cand;
    cand.reserve(static_cast<std::size_t>(n) * n + 1);
    cand.push_back(0.0);
    for (int p = 0; p < n; ++p) {
        for (int q = 0; q < n; ++q) cand.push_back(Fa[p] - Fb[q]);
    }
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());

    std::size_t lo = 0, hi = cand.size() - 1;
    while (hi - lo > 2) {
        const std::size_t m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
        if (shifted_cost(Fa, Fb, cand[m1], h) <= shifted_cost(Fa, Fb, cand[m2], h)) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t c = lo; c <= hi; ++c) best = std::min(best, shifted_cost(Fa, Fb, cand[c], h));
    return std::sqrt(std::max(best, 0.0));
}

}  // namespace

double circular_w2_weights(std::span<const double> wa, std::span<const double> wb, const PeriodicGrid& grid) {
    const int n = grid.size();
    if (wa.size() != static_cast<std::size_t>(n) || wb.size() != static_cast<std::size_t>(n)) {
        throw std::invalid_argument("weight length does not match grid");
    }
    // canonical start index and argument order
    int start = 0;
    for (int j = 1; j < n; ++j) {
        if (wa[j] + wb[j] > wa[start] + wb[start]) start = j;
    }
    bool swap = false;
    for (int q = 0; q < n; ++q) {
        const int j = (start + q) % n;
        if (wa[j] != wb[j]) {
            swap = wb[j] < wa[j];
            break;
        }
    }
    return swap ? ordered_w2(wb, wa, start, grid.step()) : ordered_w2(wa, wb, start, grid.step());
}

double circular_w2(std::span<const double> a, std::span<const double> b, const PeriodicGrid& grid) {
    return circular_w2_weights(to_weights(a, grid, true), to_weights(b, grid, true), grid);
}

double circular_w2_lenient(std::span<const double> a, std::span<const double> b, const PeriodicGrid& grid) {
    return circular_w2_weights(to_weights(a, grid, false), to_weights(b, grid, false), grid);
}

std::optional<double> recovery_time_w(const SampledPath& path, std::span<const double> target,
                                      const PeriodicGrid& grid, double eps_w) {
    if (!(eps_w > 0.0)) throw std::invalid_argument("eps_w must be positive");
    const auto wt = to_weights(target, grid, true);
    for (std::size_t i = 0; i < path.times.size(); ++i) {
        if (circular_w2_weights(to_weights(path.densities.row(i), grid, true), wt, grid) < eps_w) {
            return path.times[i];
        }
    }
    return std::nullopt;
}

std::optional<double> recovery_time_z(const SampledPath& path, std::complex<double> z_star, double p,
                                      const PeriodicGrid& grid, double eps_z) {
    if (!(eps_z > 0.0)) throw std::invalid_argument("eps_z must be positive");
    const std::complex<double> target = std::polar(1.0, p) * z_star;
    for (std::size_t i = 0; i < path.times.size(); ++i) {
        if (std::abs(order_parameter(path.densities.row(i), grid) - target) < eps_z) return path.times[i];
    }
    return std::nullopt;
}

namespace {

double trapezoid(std::span<const double> t, std::span<const double> f, double upto) {
    double acc = 0.0;
    for (std::size_t i = 1; i < t.size(); ++i) {
        if (t[i - 1] >= upto) break;
        if (t[i] <= upto) {
            acc += 0.5 * (f[i] + f[i - 1]) * (t[i] - t[i - 1]);
        } else {
            const double s = (upto - t[i - 1]) / (t[i] - t[i - 1]);
            const double fu = f[i - 1] + s * (f[i] - f[i - 1]);
            acc += 0.5 * (fu + f[i - 1]) * (upto - t[i - 1]);
        }
    }
    return acc;
}

}  // namespace

RecoveryReport cost_traces(const SampledPath& path, const ModelParams& params, const PeriodicGrid& grid,
                           double window_hours) {
    const std::size_t rows = path.times.size();
    const auto n = static_cast<std::size_t>(grid.size());
    if (path.densities.rows() != rows || path.controls.rows() != rows || (rows > 0 && path.densities.cols() != n) ||
        (rows > 0 && path.controls.cols() != n)) {
        throw std::invalid_argument("path shape does not match its grid");
    }
    const double h = grid.step();
    const auto sun = sun_cost(grid, params.p);
    std::vector<double> cbar(n);

    RecoveryReport rep;
    rep.times = path.times;
    rep.trace_alpha.resize(rows);
    rep.trace_osc.resize(rows);
    rep.trace_sun.resize(rows);
    rep.trace_total.resize(rows);
    rep.z_path.resize(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        const auto m = path.densities.row(i);
        const auto b = path.controls.row(i);
        interaction_cost(grid, m, cbar);
        double fa = 0.0, fo = 0.0, fs = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            fa += 0.5 * b[j] * b[j] * m[j];
            fo += cbar[j] * m[j];
            fs += sun[j] * m[j];
        }
        fa *= h;
        fo *= h;
        fs *= h;
        rep.trace_alpha[i] = fa;
        rep.trace_osc[i] = fo;
        rep.trace_sun[i] = fs;
        rep.trace_total[i] = (fa + params.K * fo + params.F * fs) / (1.0 + params.K + params.F);
        rep.z_path[i] = order_parameter(m, grid);
    }
    rep.f_alpha = trapezoid(rep.times, rep.trace_alpha, window_hours);
    rep.f_osc = trapezoid(rep.times, rep.trace_osc, window_hours);
    rep.f_sun = trapezoid(rep.times, rep.trace_sun, window_hours);
    rep.f_total = trapezoid(rep.times, rep.trace_total, window_hours);
    return rep;
}

RecoveryReport recovery_report(const SampledPath& path, std::span<const double> unrotated_target,
                               const ModelParams& params, const PeriodicGrid& grid,
                               const RecoveryThresholds& thresholds) {
    RecoveryReport rep = cost_traces(path, params, grid, thresholds.window_hours);
    const int r = rotation_steps(grid, params.p);
    const auto target = rotate_field(unrotated_target, r);
    const auto wt = to_weights(target, grid, true);
    rep.w2_path.resize(path.times.size());
    for (std::size_t i = 0; i < path.times.size(); ++i) {
        rep.w2_path[i] = circular_w2_weights(to_weights(path.densities.row(i), grid, true), wt, grid);
        if (!rep.tau_w && rep.w2_path[i] < thresholds.eps_w) rep.tau_w = path.times[i];
    }
    const auto z_target = std::polar(1.0, params.p) * order_parameter(unrotated_target, grid);
    for (std::size_t i = 0; i < path.times.size(); ++i) {
        if (std::abs(rep.z_path[i] - z_target) < thresholds.eps_z) {
            rep.tau_z = path.times[i];
            break;
        }
    }
    return rep;
}

}  // namespace circadian
