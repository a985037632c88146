#include "circadian/operators.hpp"

#include <algorithm>
#include <fmt/format.h>

namespace circadian {

std::string_view to_string(Scheme s) noexcept {
    return s == Scheme::Monotone ? "monotone" : "centered";
}

Scheme parse_scheme(std::string_view text) {
    if (text == "monotone") return Scheme::Monotone;
    if (text == "centered" || text == "centred") return Scheme::Centered;
    throw std::invalid_argument(fmt::format("unknown scheme '{}' (expected monotone|centered)", text));
}

TransportOperator::TransportOperator(std::vector<double> lower, std::vector<double> diag,
                                     std::vector<double> upper, Scheme scheme)
    : lower_(std::move(lower)), diag_(std::move(diag)), upper_(std::move(upper)), scheme_(scheme) {
    if (lower_.size() != diag_.size() || upper_.size() != diag_.size() || diag_.size() < 3) {
        throw std::invalid_argument("transport operator bands must share a length >= 3");
    }
}

void TransportOperator::apply(std::span<const double> u, std::span<double> out) const {
    const std::size_t n = diag_.size();
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t jm = j == 0 ? n - 1 : j - 1;
        const std::size_t jp = j + 1 == n ? 0 : j + 1;
        out[j] = lower_[j] * u[jm] + diag_[j] * u[j] + upper_[j] * u[jp];
    }
}

void TransportOperator::apply_transpose(std::span<const double> m, std::span<double> out) const {
    // (Lᵀ m)_k = upper_{k-1} m_{k-1} + diag_k m_k + lower_{k+1} m_{k+1}
    const std::size_t n = diag_.size();
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t km = k == 0 ? n - 1 : k - 1;
        const std::size_t kp = k + 1 == n ? 0 : k + 1;
        out[k] = upper_[km] * m[km] + diag_[k] * m[k] + lower_[kp] * m[kp];
    }
}

std::vector<double> TransportOperator::apply(std::span<const double> u) const {
    std::vector<double> out(diag_.size());
    apply(u, out);
    return out;
}

std::vector<double> TransportOperator::apply_transpose(std::span<const double> m) const {
    std::vector<double> out(diag_.size());
    apply_transpose(m, out);
    return out;
}

Eigen::MatrixXd TransportOperator::dense() const {
    const int n = size();
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    for (int j = 0; j < n; ++j) {
        A(j, (j + n - 1) % n) += lower_[j];
        A(j, j) += diag_[j];
        A(j, (j + 1) % n) += upper_[j];
    }
    return A;
}

std::vector<double> sun_cost(const PeriodicGrid& grid, double p) {
    std::vector<double> out(grid.size());
    for (int j = 0; j < grid.size(); ++j) {
        const double s = std::sin((p - grid.phi(j)) / 2.0);
        out[j] = 0.5 * s * s;
    }
    return out;
}

void interaction_cost(const PeriodicGrid& grid, std::span<const double> mu, std::span<double> out) {
    const int n = grid.size();
    const double dphi = grid.step();
    double mass = 0.0, c = 0.0, s = 0.0;
    for (int k = 0; k < n; ++k) {
        const double w = mu[k] * dphi;
        mass += w;
        c += std::cos(grid.phi(k)) * w;
        s += std::sin(grid.phi(k)) * w;
    }
    for (int j = 0; j < n; ++j) {
        out[j] = 0.25 * (mass - std::cos(grid.phi(j)) * c - std::sin(grid.phi(j)) * s);
    }
}

std::vector<double> interaction_cost(const PeriodicGrid& grid, std::span<const double> mu) {
    if (mu.size() != static_cast<std::size_t>(grid.size())) {
        throw std::invalid_argument("density length does not match grid");
    }
    std::vector<double> out(grid.size());
    interaction_cost(grid, mu, out);
    return out;
}

InteractionKernel::InteractionKernel(const PeriodicGrid& grid)
    : dphi_(grid.step()), cos_(grid.size()), sin_(grid.size()) {
    for (int j = 0; j < grid.size(); ++j) {
        cos_[j] = std::cos(grid.phi(j));
        sin_[j] = std::sin(grid.phi(j));
    }
}

void InteractionKernel::apply(std::span<const double> mu, std::span<double> out) const {
    const std::size_t n = cos_.size();
    double mass = 0.0, c = 0.0, s = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        mass += mu[k];
        c += cos_[k] * mu[k];
        s += sin_[k] * mu[k];
    }
    mass *= dphi_;
    c *= dphi_;
    s *= dphi_;
    for (std::size_t j = 0; j < n; ++j) out[j] = 0.25 * (mass - cos_[j] * c - sin_[j] * s);
}

void rebuild_transport_operator(const PeriodicGrid& grid, const ModelParams& params,
                                std::span<const double> beta, Scheme scheme, TransportOperator& op) {
    const int n = grid.size();
    const double h = grid.step();
    const double diffusion = 0.5 * params.sigma * params.sigma / (h * h);
    const double base = params.detuning();
    for (int j = 0; j < n; ++j) {
        const double drift = base + beta[j];
        double lo = diffusion, up = diffusion;
        if (scheme == Scheme::Monotone) {
            const double plus = std::max(drift, 0.0);
            const double minus = std::min(drift, 0.0);
            up += plus / h;
            lo -= minus / h;
        } else {
            up += drift / (2.0 * h);
            lo -= drift / (2.0 * h);
        }
        op.lower_[j] = lo;
        op.upper_[j] = up;
        op.diag_[j] = -(lo + up);
    }
    op.scheme_ = scheme;
}

TransportOperator build_transport_operator(const PeriodicGrid& grid, const ModelParams& params,
                                           std::span<const double> beta, Scheme scheme) {
    if (beta.size() != static_cast<std::size_t>(grid.size())) {
        throw std::invalid_argument("control length does not match grid");
    }
    for (double b : beta) {
        if (!std::isfinite(b)) throw std::invalid_argument("control has non-finite entries");
    }
    const auto n = static_cast<std::size_t>(grid.size());
    TransportOperator op{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n), scheme};
    rebuild_transport_operator(grid, params, beta, scheme, op);
    return op;
}

void extract_control(std::span<const double> U, const PeriodicGrid& grid, const ModelParams& params,
                     Scheme scheme, std::span<double> beta) {
    const int n = grid.size();
    const double h = grid.step();
    const double base = params.detuning();
    for (int j = 0; j < n; ++j) {
        const double um = U[grid.wrap(j - 1)];
        const double up = U[grid.wrap(j + 1)];
        if (scheme == Scheme::Centered) {
            beta[j] = -(up - um) / (2.0 * h);
            continue;
        }
        const double back = (U[j] - um) / h;
        const double fwd = (up - U[j]) / h;
        const double l = base - back;
        const double r = base - fwd;
        if (l < 0.0 && r < 0.0) {
            beta[j] = -back;
        } else if (l > 0.0 && r > 0.0) {
            beta[j] = -fwd;
        } else {
            beta[j] = 0.0;
        }
    }
}

std::vector<double> extract_control(std::span<const double> U, const PeriodicGrid& grid,
                                    const ModelParams& params, Scheme scheme) {
    if (U.size() != static_cast<std::size_t>(grid.size())) {
        throw std::invalid_argument("value field length does not match grid");
    }
    std::vector<double> beta(grid.size());
    extract_control(U, grid, params, scheme, beta);
    return beta;
}

double cfl_dt(const PeriodicGrid& grid, const ModelParams& params, double bound) {
    if (!(bound >= 0.0)) throw std::invalid_argument("CFL control bound must be non-negative");
    const double h = grid.step();
    const double s2 = params.sigma * params.sigma;
    return 1.0 / (2.0 * (s2 / (h * h) + (std::abs(params.omega_S - params.omega_0) + bound) / h));
}

}  // namespace circadian
