#include "circadian/grid.hpp"

#include <algorithm>
#include <fmt/format.h>
#include <numeric>

namespace circadian {

PeriodicGrid::PeriodicGrid(int n) : n_(n), dphi_(0.0) {
    if (n < 3) {
        throw std::invalid_argument(fmt::format("grid needs at least 3 points, got {}", n));
    }
    dphi_ = kTwoPi / n;
}

PeriodicGrid make_grid(int n) { return PeriodicGrid(n); }

double wrap_angle(double angle) noexcept {
    double r = std::fmod(angle + std::numbers::pi, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    return r - std::numbers::pi;
}

void ModelParams::validate() const {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw std::invalid_argument(fmt::format("sigma must be positive, got {}", sigma));
    }
    if (!(K >= 0.0) || !(F >= 0.0)) {
        throw std::invalid_argument(fmt::format("weights must be non-negative (K={}, F={})", K, F));
    }
    if (!std::isfinite(omega_S) || !std::isfinite(omega_0)) {
        throw std::invalid_argument("frequencies must be finite");
    }
    if (!(p >= -std::numbers::pi) || !(p < std::numbers::pi)) {
        throw std::invalid_argument(fmt::format("time-zone angle {} outside [-pi, pi)", p));
    }
}

ModelParams ModelParams::reference(int p_hours) {
    ModelParams m;
    m.p = time_zone_angle(p_hours, m.omega_S);
    return m;
}

double time_zone_angle(int hours, double omega_S) {
    return wrap_angle(hours * omega_S);
}

int rotation_steps(const PeriodicGrid& grid, double p) {
    const double r = grid.size() * p / kTwoPi;
    const double nearest = std::round(r);
    if (std::abs(r - nearest) > 1e-9) {
        throw std::invalid_argument(fmt::format(
            "time-zone angle {} is not a whole number of grid steps on n={} (r={})", p, grid.size(), r));
    }
    return static_cast<int>(nearest);
}

Density::Density(std::vector<double> values, const PeriodicGrid& grid, double tol)
    : FieldBase(std::move(values)) {
    if (values_.size() != static_cast<std::size_t>(grid.size())) {
        throw std::invalid_argument(
            fmt::format("density has {} entries, grid has {}", values_.size(), grid.size()));
    }
    const double m = mass(grid.step());
    if (!(std::abs(m - 1.0) <= tol)) {
        throw std::invalid_argument(fmt::format("density mass {} differs from 1 by more than {}", m, tol));
    }
}

double Density::mass(double dphi) const noexcept {
    return std::accumulate(values_.begin(), values_.end(), 0.0) * dphi;
}

double Density::min() const noexcept { return *std::min_element(values_.begin(), values_.end()); }

ControlField::ControlField(std::vector<double> values) : FieldBase(std::move(values)) {
    for (double b : values_) {
        if (!std::isfinite(b)) throw std::invalid_argument("control field has non-finite entries");
    }
}

double ControlField::max_abs() const noexcept {
    double m = 0.0;
    for (double b : values_) m = std::max(m, std::abs(b));
    return m;
}

Density normalize_density(std::span<const double> values, const PeriodicGrid& grid) {
    if (values.size() != static_cast<std::size_t>(grid.size())) {
        throw std::invalid_argument(
            fmt::format("density has {} entries, grid has {}", values.size(), grid.size()));
    }
    const double total = std::accumulate(values.begin(), values.end(), 0.0) * grid.step();
    if (!(total > 0.0) || !std::isfinite(total)) {
        throw std::invalid_argument(fmt::format("cannot normalize density with total mass {}", total));
    }
    std::vector<double> out(values.begin(), values.end());
    for (double& v : out) v /= total;
    return Density(std::move(out), grid, 1e-10);
}

std::vector<double> rotate_field(std::span<const double> field, long r) {
    const long n = static_cast<long>(field.size());
    std::vector<double> out(field.size());
    if (n == 0) return out;
    long shift = r % n;
    if (shift < 0) shift += n;
    for (long j = 0; j < n; ++j) {
        long src = j - shift;
        if (src < 0) src += n;
        out[static_cast<std::size_t>(j)] = field[static_cast<std::size_t>(src)];
    }
    return out;
}

std::vector<double> reflect_field(std::span<const double> field) {
    const std::size_t n = field.size();
    std::vector<double> out(n);
    for (std::size_t j = 0; j < n; ++j) out[j] = field[(n - j) % n];
    return out;
}

void SliceMatrix::push_row(std::span<const double> r) {
    if (rows_ == 0 && cols_ == 0) cols_ = r.size();
    if (r.size() != cols_) throw std::invalid_argument("slice width mismatch");
    data_.insert(data_.end(), r.begin(), r.end());
    ++rows_;
}

}  // namespace circadian
