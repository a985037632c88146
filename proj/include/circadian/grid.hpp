#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace circadian {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Uniform periodic discretization of [0, 2π) with `n` points at φ_j = jΔφ.
class PeriodicGrid {
public:
    explicit PeriodicGrid(int n);

    int size() const noexcept { return n_; }
    double step() const noexcept { return dphi_; }
    double phi(long j) const noexcept { return static_cast<double>(wrap(j)) * dphi_; }

    /// Cyclic index: -1 -> n-1, n -> 0.
    int wrap(long j) const noexcept {
        long r = j % n_;
        return static_cast<int>(r < 0 ? r + n_ : r);
    }

    bool operator==(const PeriodicGrid&) const = default;

private:
    int n_;
    double dphi_;
};

PeriodicGrid make_grid(int n);

/// Wraps an angle into [-π, π).
double wrap_angle(double angle) noexcept;

/// Model constants of the oscillator population. Angles are radians, times hours.
struct ModelParams {
    double omega_S = kTwoPi / 24.0;   ///< sun frequency
    double omega_0 = kTwoPi / 24.5;   ///< intrinsic oscillator frequency
    double sigma = 0.1;               ///< noise intensity, rad/sqrt(h)
    double K = 0.01;                  ///< weight of mutual synchronization
    double F = 0.01;                  ///< weight of sun synchronization
    double p = 0.0;                   ///< time-zone angle in [-π, π)

    double detuning() const noexcept { return omega_0 - omega_S; }

    /// Throws std::invalid_argument when an invariant is broken.
    void validate() const;

    /// Reference values with the traveller at `p_hours` time zones east.
    static ModelParams reference(int p_hours = 0);

    bool operator==(const ModelParams&) const = default;
};

/// p = hours·ω_S, wrapped into [-π, π). Twelve zones east and west coincide.
double time_zone_angle(int hours, double omega_S);

/// Number of grid points a field must be shifted for time-zone angle `p`.
/// Throws when n·p/(2π) is not an integer.
int rotation_steps(const PeriodicGrid& grid, double p);

namespace detail {

class FieldBase {
public:
    std::size_t size() const noexcept { return values_.size(); }
    std::span<const double> values() const noexcept { return values_; }
    double operator[](std::size_t j) const noexcept { return values_[j]; }

    /// Cyclic read: index j + n reads the same entry as j.
    double at_wrapped(long j) const noexcept {
        const long n = static_cast<long>(values_.size());
        long r = j % n;
        return values_[static_cast<std::size_t>(r < 0 ? r + n : r)];
    }

    const std::vector<double>& vector() const noexcept { return values_; }

protected:
    FieldBase() = default;
    explicit FieldBase(std::vector<double> v) : values_(std::move(v)) {}
    std::vector<double> values_;
};

}  // namespace detail

/// Probability density per radian sampled on the grid: Σ M_j Δφ = 1.
class Density : public detail::FieldBase {
public:
    /// Adopts already-normalized values; rejects a total mass off by more than `tol`.
    Density(std::vector<double> values, const PeriodicGrid& grid, double tol = 1e-8);

    double mass(double dphi) const noexcept;
    double min() const noexcept;

    bool operator==(const Density&) const = default;
};

/// Value function samples V(jΔφ).
class ValueField : public detail::FieldBase {
public:
    ValueField() = default;
    explicit ValueField(std::vector<double> values) : FieldBase(std::move(values)) {}
    bool operator==(const ValueField&) const = default;
};

/// Discrete control β_j ≈ -∂_φ V(jΔφ). Entries must be finite.
class ControlField : public detail::FieldBase {
public:
    ControlField() = default;
    explicit ControlField(std::vector<double> values);
    double max_abs() const noexcept;
    bool operator==(const ControlField&) const = default;
};

/// Rescales `values` so that Σ values_j Δφ = 1.
Density normalize_density(std::span<const double> values, const PeriodicGrid& grid);

/// out[j] = in[(j - r) mod n].
std::vector<double> rotate_field(std::span<const double> field, long r);

/// out[j] = in[(-j) mod n], the grid image of φ -> -φ.
std::vector<double> reflect_field(std::span<const double> field);

/// Row-major block of equally sized slices (time index x grid index).
class SliceMatrix {
public:
    SliceMatrix() = default;
    SliceMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const noexcept { return {data_.data() + i * cols_, cols_}; }

    void push_row(std::span<const double> r);

    const std::vector<double>& data() const noexcept { return data_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

}  // namespace circadian
