#pragma once

#include "circadian/config.hpp"

#include <optional>
#include <string>
#include <vector>

namespace circadian {

enum class RecoveryMode { Ergodic, Mfg };

std::string_view to_string(RecoveryMode m) noexcept;
RecoveryMode parse_mode(std::string_view text);

/// One swept parameter over a list of values; every other setting from `base`.
struct SweepSpec {
    std::string param;  ///< p, omega_0, sigma, K or F
    std::vector<double> values;
    RunConfig base;
    RecoveryMode mode = RecoveryMode::Ergodic;
    unsigned workers = 0;  ///< 0: hardware concurrency
};

/// One trip. Failed points keep their row with the outcome set and NaN numbers.
struct SweepRow {
    std::string param;
    double value = 0.0;
    std::string direction;  ///< east, west or home
    int p_hours = 0;
    std::string outcome;    ///< converged, not_converged, invalid_solution, mfg_not_converged or error
    std::optional<double> tau_w_hours;  ///< nullopt: not recovered within the horizon
    std::optional<double> tau_z_hours;
    double f_alpha = 0.0;
    double f_osc = 0.0;
    double f_sun = 0.0;
    double f_total = 0.0;
    std::string error;
};

/// Parameter name check and value coercion; throws ConfigError.
void validate_sweep(const SweepSpec& spec);

/// For p each value is a trip of that many zones. For any other parameter each
/// value is evaluated east and west at ±|base.p_hours|. Rows are sorted by value,
/// then east before west.
std::vector<SweepRow> run_sweep(const SweepSpec& spec);

std::string sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace circadian
