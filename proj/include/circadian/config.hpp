#pragma once

#include "circadian/ergodic.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace circadian {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Everything a command needs. Defaults are the reference set.
struct RunConfig {
    double omega_S = kTwoPi / 24.0;
    double omega_0 = kTwoPi / 24.5;
    double sigma = 0.1;
    double K = 0.01;
    double F = 0.01;
    int p_hours = 9;  ///< destination, whole zones east (negative: west)
    int n = 120;
    Scheme scheme = Scheme::Centered;
    ErgodicMethod method = ErgodicMethod::Method1;
    double eps = 1e-5;
    double eps_w = 0.01;
    double eps_z = 0.2;
    double horizon_days = 20.0;
    double T_days = 100.0;
    std::optional<long> max_iter;
    std::string out_dir = "out";
    double subsample_hours = 1.0;

    /// Model at the home zone (p = 0).
    ModelParams home() const;
    /// Destination angle p_hours·ω_S wrapped into [-π, π).
    double destination() const;
    PeriodicGrid grid() const;

    /// Throws ConfigError when a value is out of range.
    void validate() const;

    bool operator==(const RunConfig&) const = default;
};

/// Parses `key = value` lines; `#` starts a comment. Numbers may be written as
/// `2pi/24.5` or `pi/12`. Unknown or repeated keys are errors.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& file);

/// Number in config syntax (plain, or with a `pi` factor as above).
double parse_config_number(std::string_view text);

/// Sets one key from its textual value, as a config line would.
void set_config_value(RunConfig& cfg, std::string_view key, std::string_view value);

/// Canonical text form; parse_config(render_config(c)) == c.
std::string render_config(const RunConfig& cfg);

/// FNV-1a over the keys that determine the ergodic solution.
std::uint64_t solver_fingerprint(const RunConfig& cfg);

}  // namespace circadian
