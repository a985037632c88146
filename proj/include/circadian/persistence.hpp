#pragma once

#include "circadian/config.hpp"
#include "circadian/ergodic.hpp"
#include "circadian/metrics.hpp"

#include <filesystem>
#include <string>

namespace circadian {

inline constexpr int kSolutionFormatVersion = 1;

/// Versioned JSON: header (version, config echo, fingerprint, scheme, method,
/// outcome) and the arrays with 17 significant digits.
std::string solution_to_json(const ErgodicSolution& s, const RunConfig& cfg);

struct StoredSolution {
    ErgodicSolution solution;
    RunConfig config;
    std::uint64_t fingerprint = 0;
};

/// Throws std::runtime_error on malformed or unsupported files.
StoredSolution solution_from_json(std::string_view text);

void save_solution(const std::filesystem::path& file, const ErgodicSolution& s, const RunConfig& cfg);
StoredSolution load_solution(const std::filesystem::path& file);

/// `t_hours,phi_0,...,phi_{n-1}` with one row per sample.
std::string path_csv(const std::vector<double>& times, const SliceMatrix& rows);
/// `t_hours,re_z,im_z`.
std::string z_path_csv(const RecoveryReport& rep);
/// `t_hours,f_alpha,f_osc,f_sun,f_total,w2`.
std::string cost_trace_csv(const RecoveryReport& rep);
/// Recovery times and integrated costs, units in the key names. `extra` holds
/// additional (key, raw JSON value) pairs.
std::string report_json(const RecoveryReport& rep, std::string_view mode, const RunConfig& cfg,
                        const std::vector<std::pair<std::string, std::string>>& extra = {});

void write_text(const std::filesystem::path& file, std::string_view text);

}  // namespace circadian
