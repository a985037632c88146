#include "circadian/persistence.hpp"

#include <fmt/format.h>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace circadian {

namespace {

std::string number_array(std::span<const double> v) {
    std::string out = "[";
    for (std::size_t j = 0; j < v.size(); ++j) {
        if (j) out += ", ";
        out += fmt::format("{:.17g}", v[j]);
    }
    return out + "]";
}

std::string json_string(std::string_view s) { return nlohmann::json(std::string(s)).dump(); }

Outcome parse_outcome(std::string_view s) {
    if (s == "converged") return Outcome::Converged;
    if (s == "invalid_solution") return Outcome::InvalidSolution;
    if (s == "not_converged") return Outcome::NotConverged;
    throw std::runtime_error(fmt::format("unknown outcome '{}'", s));
}

InvalidReason parse_reason(std::string_view s) {
    if (s == "none") return InvalidReason::None;
    if (s == "phase_angle") return InvalidReason::PhaseAngle;
    if (s == "negativity") return InvalidReason::Negativity;
    throw std::runtime_error(fmt::format("unknown invalid reason '{}'", s));
}

std::string optional_hours(const std::optional<double>& v) { return v ? fmt::format("{:.17g}", *v) : "null"; }

}  // namespace

std::string solution_to_json(const ErgodicSolution& s, const RunConfig& cfg) {
    std::string out = "{\n";
    out += fmt::format("  \"version\": {},\n", kSolutionFormatVersion);
    out += fmt::format("  \"config\": {},\n", json_string(render_config(cfg)));
    out += fmt::format("  \"fingerprint\": \"{:016x}\",\n", solver_fingerprint(cfg));
    out += fmt::format("  \"n\": {},\n", s.grid.size());
    out += fmt::format("  \"params\": {{\"omega_S\": {:.17g}, \"omega_0\": {:.17g}, \"sigma\": {:.17g}, \"K\": {:.17g}, "
                       "\"F\": {:.17g}, \"p\": {:.17g}}},\n",
                       s.params.omega_S, s.params.omega_0, s.params.sigma, s.params.K, s.params.F, s.params.p);
    out += fmt::format("  \"scheme\": {},\n", json_string(to_string(s.scheme)));
    out += fmt::format("  \"method\": {},\n", json_string(to_string(s.method)));
    out += fmt::format("  \"outcome\": {},\n", json_string(to_string(s.outcome.kind)));
    out += fmt::format("  \"invalid_reason\": {},\n", json_string(to_string(s.outcome.reason)));
    out += fmt::format("  \"criteria_met\": {},\n", s.criteria_met);
    out += fmt::format("  \"iterations\": {},\n", s.iterations);
    out += fmt::format("  \"lsq_residual\": {:.17g},\n", s.lsq_residual);
    out += fmt::format("  \"cfl_bound\": {:.17g},\n", s.cfl_bound);
    out += fmt::format("  \"dt\": {:.17g},\n", s.dt);
    out += fmt::format("  \"lambda\": {:.17g},\n", s.lambda);
    out += fmt::format("  \"mu\": {},\n", number_array(s.mu.values()));
    out += fmt::format("  \"U\": {},\n", number_array(s.U.values()));
    out += fmt::format("  \"beta\": {}\n", number_array(s.beta.values()));
    return out + "}\n";
}

StoredSolution solution_from_json(std::string_view text) {
    try {
        const auto j = nlohmann::json::parse(text);
        const int version = j.at("version").get<int>();
        if (version != kSolutionFormatVersion) {
            throw std::runtime_error(fmt::format("unsupported solution format version {}", version));
        }
        RunConfig cfg = parse_config(j.at("config").get<std::string>());
        const std::uint64_t fp = std::stoull(j.at("fingerprint").get<std::string>(), nullptr, 16);
        const PeriodicGrid grid(j.at("n").get<int>());
        const auto& pj = j.at("params");
        ModelParams params;
        params.omega_S = pj.at("omega_S").get<double>();
        params.omega_0 = pj.at("omega_0").get<double>();
        params.sigma = pj.at("sigma").get<double>();
        params.K = pj.at("K").get<double>();
        params.F = pj.at("F").get<double>();
        params.p = pj.at("p").get<double>();
        ErgodicSolution s{grid,
                          params,
                          Density(j.at("mu").get<std::vector<double>>(), grid),
                          ValueField(j.at("U").get<std::vector<double>>()),
                          j.at("lambda").get<double>(),
                          ControlField(j.at("beta").get<std::vector<double>>()),
                          parse_scheme(j.at("scheme").get<std::string>()),
                          parse_method(j.at("method").get<std::string>()),
                          j.at("iterations").get<long>(),
                          j.at("criteria_met").get<bool>(),
                          {parse_outcome(j.at("outcome").get<std::string>()),
                           parse_reason(j.at("invalid_reason").get<std::string>())},
                          j.at("lsq_residual").get<double>(),
                          j.at("cfl_bound").get<double>(),
                          j.at("dt").get<double>()};
        if (s.U.size() != static_cast<std::size_t>(grid.size()) ||
            s.beta.size() != static_cast<std::size_t>(grid.size())) {
            throw std::runtime_error("array lengths do not match n");
        }
        return StoredSolution{std::move(s), std::move(cfg), fp};
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(fmt::format("malformed solution file: {}", e.what()));
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error(fmt::format("invalid solution file: {}", e.what()));
    }
}

void write_text(const std::filesystem::path& file, std::string_view text) {
    if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
    std::ofstream out(file, std::ios::binary);
    if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", file.string()));
    out << text;
    if (!out) throw std::runtime_error(fmt::format("write to '{}' failed", file.string()));
}

void save_solution(const std::filesystem::path& file, const ErgodicSolution& s, const RunConfig& cfg) {
    write_text(file, solution_to_json(s, cfg));
}

StoredSolution load_solution(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw std::runtime_error(fmt::format("cannot read solution '{}'", file.string()));
    std::stringstream buf;
    buf << in.rdbuf();
    return solution_from_json(buf.str());
}

std::string path_csv(const std::vector<double>& times, const SliceMatrix& rows) {
    std::string out = "t_hours";
    for (std::size_t j = 0; j < rows.cols(); ++j) out += fmt::format(",phi_{}", j);
    out += '\n';
    for (std::size_t i = 0; i < times.size(); ++i) {
        out += fmt::format("{:.17g}", times[i]);
        for (double v : rows.row(i)) out += fmt::format(",{:.17g}", v);
        out += '\n';
    }
    return out;
}

std::string z_path_csv(const RecoveryReport& rep) {
    std::string out = "t_hours,re_z,im_z\n";
    for (std::size_t i = 0; i < rep.times.size(); ++i) {
        out += fmt::format("{:.17g},{:.17g},{:.17g}\n", rep.times[i], rep.z_path[i].real(), rep.z_path[i].imag());
    }
    return out;
}

std::string cost_trace_csv(const RecoveryReport& rep) {
    std::string out = "t_hours,f_alpha,f_osc,f_sun,f_total,w2\n";
    for (std::size_t i = 0; i < rep.times.size(); ++i) {
        out += fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{}\n", rep.times[i], rep.trace_alpha[i],
                           rep.trace_osc[i], rep.trace_sun[i], rep.trace_total[i],
                           i < rep.w2_path.size() ? fmt::format("{:.17g}", rep.w2_path[i]) : "");
    }
    return out;
}

std::string report_json(const RecoveryReport& rep, std::string_view mode, const RunConfig& cfg,
                        const std::vector<std::pair<std::string, std::string>>& extra) {
    std::string out = "{\n";
    out += fmt::format("  \"mode\": {},\n", json_string(mode));
    for (const auto& [k, v] : extra) out += fmt::format("  {}: {},\n", json_string(k), v);
    out += fmt::format("  \"p_hours\": {},\n", cfg.p_hours);
    out += fmt::format("  \"eps_w\": {:.17g},\n", cfg.eps_w);
    out += fmt::format("  \"eps_z\": {:.17g},\n", cfg.eps_z);
    out += fmt::format("  \"tau_w_hours\": {},\n", optional_hours(rep.tau_w));
    out += fmt::format("  \"tau_z_hours\": {},\n", optional_hours(rep.tau_z));
    out += fmt::format("  \"tau_w_days\": {},\n", rep.tau_w ? fmt::format("{:.17g}", *rep.tau_w / 24.0) : "null");
    out += fmt::format("  \"tau_z_days\": {},\n", rep.tau_z ? fmt::format("{:.17g}", *rep.tau_z / 24.0) : "null");
    out += fmt::format("  \"f_alpha_costhours\": {:.17g},\n", rep.f_alpha);
    out += fmt::format("  \"f_osc_costhours\": {:.17g},\n", rep.f_osc);
    out += fmt::format("  \"f_sun_costhours\": {:.17g},\n", rep.f_sun);
    out += fmt::format("  \"f_total_costhours\": {:.17g}\n", rep.f_total);
    return out + "}\n";
}

}  // namespace circadian
