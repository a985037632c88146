#include "circadian/config.hpp"

#include <charconv>
#include <fmt/format.h>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace circadian {

ModelParams RunConfig::home() const {
    ModelParams m;
    m.omega_S = omega_S;
    m.omega_0 = omega_0;
    m.sigma = sigma;
    m.K = K;
    m.F = F;
    m.p = 0.0;
    return m;
}

double RunConfig::destination() const { return time_zone_angle(p_hours, omega_S); }

PeriodicGrid RunConfig::grid() const { return PeriodicGrid(n); }

void RunConfig::validate() const {
    auto fail = [](std::string msg) { throw ConfigError(std::move(msg)); };
    if (!(sigma > 0.0)) fail(fmt::format("sigma must be positive, got {}", sigma));
    if (!(K >= 0.0) || !(F >= 0.0)) fail(fmt::format("K and F must be non-negative, got K={} F={}", K, F));
    if (!(omega_S > 0.0) || !std::isfinite(omega_0)) fail("omega_S must be positive and omega_0 finite");
    if (n < 3) fail(fmt::format("n must be at least 3, got {}", n));
    if (!(eps > 0.0) || !(eps_w > 0.0) || !(eps_z > 0.0)) fail("tolerances must be positive");
    if (!(horizon_days > 0.0) || !(T_days > 0.0)) fail("horizon_days and T_days must be positive");
    if (max_iter && *max_iter < 1) fail("max_iter must be at least 1");
    if (!(subsample_hours > 0.0)) fail("subsample_hours must be positive");
    if (out_dir.empty()) fail("out_dir must not be empty");
}

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_plain(std::string_view text, std::string_view key) {
    double v = 0.0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end) throw ConfigError(fmt::format("{}: '{}' is not a number", key, text));
    return v;
}

/// Number, or `[c]pi[/d]` with optional numeric factor c and divisor d.
double parse_number(std::string_view text, std::string_view key) {
    const auto at = text.find("pi");
    if (at == std::string_view::npos) return parse_plain(text, key);
    const auto head = trim(text.substr(0, at));
    auto tail = trim(text.substr(at + 2));
    double v = std::numbers::pi;
    if (head == "-") {
        v = -v;
    } else if (!head.empty()) {
        v *= parse_plain(head.back() == '*' ? trim(head.substr(0, head.size() - 1)) : head, key);
    }
    if (!tail.empty()) {
        if (tail.front() != '/') throw ConfigError(fmt::format("{}: cannot read '{}'", key, text));
        const double d = parse_plain(trim(tail.substr(1)), key);
        if (d == 0.0) throw ConfigError(fmt::format("{}: division by zero", key));
        v /= d;
    }
    return v;
}

long parse_integer(std::string_view text, std::string_view key) {
    long v = 0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end) throw ConfigError(fmt::format("{}: '{}' is not an integer", key, text));
    return v;
}

}  // namespace

double parse_config_number(std::string_view text) { return parse_number(trim(text), "value"); }

void set_config_value(RunConfig& cfg, std::string_view key, std::string_view raw) {
    const auto value = trim(raw);
    if (value.empty()) throw ConfigError(fmt::format("{}: missing value", key));
    try {
        if (key == "omega_S") cfg.omega_S = parse_number(value, key);
        else if (key == "omega_0") cfg.omega_0 = parse_number(value, key);
        else if (key == "sigma") cfg.sigma = parse_number(value, key);
        else if (key == "K") cfg.K = parse_number(value, key);
        else if (key == "F") cfg.F = parse_number(value, key);
        else if (key == "p_hours") cfg.p_hours = static_cast<int>(parse_integer(value, key));
        else if (key == "n") cfg.n = static_cast<int>(parse_integer(value, key));
        else if (key == "scheme") cfg.scheme = parse_scheme(value);
        else if (key == "method") cfg.method = parse_method(value);
        else if (key == "eps") cfg.eps = parse_number(value, key);
        else if (key == "eps_w") cfg.eps_w = parse_number(value, key);
        else if (key == "eps_z") cfg.eps_z = parse_number(value, key);
        else if (key == "horizon_days") cfg.horizon_days = parse_number(value, key);
        else if (key == "T_days") cfg.T_days = parse_number(value, key);
        else if (key == "max_iter") cfg.max_iter = parse_integer(value, key);
        else if (key == "out_dir") cfg.out_dir = std::string(value);
        else if (key == "subsample_hours") cfg.subsample_hours = parse_number(value, key);
        else throw ConfigError(fmt::format("unknown key '{}'", key));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(fmt::format("{}: {}", key, e.what()));
    }
}

RunConfig parse_config(std::string_view text) {
    RunConfig cfg;
    std::set<std::string, std::less<>> seen;
    int line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto nl = text.find('\n');
        auto line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError(fmt::format("line {}: expected 'key = value'", line_no));
        const auto key = trim(line.substr(0, eq));
        if (!seen.emplace(key).second) throw ConfigError(fmt::format("line {}: '{}' given twice", line_no, key));
        try {
            set_config_value(cfg, key, line.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError(fmt::format("line {}: {}", line_no, e.what()));
        }
    }
    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError(fmt::format("cannot read config '{}'", file.string()));
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string render_config(const RunConfig& c) {
    std::string out;
    auto put = [&](std::string_view k, const auto& v) { out += fmt::format("{} = {}\n", k, v); };
    auto num = [&](std::string_view k, double v) { out += fmt::format("{} = {:.17g}\n", k, v); };
    num("omega_S", c.omega_S);
    num("omega_0", c.omega_0);
    num("sigma", c.sigma);
    num("K", c.K);
    num("F", c.F);
    put("p_hours", c.p_hours);
    put("n", c.n);
    put("scheme", to_string(c.scheme));
    put("method", to_string(c.method));
    num("eps", c.eps);
    num("eps_w", c.eps_w);
    num("eps_z", c.eps_z);
    num("horizon_days", c.horizon_days);
    num("T_days", c.T_days);
    if (c.max_iter) put("max_iter", *c.max_iter);
    put("out_dir", c.out_dir);
    num("subsample_hours", c.subsample_hours);
    return out;
}

std::uint64_t solver_fingerprint(const RunConfig& c) {
    const std::string key = fmt::format("{:.17g}|{:.17g}|{:.17g}|{:.17g}|{:.17g}|{}|{}|{}|{:.17g}|{}", c.omega_S,
                                        c.omega_0, c.sigma, c.K, c.F, c.n, to_string(c.scheme), to_string(c.method),
                                        c.eps, c.max_iter.value_or(0));
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : key) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace circadian
