#include "circadian/config.hpp"
#include "circadian/persistence.hpp"
#include "circadian/recovery.hpp"
#include "circadian/sweep.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

using namespace circadian;
namespace fs = std::filesystem;

namespace {

fs::path scratch() {
    static const fs::path dir = [] {
        auto d = fs::temp_directory_path() / ("circadian_cli_io_" + std::to_string(::getpid()));
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(CIRCADIAN_CLI_PATH) + " " + args + " > " + (scratch() / "cli.log").string() +
                            " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& f) {
    std::ifstream in(f);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string first_line(const std::string& text) { return text.substr(0, text.find('\n')); }

const ErgodicSolution& reference_solution() {
    static const ErgodicSolution s = solve_ergodic(PeriodicGrid(120), ModelParams::reference(), {});
    return s;
}

}  // namespace

TEST_CASE("config text parses with comments and pi factors") {
    const auto c = parse_config(R"(# travel case
omega_0 = 2pi/24.5   # intrinsic
sigma = 0.2
K=0.02
p_hours = -6
scheme = monotone
method = method2
max_iter = 40
out_dir = results/run one
)");
    CHECK(c.omega_0 == doctest::Approx(kTwoPi / 24.5).epsilon(1e-15));
    CHECK(c.sigma == 0.2);
    CHECK(c.K == 0.02);
    CHECK(c.p_hours == -6);
    CHECK(c.scheme == Scheme::Monotone);
    CHECK(c.method == ErgodicMethod::Method2);
    REQUIRE(c.max_iter);
    CHECK(*c.max_iter == 40);
    CHECK(c.out_dir == "results/run one");
    CHECK(c.F == RunConfig{}.F);
    CHECK(parse_config("") == RunConfig{});

    CHECK(parse_config_number("pi/12") == doctest::Approx(std::numbers::pi / 12).epsilon(1e-15));
    CHECK(parse_config_number("-pi") == doctest::Approx(-std::numbers::pi).epsilon(1e-15));
    CHECK(parse_config_number("0.125") == 0.125);
    CHECK(parse_config_number("1e-3") == 0.001);
}

TEST_CASE("config errors are reported as ConfigError") {
    CHECK_THROWS_AS(parse_config("bogus = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("K = 1\nK = 2\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("K = abc\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("K 0.1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("scheme = upwind\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("n = 12.5\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_number("2pie"), ConfigError);
    RunConfig c;
    c.sigma = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = RunConfig{};
    c.n = 2;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = RunConfig{};
    c.max_iter = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    CHECK_THROWS_AS(load_config(scratch() / "missing.cfg"), ConfigError);
}

TEST_CASE("rendered config parses back to the same value") {
    RunConfig c;
    CHECK(parse_config(render_config(c)) == c);
    c.omega_0 = kTwoPi / 36.0;
    c.sigma = 0.30000000000000004;
    c.max_iter = 77;
    c.scheme = Scheme::Monotone;
    c.p_hours = 12;
    c.out_dir = "x/y";
    CHECK(parse_config(render_config(c)) == c);
}

TEST_CASE("fingerprint tracks solver inputs only") {
    const RunConfig base;
    RunConfig c = base;
    c.p_hours = -3;
    c.eps_w = 0.5;
    c.T_days = 3;
    c.out_dir = "elsewhere";
    CHECK(solver_fingerprint(c) == solver_fingerprint(base));
    for (auto change : {+[](RunConfig& r) { r.K = 0.02; }, +[](RunConfig& r) { r.n = 96; },
                        +[](RunConfig& r) { r.scheme = Scheme::Monotone; }, +[](RunConfig& r) { r.eps = 1e-6; },
                        +[](RunConfig& r) { r.max_iter = 5; }}) {
        RunConfig d = base;
        change(d);
        CHECK(solver_fingerprint(d) != solver_fingerprint(base));
    }
}

TEST_CASE("solution JSON round-trips bit for bit") {
    const auto& s = reference_solution();
    RunConfig cfg;
    cfg.eps_z = 0.15;
    const auto text = solution_to_json(s, cfg);
    const auto back = solution_from_json(text);
    CHECK(back.config == cfg);
    CHECK(back.fingerprint == solver_fingerprint(cfg));
    CHECK(back.solution.mu.vector() == s.mu.vector());
    CHECK(back.solution.U.vector() == s.U.vector());
    CHECK(back.solution.beta.vector() == s.beta.vector());
    CHECK(back.solution.lambda == s.lambda);
    CHECK(back.solution.params == s.params);
    CHECK(back.solution.outcome == s.outcome);
    CHECK(back.solution.scheme == s.scheme);
    CHECK(back.solution.method == s.method);
    CHECK(back.solution.iterations == s.iterations);
    CHECK(solution_to_json(back.solution, back.config) == text);

    const auto file = scratch() / "nested" / "sol.json";
    save_solution(file, s, cfg);
    CHECK(load_solution(file).solution.mu.vector() == s.mu.vector());

    auto j = nlohmann::json::parse(text);
    CHECK(j["version"] == kSolutionFormatVersion);
    j["version"] = 99;
    CHECK_THROWS_AS(solution_from_json(j.dump()), std::runtime_error);
    CHECK_THROWS_AS(solution_from_json("{ not json"), std::runtime_error);
    auto short_mu = nlohmann::json::parse(text);
    short_mu["mu"].erase(0);
    CHECK_THROWS_AS(solution_from_json(short_mu.dump()), std::runtime_error);
    CHECK_THROWS_AS(load_solution(scratch() / "absent.json"), std::runtime_error);
}

TEST_CASE("CSV and report layouts") {
    const auto& s = reference_solution();
    RecoveryOptions o;
    o.horizon_hours = 5;
    const auto path = run_recovery(s, time_zone_angle(9, s.params.omega_S), o);
    const auto rep = report_recovery(path, s);

    const auto csv = path_csv(path.samples.times, path.samples.densities);
    CHECK(first_line(csv).starts_with("t_hours,phi_0,phi_1,"));
    CHECK(first_line(csv).ends_with(",phi_119"));
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
    CHECK(first_line(z_path_csv(rep)) == "t_hours,re_z,im_z");
    CHECK(first_line(cost_trace_csv(rep)) == "t_hours,f_alpha,f_osc,f_sun,f_total,w2");
    const auto costs = cost_trace_csv(rep);
    CHECK(std::count(costs.begin(), costs.end(), '\n') == 7);

    RunConfig cfg;
    const auto j = nlohmann::json::parse(report_json(rep, "ergodic", cfg, {{"mass_drift", "1e-15"}}));
    CHECK(j["mode"] == "ergodic");
    CHECK(j["p_hours"] == 9);
    CHECK(j["mass_drift"].get<double>() == 1e-15);
    CHECK(j["tau_w_hours"].is_null());
    CHECK(j["tau_w_days"].is_null());
    CHECK(j["f_total_costhours"].get<double>() == rep.f_total);
}

TEST_CASE("sweep rows are deterministic and keep failures") {
    SweepSpec spec;
    spec.param = "p";
    spec.values = {12, -12, 0};
    spec.base.horizon_days = 2;
    spec.workers = 1;
    const auto rows = run_sweep(spec);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].p_hours == -12);
    CHECK(rows[1].direction == "home");
    CHECK(rows[2].p_hours == 12);
    CHECK(rows[0].tau_w_hours == rows[2].tau_w_hours);
    CHECK(rows[0].tau_z_hours == rows[2].tau_z_hours);
    CHECK(rows[0].f_total == rows[2].f_total);
    CHECK(rows[0].f_alpha == rows[2].f_alpha);
    spec.workers = 3;
    CHECK(sweep_csv(run_sweep(spec)) == sweep_csv(rows));

    SweepSpec k;
    k.param = "K";
    k.values = {0.1, 0.01};
    k.base.horizon_days = 1;
    const auto kr = run_sweep(k);
    REQUIRE(kr.size() == 4);
    CHECK(kr[0].value == 0.01);
    CHECK(kr[0].direction == "east");
    CHECK(kr[1].direction == "west");
    CHECK(kr[0].outcome == "converged");
    CHECK(kr[2].outcome == "invalid_solution");
    CHECK(kr[3].outcome == "invalid_solution");
    const auto csv = sweep_csv(kr);
    CHECK(first_line(csv) ==
          "param,value,direction,p_hours,outcome,tau_w_hours,tau_z_hours,f_alpha_costhours,f_osc_costhours,"
          "f_sun_costhours,f_total_costhours,error");
    CHECK(csv.find("invalid_solution,nan,nan,nan") != std::string::npos);

    SweepSpec bad;
    bad.param = "tau";
    bad.values = {1};
    CHECK_THROWS_AS(validate_sweep(bad), ConfigError);
    bad.param = "p";
    bad.values = {1.5};
    CHECK_THROWS_AS(validate_sweep(bad), ConfigError);
    bad.values = {};
    CHECK_THROWS_AS(validate_sweep(bad), ConfigError);
}

TEST_CASE("command line exit codes and outputs") {
    const auto dir = scratch() / "cli";
    const std::string out = " --set out_dir=" + dir.string();
    CHECK(run_cli("--help") == 0);
    CHECK(run_cli("") == 4);
    CHECK(run_cli("frobnicate") == 4);
    CHECK(run_cli("ergodic --set bogus=1") == 4);
    CHECK(run_cli("ergodic --set sigma=-1") == 4);
    CHECK(run_cli("ergodic --config " + (scratch() / "nope.cfg").string()) == 4);

    CHECK(run_cli("ergodic" + out) == 0);
    const auto sol = dir / "solution.json";
    REQUIRE(fs::exists(sol));
    CHECK(run_cli("ergodic --set max_iter=2 --out " + (dir / "short.json").string()) == 2);
    CHECK(run_cli("ergodic --set K=0.1 --out " + (dir / "bad.json").string()) == 3);

    CHECK(run_cli("recover --mode ergodic --solution " + sol.string() + out + " --set horizon_days=1") == 0);
    CHECK(fs::exists(dir / "ergodic_p+9_path.csv"));
    CHECK(fs::exists(dir / "ergodic_p+9_z.csv"));
    CHECK(fs::exists(dir / "ergodic_p+9_costs.csv"));
    const auto report = nlohmann::json::parse(slurp(dir / "ergodic_p+9_report.json"));
    CHECK(report["mode"] == "ergodic");
    CHECK(run_cli("recover --mode ergodic --solution " + sol.string() + out + " --set K=0.02") == 4);
    CHECK(run_cli("recover --mode ergodic --solution " + (dir / "short.json").string() + out) != 0);
    CHECK(run_cli("recover --mode sideways" + out) == 4);

    const std::string cfg_file = (scratch() / "west.cfg").string();
    write_text(cfg_file, "p_hours = -3\nhorizon_days = 1\nout_dir = " + dir.string() + "\n");
    CHECK(run_cli("recover --config " + cfg_file) == 0);
    CHECK(fs::exists(dir / "ergodic_p-3_report.json"));

    CHECK(run_cli("sweep --sweep-param sigma --values 0.1,0.2 --workers 2 --set horizon_days=1" + out) == 0);
    const auto sweep = slurp(dir / "sweep_sigma_ergodic.csv");
    CHECK(std::count(sweep.begin(), sweep.end(), '\n') == 5);
    CHECK(run_cli("sweep --sweep-param nonsense --values 1" + out) == 4);
    CHECK(run_cli("sweep --sweep-param K --values 0.1,x" + out) == 4);

    CHECK(run_cli("oracle-check") == 0);
}
