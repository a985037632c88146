#include "circadian/mfg.hpp"

#include <doctest.h>

using namespace circadian;

namespace {

const ErgodicSolution& reference_solution() {
    static const ErgodicSolution s = solve_ergodic(PeriodicGrid(120), ModelParams::reference(), {});
    return s;
}

MfgOptions short_run() {
    MfgOptions o;
    o.T_hours = 240;
    return o;
}

const MfgPath& east_path() {
    static const MfgPath p =
        solve_recovery_mfg(reference_solution(), time_zone_angle(9, reference_solution().params.omega_S), short_run());
    return p;
}

double max_diff(std::span<const double> a, std::span<const double> b) {
    double d = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) d = std::max(d, std::abs(a[j] - b[j]));
    return d;
}

}  // namespace

TEST_CASE("forward-backward solution has the right boundary data") {
    const auto& s = reference_solution();
    const auto& path = east_path();
    REQUIRE(path.converged);
    CHECK(path.iterations > 1);
    CHECK(path.T == doctest::Approx(240.0));
    CHECK(path.densities.rows() == static_cast<std::size_t>(path.steps + 1));
    CHECK(max_diff(path.densities.row(0), s.mu.values()) == 0.0);
    for (double u : path.values.row(path.steps)) CHECK(u == 0.0);
    double drift = 0.0, worst_beta = 0.0;
    for (std::size_t i = 0; i < path.densities.rows(); ++i) {
        double mass = 0.0;
        for (double v : path.densities.row(i)) mass += v * s.grid.step();
        drift = std::max(drift, std::abs(mass - 1.0));
        for (double b : path.controls.row(i)) worst_beta = std::max(worst_beta, std::abs(b));
    }
    CHECK(drift < 1e-12);
    CHECK(worst_beta <= path.bound);
    CHECK(path.dt <= cfl_dt(s.grid, path.params, path.bound));
}

TEST_CASE("converged path is a fixed point of one more sweep") {
    const auto& path = east_path();
    const auto r = fixed_point_residual(path, reference_solution().mu.values());
    CHECK(r.density_change < 1e-5);
    CHECK(r.control_change < 1e-5);
}

TEST_CASE("sampling picks whole hours") {
    const auto sp = east_path().sampled(1.0);
    CHECK(sp.times.size() == 241);
    CHECK(sp.times[17] == 17.0);
    CHECK_THROWS_AS(east_path().sampled(east_path().dt * 0.5), std::invalid_argument);
}

TEST_CASE("staying home remains entrained in mid-horizon") {
    const auto& s = reference_solution();
    auto o = short_run();
    o.T_hours = 960;
    const auto home = solve_recovery_mfg(s, 0.0, o);
    REQUIRE(home.converged);
    const auto st = stationarity_check(home, s, 0.01);
    CHECK(st.within_throughout);
    CHECK_FALSE(st.exceeds_throughout);
    CHECK(st.max_w2 < 1e-3);
}

TEST_CASE("relaxed iteration reaches the same path") {
    auto o = short_run();
    o.relaxation = 0.5;
    o.initial_bound = east_path().bound;
    const auto& s = reference_solution();
    const auto relaxed = solve_recovery_mfg(s, time_zone_angle(9, s.params.omega_S), o);
    REQUIRE(relaxed.converged);
    const auto& plain = east_path();
    REQUIRE(relaxed.dt == plain.dt);
    double worst = 0.0;
    for (std::size_t i = 0; i < plain.densities.rows(); ++i) {
        worst = std::max(worst, max_diff(relaxed.densities.row(i), plain.densities.row(i)));
    }
    CHECK(worst < 1e-3);
}

TEST_CASE("small control bounds are doubled until they hold") {
    const auto& s = reference_solution();
    auto o = short_run();
    o.initial_bound = 0.01;
    std::vector<long> seen;
    o.progress = [&](const MfgProgress& p) { seen.push_back(p.iteration); };
    const auto path = solve_recovery_mfg(s, time_zone_angle(9, s.params.omega_S), o);
    REQUIRE(path.converged);
    const double ratio = std::log2(path.bound / 0.01);
    CHECK(ratio == doctest::Approx(std::round(ratio)));
    CHECK(path.bound >= 0.16);
    CHECK(seen.back() == path.iterations);
    for (std::size_t i = 1; i < seen.size(); ++i) CHECK((seen[i] == seen[i - 1] + 1 || seen[i] == 1));

    o.progress = nullptr;
    o.max_bound_doublings = 0;
    CHECK_THROWS_AS(solve_recovery_mfg(s, time_zone_angle(9, s.params.omega_S), o), SolverError);
}

TEST_CASE("eastward and westward MFG trips mirror each other without detuning") {
    auto params = ModelParams::reference();
    params.omega_0 = params.omega_S;
    const auto s = solve_ergodic(PeriodicGrid(120), params, {});
    REQUIRE(s.outcome.kind == Outcome::Converged);
    auto o = short_run();
    o.T_hours = 120;
    const auto east = solve_recovery_mfg(s, time_zone_angle(9, params.omega_S), o);
    const auto west = solve_recovery_mfg(s, time_zone_angle(-9, params.omega_S), o);
    REQUIRE(east.steps == west.steps);
    double worst = 0.0;
    for (std::size_t i = 0; i < east.densities.rows(); ++i) {
        worst = std::max(worst, max_diff(reflect_field(east.densities.row(i)), west.densities.row(i)));
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("MFG recovery rejects unusable inputs") {
    const auto& s = reference_solution();
    const double p = time_zone_angle(9, s.params.omega_S);
    auto o = short_run();
    o.relaxation = 0.0;
    CHECK_THROWS_AS(solve_recovery_mfg(s, p, o), std::invalid_argument);
    o.relaxation = 1.5;
    CHECK_THROWS_AS(solve_recovery_mfg(s, p, o), std::invalid_argument);
    o = short_run();
    o.T_hours = 0;
    CHECK_THROWS_AS(solve_recovery_mfg(s, p, o), std::invalid_argument);
    auto bad = s;
    bad.outcome = {Outcome::InvalidSolution, InvalidReason::Negativity};
    CHECK_THROWS_AS(solve_recovery_mfg(bad, p, short_run()), std::invalid_argument);
}
