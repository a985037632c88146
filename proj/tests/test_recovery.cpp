#include "circadian/recovery.hpp"

#include <doctest.h>
#include <random>

using namespace circadian;

namespace {

const ErgodicSolution& reference_solution() {
    static const ErgodicSolution s = solve_ergodic(PeriodicGrid(120), ModelParams::reference(), {});
    return s;
}

double max_diff(std::span<const double> a, std::span<const double> b) {
    double d = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) d = std::max(d, std::abs(a[j] - b[j]));
    return d;
}

}  // namespace

TEST_CASE("aligned step respects the CFL limit and fills each sample exactly") {
    const PeriodicGrid g(120);
    const auto p = ModelParams::reference();
    for (double bound : {0.0, 0.14, 0.25, 2.0}) {
        for (double sample : {1.0, 0.5, 3.0}) {
            const double dt = aligned_dt(g, p, bound, sample);
            const double limit = cfl_dt(g, p, bound);
            CHECK(dt <= limit);
            const double k = sample / dt;
            CHECK(k == doctest::Approx(std::round(k)).epsilon(1e-12));
            if (k > 1.0) CHECK(sample / (std::round(k) - 1.0) > limit);
        }
    }
    CHECK_THROWS_AS(aligned_dt(g, p, 0.25, 0.0), std::invalid_argument);
}

TEST_CASE("staying home keeps the entrained density") {
    const auto& s = reference_solution();
    RecoveryOptions o;
    o.horizon_hours = 72;
    const auto path = run_recovery(s, 0.0, o);
    CHECK(path.samples.times.size() == 73);
    CHECK(path.samples.times.back() == 72.0);
    for (std::size_t i = 0; i < path.samples.times.size(); ++i) {
        CHECK(max_diff(path.samples.densities.row(i), s.mu.values()) < 1e-6);
    }
    const auto rep = report_recovery(path, s);
    REQUIRE(rep.tau_w);
    CHECK(*rep.tau_w == 0.0);
    REQUIRE(rep.tau_z);
    CHECK(*rep.tau_z == 0.0);
}

TEST_CASE("travel samples every hour and starts from the home density") {
    const auto& s = reference_solution();
    RecoveryOptions o;
    o.horizon_hours = 48;
    const double p = time_zone_angle(9, s.params.omega_S);
    const auto path = run_recovery(s, p, o);
    CHECK(path.samples.times.size() == 49);
    for (std::size_t i = 0; i < path.samples.times.size(); ++i) CHECK(path.samples.times[i] == double(i));
    CHECK(max_diff(path.samples.densities.row(0), s.mu.values()) == 0.0);
    CHECK(max_diff(path.beta_p.values(), rotate_field(s.beta.values(), rotation_steps(s.grid, p))) == 0.0);
    CHECK(path.mass_drift < 1e-13);
}

TEST_CASE("mass is conserved to round-off over 1e5 steps") {
    const auto& s = reference_solution();
    const double p = time_zone_angle(-9, s.params.omega_S);
    ControlField beta(rotate_field(s.beta.values(), rotation_steps(s.grid, p)));
    const double dt = cfl_dt(s.grid, s.params, beta.max_abs());
    for (Scheme scheme : {Scheme::Centered, Scheme::Monotone}) {
        const auto path = propagate_density(s.grid, s.params, s.mu.values(), beta, scheme, dt, 100'000, 100'000);
        CHECK(path.mass_drift <= 1e-12);
        CHECK(path.samples.times.size() == 2);
    }
}

TEST_CASE("monotone stepping never produces negative mass") {
    const PeriodicGrid g(120);
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0), b(-0.5, 0.5);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> m(120), beta(120);
        for (int j = 0; j < 120; ++j) {
            m[j] = u(rng) < 0.3 ? 0.0 : u(rng);
            beta[j] = b(rng);
        }
        const auto M0 = normalize_density(m, g);
        const ControlField c(beta);
        const auto p = ModelParams::reference();
        const auto path =
            propagate_density(g, p, M0.values(), c, Scheme::Monotone, cfl_dt(g, p, c.max_abs()), 5000, 1000);
        CHECK(path.min_value >= 0.0);
    }
    ErgodicOptions eo;
    eo.scheme = Scheme::Monotone;
    const auto s = solve_ergodic(g, ModelParams::reference(), eo);
    REQUIRE(s.outcome.kind == Outcome::Converged);
    for (int hours : {9, -9, 12}) {
        const auto path = run_recovery(s, time_zone_angle(hours, s.params.omega_S));
        CHECK(path.min_value >= 0.0);
    }
}

TEST_CASE("eastward and westward trips mirror each other without detuning") {
    auto params = ModelParams::reference();
    params.omega_0 = params.omega_S;
    const auto s = solve_ergodic(PeriodicGrid(120), params, {});
    REQUIRE(s.outcome.kind == Outcome::Converged);
    RecoveryOptions o;
    o.horizon_hours = 96;
    const auto east = run_recovery(s, time_zone_angle(9, params.omega_S), o);
    const auto west = run_recovery(s, time_zone_angle(-9, params.omega_S), o);
    double worst = 0.0;
    for (std::size_t i = 0; i < east.samples.times.size(); ++i) {
        worst = std::max(worst, max_diff(reflect_field(east.samples.densities.row(i)), west.samples.densities.row(i)));
    }
    CHECK(worst < 1e-10);
    const auto re = report_recovery(east, s), rw = report_recovery(west, s);
    CHECK(re.tau_w == rw.tau_w);
    CHECK(re.f_total == doctest::Approx(rw.f_total).epsilon(1e-9));
}

TEST_CASE("reversing detuning and direction reflects the path") {
    auto fast = ModelParams::reference();
    auto slow = fast;
    slow.omega_0 = 2.0 * fast.omega_S - fast.omega_0;
    const PeriodicGrid g(120);
    const auto sf = solve_ergodic(g, fast, {});
    const auto ss = solve_ergodic(g, slow, {});
    REQUIRE(sf.outcome.kind == Outcome::Converged);
    REQUIRE(ss.outcome.kind == Outcome::Converged);
    CHECK(max_diff(reflect_field(sf.mu.values()), ss.mu.values()) < 1e-10);
    RecoveryOptions o;
    o.horizon_hours = 96;
    const auto a = run_recovery(sf, time_zone_angle(9, fast.omega_S), o);
    const auto b = run_recovery(ss, time_zone_angle(-9, fast.omega_S), o);
    REQUIRE(a.dt == b.dt);
    double worst = 0.0;
    for (std::size_t i = 0; i < a.samples.times.size(); ++i) {
        worst = std::max(worst, max_diff(reflect_field(a.samples.densities.row(i)), b.samples.densities.row(i)));
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("recovery rejects unusable inputs") {
    const auto& s = reference_solution();
    const double p = time_zone_angle(9, s.params.omega_S);
    auto bad = s;
    bad.outcome = {Outcome::NotConverged, InvalidReason::None};
    CHECK_THROWS_AS(run_recovery(bad, p), std::invalid_argument);
    RecoveryOptions o;
    o.dt = 0.5;
    CHECK_THROWS_AS(run_recovery(s, p, o), std::invalid_argument);
    o.dt = 0.07;
    CHECK_THROWS_AS(run_recovery(s, p, o), std::invalid_argument);
    o.dt = 1.0 / 20.0;
    o.horizon_hours = 2;
    CHECK_NOTHROW(run_recovery(s, p, o));
    o.horizon_hours = 0;
    CHECK_THROWS_AS(run_recovery(s, p, o), std::invalid_argument);
    CHECK_THROWS(run_recovery(s, 0.1, {}));
    CHECK_THROWS_AS(propagate_density(s.grid, s.params, std::vector<double>(10, 0.1), s.beta, Scheme::Centered, 0.01,
                                      1, 1),
                    std::invalid_argument);
}
