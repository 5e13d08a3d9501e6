#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "rtp/core/errors.hpp"
#include "rtp/hydro/magnetization.hpp"
#include "rtp/hydro/solver.hpp"

using namespace rtp;
using namespace rtp::hydro;

namespace {

constexpr double kPi = std::numbers::pi;

// Midpoint rule with a tiny step: an oracle for the magnetization ODE that
// shares no code with the solver.
double midpoint_ode(double beta, double m0, double t_final) {
    auto f = [beta](double m) { return 2.0 * std::sinh(beta * m) - 2.0 * m * std::cosh(beta * m); };
    const int steps = 200000;
    const double h = t_final / steps;
    double m = m0;
    for (int i = 0; i < steps; ++i) m += h * f(m + 0.5 * h * f(m));
    return m;
}

SolverSpec base_spec(std::size_t grid, double t_final, SwitchRateFamily rates, DensityField::Profile profile) {
    SolverSpec spec;
    spec.grid_size = grid;
    spec.t_final = t_final;
    spec.rate_family = rates;
    spec.initial = DensityField::from_profile(grid, profile);
    return spec;
}

double sine_plus(double x, Spin s) { return s == Spin::plus ? 1.0 + 0.5 * std::sin(2 * kPi * x) : 1.0; }

double bump(double x, Spin s) {
    return s == Spin::plus ? 0.8 + 0.3 * std::cos(2 * kPi * x) : 0.5 + 0.2 * std::sin(4 * kPi * x);
}

}  // namespace

TEST_CASE("uniform equal layers with c = 1 are stationary") {
    auto spec = base_spec(32, 1.0, SwitchRateFamily::constant(), [](double, Spin) { return 1.0; });
    const auto traj = solve_hydrodynamic(spec);
    REQUIRE(traj.size() == 33);
    for (std::size_t k = 0; k < traj.size(); ++k) CHECK(traj[k] == spec.initial);
}

TEST_CASE("transport moves each layer by exactly one cell per step") {
    auto spec = base_spec(16, 0.5, SwitchRateFamily::curie_weiss(2.0), bump);
    spec.reaction_scale = 0.0;
    const auto traj = solve_hydrodynamic(spec);
    REQUIRE(traj.size() == 9);
    for (std::size_t k = 0; k < traj.size(); ++k) {
        for (std::size_t i = 0; i < 16; ++i) {
            CHECK(traj[k](i, Spin::plus) == spec.initial((i + 16 - k) % 16, Spin::plus));
            CHECK(traj[k](i, Spin::minus) == spec.initial((i + k) % 16, Spin::minus));
        }
    }
}

TEST_CASE("mass is conserved to rounding") {
    auto spec = base_spec(128, 1.0, SwitchRateFamily::curie_weiss(2.0), bump);
    spec.tilt = PerturbationField({FourierMode{1, {0.4, -0.2}, {}}}, {FourierMode{2, {}, {0.1}}});
    const auto res = solve_detailed(spec);
    CHECK(res.mass_drift < 1e-12);
    CHECK(res.min_value >= 0.0);
}

TEST_CASE("magnetization ODE closed forms") {
    const auto free = integrate_magnetization_ode(SwitchRateFamily::constant(), 0.5, 1.0, 1e-3);
    CHECK(std::abs(free.final_value() - 0.5 * std::exp(-2.0)) < 1e-10);
    CHECK(free.values.size() == 1001);
    CHECK_FALSE(free.blow_up);

    const auto cw = integrate_magnetization_ode(SwitchRateFamily::curie_weiss(2.0), 0.1, 10.0, 1e-3);
    CHECK(std::abs(cw.final_value() - 0.957504024077) < 1e-6);

    for (const auto& rates : {SwitchRateFamily::curie_weiss(3.0), SwitchRateFamily::constant(2.0)}) {
        const auto zero = integrate_magnetization_ode(rates, 0.0, 5.0, 1e-2);
        for (double m : zero.values) CHECK(m == 0.0);
    }

    CHECK(integrate_magnetization_ode(SwitchRateFamily::curie_weiss(1.5), -0.3, 2.0, 1e-3).final_value() ==
          doctest::Approx(-midpoint_ode(1.5, 0.3, 2.0)).epsilon(1e-8));
    CHECK_THROWS_AS(integrate_magnetization_ode(SwitchRateFamily::constant(), 1.5, 1.0, 0.1), DomainError);
}

TEST_CASE("an unstable ODE step is flagged") {
    const auto series = integrate_magnetization_ode(SwitchRateFamily::constant(50.0), 0.9, 5.0, 0.5);
    CHECK(series.blow_up);
}

TEST_CASE("PDE magnetization follows the ODE") {
    auto spec = base_spec(512, 1.0, SwitchRateFamily::curie_weiss(1.5), bump);
    const auto res = solve_detailed(spec);
    const double oracle = midpoint_ode(1.5, spec.initial.magnetization(), 1.0);
    CHECK(std::abs(res.magnetization.back() - oracle) < 1e-6);
    CHECK(perturbed_magnetization_check(res.trajectory, std::nullopt, spec.rate_family) < 1e-5);
}

TEST_CASE("perturbed magnetization residual shrinks under refinement") {
    auto residual = [](std::size_t grid) {
        auto spec = base_spec(grid, 0.5, SwitchRateFamily::curie_weiss(1.0), bump);
        spec.tilt = PerturbationField::single_cosine(Spin::plus, 1, 0.4);
        return perturbed_magnetization_check(solve_perturbed(spec), spec.tilt, spec.rate_family);
    };
    const double coarse = residual(256), fine = residual(512);
    CHECK(fine * 2.0 <= coarse);

    DensityTrajectory empty(0.1, {DensityField(8), DensityField(8), DensityField(8)});
    CHECK(perturbed_magnetization_check(empty, std::nullopt, SwitchRateFamily::constant()) == 0.0);
}

TEST_CASE("self-convergence against a finer reference") {
    const auto rates = SwitchRateFamily::curie_weiss(1.5);
    auto final_field = [&](std::size_t grid) { return solve_hydrodynamic(base_spec(grid, 1.0, rates, sine_plus)).back(); };
    const std::size_t m = 64;
    const auto reference = final_field(4 * m);
    const double err_m = l1_distance(restrict_field(final_field(m), m), restrict_field(reference, m));
    const double err_2m = l1_distance(restrict_field(final_field(2 * m), m), restrict_field(reference, m));
    // second order in dx: e(M) / e(2M) = (1 - 1/16) / ((1 - 1/4) / 4) = 5 against a 4M reference
    CHECK(err_m / err_2m >= 1.5);
    CHECK(err_m / err_2m == doctest::Approx(5.0).epsilon(0.1));
}

TEST_CASE("Picard iterates with a magnetization-independent rate are fixed after one step") {
    auto spec = base_spec(64, 0.5, SwitchRateFamily::constant(), bump);
    const auto it = picard_iterate(spec, 3);
    REQUIRE(it.size() == 4);
    CHECK(it[2] == it[1]);
    CHECK(it[3] == it[1]);
    CHECK(it[1] == solve_hydrodynamic(spec));
    CHECK(it[0].size() == it[1].size());
    CHECK(it[0].back() == spec.initial);
}

TEST_CASE("Picard iteration contracts to the direct solution") {
    auto spec = base_spec(256, 0.2, SwitchRateFamily::curie_weiss(2.0),
                          [](double x, Spin s) { return s == Spin::plus ? 0.6 + 0.2 * std::cos(2 * kPi * x) : 0.4; });
    const auto it = picard_iterate(spec, 12);
    std::vector<double> d;
    for (std::size_t n = 0; n + 1 < it.size(); ++n) d.push_back(l1_distance(it[n + 1], it[n]));
    for (std::size_t n = 1; n + 1 < d.size() && n <= 5; ++n) CHECK(d[n + 1] < d[n]);
    CHECK(l1_distance(it.back(), solve_hydrodynamic(spec)) < 1e-6);
    CHECK(spec.n_steps() == 51);
    CHECK(it.back().t_final() == doctest::Approx(51.0 / 256.0));
}

TEST_CASE("frozen solve at the direct stage magnetizations reproduces the direct solve") {
    auto spec = base_spec(64, 0.5, SwitchRateFamily::curie_weiss(2.0), bump);
    const auto direct = solve_detailed(spec);
    const auto frozen = solve_frozen(spec, direct.stage_magnetization);
    CHECK(frozen.trajectory == direct.trajectory);
    CHECK(frozen.stage_magnetization == direct.stage_magnetization);
}

TEST_CASE("l1 distance") {
    DensityField ones(8, 1.0, 1.0), zeros(8);
    CHECK(l1_distance(ones, ones) == 0.0);
    CHECK(l1_distance(ones, zeros) == doctest::Approx(2.0));
    CHECK_THROWS_AS(l1_distance(ones, DensityField(4)), ConfigurationError);

    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    auto random_field = [&] {
        DensityField f(8);
        for (Spin s : kSpins) {
            for (double& v : f.layer_values(s)) v = u(gen);
        }
        return f;
    };
    for (int i = 0; i < 200; ++i) {
        const auto a = random_field(), b = random_field(), c = random_field();
        REQUIRE(l1_distance(a, c) <= l1_distance(a, b) + l1_distance(b, c) + 1e-14);
    }
}

TEST_CASE("strided output keeps every k-th step") {
    auto spec = base_spec(64, 0.5, SwitchRateFamily::curie_weiss(1.0), bump);
    const auto full = solve_hydrodynamic(spec);
    spec.stride = 4;
    const auto thin = solve_hydrodynamic(spec);
    REQUIRE(thin.size() == 9);
    CHECK(thin.dt() == doctest::Approx(4.0 / 64.0));
    for (std::size_t k = 0; k < thin.size(); ++k) CHECK(thin[k] == full[4 * k]);
    spec.stride = 5;
    CHECK_THROWS_AS(solve_hydrodynamic(spec), ConfigurationError);
}

TEST_CASE("solver input errors") {
    auto spec = base_spec(8, 1.0, SwitchRateFamily::constant(), [](double, Spin) { return 1.0; });
    spec.initial(3, Spin::plus) = -0.5;
    CHECK_THROWS_AS(solve_hydrodynamic(spec), DomainError);

    auto stiff = base_spec(4, 1.0, SwitchRateFamily::constant(1e4), bump);
    CHECK_THROWS_AS(solve_hydrodynamic(stiff), StabilityError);
    stiff.reaction_substeps = 4000;
    CHECK_NOTHROW(solve_hydrodynamic(stiff));

    auto wrong_grid = base_spec(8, 1.0, SwitchRateFamily::constant(), bump);
    wrong_grid.grid_size = 16;
    CHECK_THROWS_AS(solve_hydrodynamic(wrong_grid), ConfigurationError);
}
