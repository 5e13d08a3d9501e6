#include <cmath>
#include <numbers>
#include <numeric>

#include "doctest.h"
#include "rtp/core/errors.hpp"
#include "rtp/sim/ensemble.hpp"
#include "rtp/sim/fenwick.hpp"
#include "rtp/sim/simulator.hpp"

using namespace rtp;
using namespace rtp::sim;

namespace {

constexpr double kPi = std::numbers::pi;

// Straight replay of an event log with composite Simpson quadrature between
// events. Returns (1/N) int sum_{x,sigma} eta_t(x,sigma) f(t, x, sigma, m_t) dt.
template <class F>
double replay_integral(const PathRecord& path, F f) {
    const std::size_t n = path.n_sites;
    LatticeConfiguration cfg = path.initial;
    auto integrand = [&](double t) {
        const double m = cfg.magnetization();
        double acc = 0.0;
        for (Spin s : kSpins) {
            for (std::size_t x = 0; x < n; ++x) {
                if (cfg.count(x, s) != 0) acc += static_cast<double>(cfg.count(x, s)) * f(t, x, s, m);
            }
        }
        return acc;
    };
    auto simpson = [&](double a, double b) {
        const int pieces = 16;
        const double h = (b - a) / pieces;
        double acc = integrand(a) + integrand(b);
        for (int i = 1; i < pieces; ++i) acc += (i % 2 ? 4.0 : 2.0) * integrand(a + i * h);
        return acc * h / 3.0;
    };
    double total = 0.0, t = 0.0;
    for (const Event& ev : path.event_log) {
        total += simpson(t, ev.time);
        cfg.remove(ev.site, ev.spin);
        if (ev.kind == EventKind::active_jump) {
            cfg.add(cfg.shifted(ev.site, ev.spin), ev.spin);
        } else {
            cfg.add(ev.site, flipped(ev.spin));
        }
        t = ev.time;
    }
    total += simpson(t, path.t_final);
    return total / static_cast<double>(n);
}

LatticeConfiguration final_configuration(const PathRecord& path) {
    LatticeConfiguration cfg = path.initial;
    for (const Event& ev : path.event_log) {
        cfg.remove(ev.site, ev.spin);
        cfg.add(ev.kind == EventKind::active_jump ? cfg.shifted(ev.site, ev.spin) : ev.site,
                ev.kind == EventKind::active_jump ? ev.spin : flipped(ev.spin));
    }
    return cfg;
}

double oracle_pairing(const LatticeConfiguration& cfg, const PerturbationField& h, double t) {
    const double n = static_cast<double>(cfg.n_sites());
    double acc = 0.0;
    for (Spin s : kSpins) {
        for (std::size_t x = 0; x < cfg.n_sites(); ++x) {
            acc += static_cast<double>(cfg.count(x, s)) * h.value(t, static_cast<double>(x) / n, s);
        }
    }
    return acc / n;
}

// (1/N) log Z^H from its definition as an exponential martingale.
double oracle_log_rn(const PathRecord& path, const PerturbationField& h) {
    const double n = static_cast<double>(path.n_sites);
    const auto& c = path.rate_family;
    const double integral = replay_integral(path, [&](double t, std::size_t x, Spin s, double m) {
        const double pos = static_cast<double>(x) / n;
        const double next = static_cast<double>((x + path.n_sites + sign(s)) % path.n_sites) / n;
        const double dh = h.value(t, next, s) - h.value(t, pos, s);
        return h.time_derivative(t, pos, s) + n * (std::exp(dh) - 1.0) +
               c(s, m) * (std::exp(-sign(s) * h.tilde(t, pos)) - 1.0);
    });
    return oracle_pairing(final_configuration(path), h, path.t_final) - oracle_pairing(path.initial, h, 0.0) -
           integral;
}

double oracle_path_rate(const PathRecord& path, const PerturbationField& h) {
    const double n = static_cast<double>(path.n_sites);
    const auto& c = path.rate_family;
    const double integral = replay_integral(path, [&](double t, std::size_t x, Spin s, double m) {
        const double pos = static_cast<double>(x) / n;
        return h.time_derivative(t, pos, s) + sign(s) * h.space_derivative(t, pos, s) +
               c(s, m) * (std::exp(-sign(s) * h.tilde(t, pos)) - 1.0);
    });
    return oracle_pairing(final_configuration(path), h, path.t_final) - oracle_pairing(path.initial, h, 0.0) -
           integral;
}

SimulationSpec small_spec(std::size_t n, double density, double t_final, std::uint64_t seed) {
    SimulationSpec spec;
    spec.n_sites = n;
    spec.initial = DensityField::Profile([density](double, Spin) { return density; });
    spec.t_final = t_final;
    spec.seed = seed;
    return spec;
}

PerturbationField moving_field() {
    // H(t, x, +1) = (0.2 + 0.3 t) cos(2 pi x), H(t, x, -1) = -0.1 t sin(2 pi x)
    return PerturbationField({FourierMode{1, {0.2, 0.3}, {}}}, {FourierMode{1, {}, {0.0, -0.1}}});
}

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

double standard_error(const std::vector<double>& v) {
    const double mu = mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - mu) * (x - mu);
    return std::sqrt(ss / (v.size() - 1.0) / v.size());
}

}  // namespace

TEST_CASE("Fenwick tree selects by cumulative weight") {
    auto tree = FenwickTree::from_weights(std::vector<std::int64_t>{0, 3, 0, 2, 1});
    CHECK(tree.total() == 6);
    CHECK(tree.find(0) == 1);
    CHECK(tree.find(2) == 1);
    CHECK(tree.find(3) == 3);
    CHECK(tree.find(5) == 4);
    tree.add(0, 2);
    CHECK(tree.find(1) == 0);
    CHECK(tree.prefix(4) == 7);
}

TEST_CASE("total event rate of small configurations") {
    SimulationSpec spec = small_spec(4, 1.0, 1.0, 0);
    LatticeConfiguration one(4);
    one.add(2, Spin::plus);
    EventSampler single(spec, one);
    CHECK(single.total_rate(one) == doctest::Approx(5.0));

    spec.rate_family = SwitchRateFamily::curie_weiss(1.0);
    LatticeConfiguration two(4);
    two.add(0, Spin::plus);
    two.add(3, Spin::plus);
    EventSampler pair(spec, two);
    CHECK(pair.total_rate(two) == doctest::Approx(8.0 + 2.0 * std::exp(-1.0)));
    CHECK(pair.flip_rate(two, 0, Spin::plus, 0.0) == doctest::Approx(std::exp(-1.0)));
    CHECK(pair.jump_rate(0, Spin::plus, 0.0) == doctest::Approx(4.0));
}

TEST_CASE("tilted rates follow the perturbation") {
    SimulationSpec spec = small_spec(8, 1.0, 1.0, 0);
    spec.rate_family = SwitchRateFamily::curie_weiss(1.0);
    const auto h = PerturbationField::single_cosine(Spin::plus, 1, 0.5);
    spec.tilt = h;
    LatticeConfiguration cfg(8);
    cfg.add(1, Spin::plus);
    EventSampler sampler(spec, cfg);
    const double pos = 1.0 / 8.0;
    CHECK(sampler.jump_rate(1, Spin::plus, 0.0) ==
          doctest::Approx(8.0 * std::exp(h.value(0, 2.0 / 8.0, Spin::plus) - h.value(0, pos, Spin::plus))));
    CHECK(sampler.flip_rate(cfg, 1, Spin::plus, 0.0) ==
          doctest::Approx(std::exp(-1.0) * std::exp(-h.tilde(0, pos))));
}

TEST_CASE("particle number is conserved and paths are reproducible") {
    SimulationSpec spec = small_spec(64, 2.0, 0.5, 17);
    spec.rate_family = SwitchRateFamily::curie_weiss(1.5);
    spec.snapshot_times = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
    spec.record_events = true;
    const PathRecord a = run_path(spec);
    const PathRecord b = run_path(spec);
    CHECK(a == b);
    REQUIRE(a.snapshots.size() == 6);
    for (const auto& cfg : a.snapshots) CHECK(cfg.total() == a.initial.total());
    CHECK(a.snapshots.back() == final_configuration(a));
    CHECK(a.jump_counts.active + a.jump_counts.flips() == static_cast<std::int64_t>(a.event_log.size()));

    spec.seed = 18;
    CHECK_FALSE(run_path(spec).event_log == a.event_log);
}

TEST_CASE("a zero tilt reproduces the untilted path") {
    SimulationSpec spec = small_spec(32, 1.0, 0.5, 5);
    spec.rate_family = SwitchRateFamily::curie_weiss(2.0);
    spec.record_events = true;
    const PathRecord plain = run_path(spec);
    spec.tilt = PerturbationField{};
    const PathRecord tilted = run_path(spec);
    CHECK(plain.event_log == tilted.event_log);
    CHECK(tilted.rejected_proposals == 0);
}

TEST_CASE("event counts and spin decorrelation of a single particle") {
    // one particle, c = 1: events form a Poisson process of rate N + 1 and
    // E[sigma_T sigma_0] = exp(-2T).
    const std::size_t n = 4;
    const double t_final = 0.5;
    std::vector<double> events, corr;
    for (std::uint64_t seed = 0; seed < 20000; ++seed) {
        SimulationSpec spec = small_spec(n, 0.0, t_final, seed);
        LatticeConfiguration cfg(n);
        cfg.add(0, Spin::plus);
        spec.initial = cfg;
        const PathRecord p = run_path(spec);
        events.push_back(static_cast<double>(p.jump_counts.active + p.jump_counts.flips()));
        corr.push_back(p.magnetization_series.back());
    }
    CHECK(std::abs(mean(events) - (n + 1) * t_final) < 4.0 * standard_error(events));
    CHECK(std::abs(mean(corr) - std::exp(-2.0 * t_final)) < 4.0 * standard_error(corr));
}

TEST_CASE("Poisson initial law has the prescribed mean") {
    SimulationSpec spec = small_spec(4096, 0.0, 0.0, 9);
    spec.initial = DensityField::Profile([](double x, Spin s) {
        return s == Spin::plus ? 1.0 + 0.5 * std::sin(2 * kPi * x) : 0.5;
    });
    Rng rng(spec.seed);
    const auto cfg = sample_initial(spec, rng);
    // expected totals 4096 and 2048 with Poisson standard deviations 64 and 45
    CHECK(std::abs(static_cast<double>(cfg.class_total(Spin::plus)) - 4096.0) < 5 * 64.0);
    CHECK(std::abs(static_cast<double>(cfg.class_total(Spin::minus)) - 2048.0) < 5 * 45.3);
    const auto binned = empirical_density(cfg, 16);
    CHECK(binned.total_mass() == doctest::Approx(static_cast<double>(cfg.total()) / 4096.0));

    spec.initial = DensityField::Profile([](double, Spin) { return -1.0; });
    CHECK_THROWS_AS(sample_initial(spec, rng), DomainError);
}

TEST_CASE("empirical density bins counts per cell") {
    LatticeConfiguration cfg(std::vector<LatticeConfiguration::Count>{1, 3, 0, 2},
                             std::vector<LatticeConfiguration::Count>{0, 0, 4, 0});
    const auto d = empirical_density(cfg, 2);
    CHECK(d(0, Spin::plus) == doctest::Approx(2.0));   // (1 + 3) * 2 / 4
    CHECK(d(1, Spin::plus) == doctest::Approx(1.0));
    CHECK(d(1, Spin::minus) == doctest::Approx(2.0));
    CHECK_THROWS_AS(empirical_density(cfg, 3), ConfigurationError);
}

TEST_CASE("exponential martingale matches a brute-force replay") {
    SimulationSpec spec = small_spec(16, 1.0, 0.4, 21);
    spec.rate_family = SwitchRateFamily::curie_weiss(1.5);
    spec.record_events = true;
    for (const auto& h : {PerturbationField::single_cosine(Spin::plus, 1, 0.3), moving_field()}) {
        spec.radon_nikodym_field = h;
        const PathRecord p = run_path(spec);
        REQUIRE(p.log_radon_nikodym);
        CHECK(*p.log_radon_nikodym == doctest::Approx(oracle_log_rn(p, h)).epsilon(1e-9));
        CHECK(*p.path_rate == doctest::Approx(oracle_path_rate(p, h)).epsilon(1e-9));
        CHECK(log_radon_nikodym(p, h) == doctest::Approx(*p.log_radon_nikodym).epsilon(1e-12));
        CHECK(path_rate_functional(p, h) == doctest::Approx(*p.path_rate).epsilon(1e-12));
    }
}

TEST_CASE("log Z vanishes for the zero field") {
    SimulationSpec spec = small_spec(32, 1.0, 0.5, 4);
    spec.radon_nikodym_field = PerturbationField{};
    const PathRecord p = run_path(spec);
    CHECK(*p.log_radon_nikodym == 0.0);
    CHECK(*p.path_rate == 0.0);
}

TEST_CASE("closed form when no event occurs") {
    // Over a short horizon a single particle most likely stays put; then
    // (1/N) log Z = -(T/N) [N (e^{dH} - 1) + c (e^{-H~} - 1)].
    const std::size_t n = 8;
    const auto h = PerturbationField::single_cosine(Spin::plus, 1, 0.4);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        SimulationSpec spec = small_spec(n, 0.0, 0.01, seed);
        LatticeConfiguration cfg(n);
        cfg.add(3, Spin::plus);
        spec.initial = cfg;
        spec.radon_nikodym_field = h;
        const PathRecord p = run_path(spec);
        if (p.jump_counts.active + p.jump_counts.flips() != 0) continue;
        const double dh = h.value(0, 4.0 / n, Spin::plus) - h.value(0, 3.0 / n, Spin::plus);
        const double expected = -(0.01 / n) * (n * std::expm1(dh) + std::expm1(-h.tilde(0, 3.0 / n)));
        CHECK(*p.log_radon_nikodym == doctest::Approx(expected).epsilon(1e-13));
        return;
    }
    FAIL("no event-free path found");
}

TEST_CASE("E[Z] = 1 for time-constant and time-dependent fields") {
    for (const auto& h : {PerturbationField::single_cosine(Spin::plus, 1, 0.3), moving_field()}) {
        SimulationSpec spec = small_spec(8, 0.5, 0.5, 1000);
        spec.rate_family = SwitchRateFamily::curie_weiss(1.0);
        spec.radon_nikodym_field = h;
        const auto zs = map_replicas<double>(
            spec, 20000, [](std::size_t, const PathRecord& p) { return std::exp(8.0 * *p.log_radon_nikodym); }, 1);
        CHECK(std::abs(mean(zs) - 1.0) < 4.0 * standard_error(zs));
    }
}

TEST_CASE("importance sampling identity between tilted and untilted laws") {
    // E^H[f] = E[Z^H f] with f = m_T, and E^H[1 / Z^H] = 1.
    const auto h = PerturbationField::single_cosine(Spin::plus, 1, 0.5);
    SimulationSpec spec = small_spec(8, 0.5, 0.5, 77);
    spec.rate_family = SwitchRateFamily::curie_weiss(1.0);
    spec.radon_nikodym_field = h;

    const std::size_t reps = 20000;
    const auto plain = map_replicas<double>(
        spec, reps,
        [](std::size_t, const PathRecord& p) {
            return std::exp(8.0 * *p.log_radon_nikodym) * p.magnetization_series.back();
        },
        1);
    spec.tilt = h;
    spec.seed = 99;
    const auto tilted =
        map_replicas<double>(spec, reps, [](std::size_t, const PathRecord& p) { return p.magnetization_series.back(); }, 1);
    const auto inverse = map_replicas<double>(
        spec, reps, [](std::size_t, const PathRecord& p) { return std::exp(-8.0 * *p.log_radon_nikodym); }, 1);

    const double se = std::hypot(standard_error(plain), standard_error(tilted));
    CHECK(std::abs(mean(plain) - mean(tilted)) < 4.0 * se);
    CHECK(std::abs(mean(inverse) - 1.0) < 4.0 * standard_error(inverse));
}

TEST_CASE("Dynkin martingale has zero mean under plain and tilted dynamics") {
    const PerturbationField g({FourierMode{1, {1.0}, {}}}, {FourierMode{1, {-1.0}, {}}});
    for (bool tilted : {false, true}) {
        SimulationSpec spec = small_spec(16, 1.0, 0.5, 300);
        spec.rate_family = SwitchRateFamily::curie_weiss(1.5);
        if (tilted) spec.tilt = moving_field();
        spec.test_functions = {TestFunction{"g", g}};
        const auto finals = map_replicas<double>(
            spec, 3000, [](std::size_t, const PathRecord& p) { return p.dynkin_residuals.at("g").back(); }, 1);
        CHECK(std::abs(mean(finals)) < 4.0 * standard_error(finals));
    }
}

TEST_CASE("Dynkin replay agrees with the online value") {
    const PerturbationField g({FourierMode{2, {0.0, 1.0}, {0.5}}}, {});
    SimulationSpec spec = small_spec(16, 1.0, 0.3, 8);
    spec.snapshot_times = {0.0, 0.1, 0.2, 0.3};
    spec.test_functions = {TestFunction{"g", g}};
    spec.record_events = true;
    const PathRecord p = run_path(spec);
    const auto replayed = dynkin_residual(p, g);
    REQUIRE(replayed.size() == 4);
    CHECK(replayed.front() == 0.0);
    for (std::size_t k = 0; k < 4; ++k) {
        CHECK(replayed[k] == doctest::Approx(p.dynkin_residuals.at("g")[k]).epsilon(1e-12));
    }
    CHECK(quadratic_variation(p, g) == doctest::Approx(p.quadratic_variation.at("g")).epsilon(1e-12));

    spec.record_events = false;
    CHECK_THROWS_AS(dynkin_residual(run_path(spec), g), StateError);
}

TEST_CASE("quadratic variation scales like 1/N") {
    const PerturbationField g({FourierMode{1, {1.0}, {}}}, {FourierMode{1, {-1.0}, {}}});
    auto mean_qv = [&](std::size_t n) {
        SimulationSpec spec = small_spec(n, 1.0, 0.5, 3);
        spec.test_functions = {TestFunction{"g", g}};
        const auto qv = map_replicas<double>(
            spec, 20, [](std::size_t, const PathRecord& p) { return p.quadratic_variation.at("g"); }, 1);
        return mean(qv);
    };
    const double ratio = mean_qv(512) / mean_qv(256);
    CHECK(ratio >= 0.3);
    CHECK(ratio <= 0.7);
}

TEST_CASE("ensembles are independent of the worker count") {
    SimulationSpec spec = small_spec(32, 1.0, 0.3, 12);
    spec.rate_family = SwitchRateFamily::curie_weiss(2.0);
    spec.snapshot_times = {0.0, 0.15, 0.3};
    const auto one = replica_ensemble(spec, 12, 8, 1);
    const auto three = replica_ensemble(spec, 12, 8, 3);
    CHECK(one.magnetization_mean == three.magnetization_mean);
    CHECK(one.density_mean == three.density_mean);
    CHECK(one.density_variance == three.density_variance);

    // replica 0 is the single-path run
    const auto first = map_replicas<double>(
        spec, 1, [](std::size_t, const PathRecord& p) { return p.magnetization_series.back(); }, 1);
    CHECK(first.front() == run_path(spec).magnetization_series.back());
}

TEST_CASE("invalid specifications are rejected") {
    SimulationSpec spec = small_spec(0, 1.0, 1.0, 0);
    CHECK_THROWS_AS(run_path(spec), ConfigurationError);
    spec.n_sites = 8;
    spec.snapshot_times = {0.5, 0.2};
    CHECK_THROWS_AS(run_path(spec), ConfigurationError);
    spec.snapshot_times = {0.0, 2.0};
    CHECK_THROWS_AS(run_path(spec), ConfigurationError);
    spec.snapshot_times = {};
    spec.initial = LatticeConfiguration(4);
    CHECK_THROWS_AS(run_path(spec), ConfigurationError);
}
