#include "rtp/verify/criteria.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <numeric>

#include "rtp/core/errors.hpp"
#include "rtp/core/fixed_points.hpp"
#include "rtp/hydro/magnetization.hpp"
#include "rtp/hydro/solver.hpp"
#include "rtp/ldp/rate_function.hpp"
#include "rtp/sim/ensemble.hpp"
#include "rtp/sim/simulator.hpp"

namespace rtp::verify {

namespace {

constexpr double kPi = std::numbers::pi;

double mean_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

double variance_of(const std::vector<double>& v) {
    const double mu = mean_of(v);
    double acc = 0.0;
    for (double x : v) acc += (x - mu) * (x - mu);
    return acc / static_cast<double>(v.size() - 1);
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Distinct seed per criterion and sub-run. Replica streams are seed ^ i, so
/// base seeds are hashed apart to keep their replica sets disjoint.
std::uint64_t seed_for(const VerifyOptions& o, int criterion, std::uint64_t k) {
    std::uint64_t z = o.seed + 0x9e3779b97f4a7c15ull * (1 + 64 * static_cast<std::uint64_t>(criterion) + k);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

DensityField::Profile two_level(double plus, double minus) {
    return [plus, minus](double, Spin s) { return s == Spin::plus ? plus : minus; };
}

sim::SimulationSpec sim_spec(std::size_t n, double t_final, SwitchRateFamily rates, sim::InitialCondition initial,
                             std::uint64_t seed) {
    sim::SimulationSpec spec;
    spec.n_sites = n;
    spec.t_final = t_final;
    spec.rate_family = std::move(rates);
    spec.initial = std::move(initial);
    spec.seed = seed;
    return spec;
}

hydro::SolverSpec solver_spec(std::size_t grid, double t_final, SwitchRateFamily rates, const DensityField::Profile& p) {
    hydro::SolverSpec spec;
    spec.grid_size = grid;
    spec.t_final = t_final;
    spec.rate_family = std::move(rates);
    spec.initial = DensityField::from_profile(grid, p);
    return spec;
}

double final_magnetization(const sim::SimulationSpec& spec) { return sim::run_path(spec).magnetization_series.back(); }

// Profile and tilt shared by the rate-function criteria.
double ldp_profile(double x, Spin s) {
    return s == Spin::plus ? 1.0 + 0.3 * std::sin(2 * kPi * x) : 0.8 + 0.2 * std::cos(2 * kPi * x);
}

PerturbationField ldp_tilt() { return PerturbationField::single_cosine(Spin::plus, 1, 0.4); }

hydro::SolverSpec ldp_solver_spec(std::size_t grid, bool tilted) {
    auto spec = solver_spec(grid, 0.5, SwitchRateFamily::curie_weiss(1.0), ldp_profile);
    if (tilted) spec.tilt = ldp_tilt();
    return spec;
}

CriterionResult hydrodynamic_convergence(const VerifyOptions& o) {
    CriterionResult r;
    const auto rates = SwitchRateFamily::constant();
    const auto profile = [](double x, Spin s) { return s == Spin::plus ? 1.0 + 0.5 * std::sin(2 * kPi * x) : 1.0; };
    const std::size_t bins = 8;
    const auto pde = hydro::solve_hydrodynamic(solver_spec(512, 1.0, rates, profile));
    const auto reference = hydro::restrict_field(pde.back(), bins);
    const double mass = pde.front().total_mass();

    std::vector<double> errors;
    for (std::size_t n : {256u, 1024u, 4096u}) {
        const auto path = sim::run_path(sim_spec(n, 1.0, rates, profile, seed_for(o, 1, n)));
        errors.push_back(hydro::l1_distance(sim::empirical_density(path.snapshots.back(), bins), reference));
    }
    r.measurements.push_back(measure("err(N=256)", errors[0], ">", errors[1]));
    r.measurements.push_back(measure("err(N=1024)", errors[1], ">", errors[2]));
    r.measurements.push_back(measure("err(N=4096)", errors[2], "<", 0.10 * mass));
    r.detail = "L1 distance on 8 bins against the PDE at M = 512, single path per N";
    return r;
}

CriterionResult magnetization_ode(const VerifyOptions& o) {
    CriterionResult r;
    const auto rates = SwitchRateFamily::constant();
    const double ode = hydro::integrate_magnetization_ode(rates, 0.5, 1.0, 1e-3).final_value();
    r.measurements.push_back(measure("|m_ODE(1) - 0.5 e^-2|", std::abs(ode - 0.5 * std::exp(-2.0)), "<", 1e-8));
    const double sim_m = final_magnetization(sim_spec(4096, 1.0, rates, two_level(1.5, 0.5), seed_for(o, 2, 0)));
    r.measurements.push_back(measure("|m_N(1) - m_ODE(1)| at N=4096", std::abs(sim_m - ode), "<", 0.05));
    return r;
}

CriterionResult curie_weiss_flocking(const VerifyOptions& o) {
    CriterionResult r;
    const double t_final = 10.0;
    const auto rates = SwitchRateFamily::curie_weiss(2.0);
    const double m_star = curie_weiss_fixed_points(2.0).back();
    r.measurements.push_back(measure("|m* - tanh(2 m*)|", std::abs(m_star - std::tanh(2.0 * m_star)), "<", 1e-9));

    const auto ode = hydro::integrate_magnetization_ode(rates, 0.1, t_final, 1e-3);
    r.measurements.push_back(measure("|m_ODE(10) - m*|", std::abs(ode.final_value() - m_star), "<", 1e-6));

    // M = 250 puts every slice on the ODE grid (dt = 4e-3 = 4 ODE steps)
    const auto profile = [](double x, Spin s) {
        return s == Spin::plus ? 0.55 + 0.2 * std::sin(2 * kPi * x) : 0.45 + 0.1 * std::cos(4 * kPi * x);
    };
    const auto pde = hydro::solve_detailed(solver_spec(250, t_final, rates, profile));
    double pde_gap = 0.0;
    for (std::size_t k = 0; k < pde.magnetization.size(); ++k) {
        pde_gap = std::max(pde_gap, std::abs(pde.magnetization[k] - ode.values[4 * k]));
    }
    r.measurements.push_back(measure("sup_t |m_PDE - m_ODE|", pde_gap, "<", 1e-5));

    const double flock = final_magnetization(sim_spec(4096, t_final, rates, two_level(0.55, 0.45), seed_for(o, 3, 0)));
    r.measurements.push_back(measure("m_N(10), beta=2, N=4096, lower", flock, ">=", 0.93));
    r.measurements.push_back(measure("m_N(10), beta=2, N=4096, upper", flock, "<=", 0.98));
    const double disordered = final_magnetization(
        sim_spec(4096, t_final, SwitchRateFamily::curie_weiss(0.5), two_level(1.1, 0.9), seed_for(o, 3, 1)));
    r.measurements.push_back(measure("|m_N(10)|, beta=0.5, N=4096", std::abs(disordered), "<", 0.05));
    return r;
}

CriterionResult martingale_mean_one(const VerifyOptions& o) {
    CriterionResult r;
    auto spec = sim_spec(64, 0.5, SwitchRateFamily::curie_weiss(1.0), two_level(0.25, 0.25), seed_for(o, 4, 0));
    spec.radon_nikodym_field = PerturbationField::single_cosine(Spin::plus, 1, 0.3);
    const std::size_t replicas = 10000;
    const auto z = sim::map_replicas<double>(
        spec, replicas, [](std::size_t, const sim::PathRecord& p) { return std::exp(64.0 * *p.log_radon_nikodym); },
        o.threads);
    const double mean = mean_of(z);
    const double se = std::sqrt(variance_of(z) / static_cast<double>(replicas));
    r.measurements.push_back(measure("|mean Z - 1| / SE", std::abs(mean - 1.0) / se, "<", 3.0));
    std::vector<double> log_z;
    for (double v : z) log_z.push_back(std::log(v));
    r.detail = "mean Z = " + std::to_string(mean) + ", SE = " + std::to_string(se) +
               ", var log Z = " + std::to_string(variance_of(log_z));
    return r;
}

CriterionResult radon_nikodym_bridge(const VerifyOptions& o) {
    CriterionResult r;
    auto median_gap = [&](std::size_t n) {
        auto spec = sim_spec(n, 0.5, SwitchRateFamily::curie_weiss(1.0), ldp_profile, seed_for(o, 5, n));
        spec.tilt = ldp_tilt();
        spec.radon_nikodym_field = ldp_tilt();
        const auto gaps = sim::map_replicas<double>(
            spec, 100,
            [](std::size_t, const sim::PathRecord& p) { return std::abs(*p.log_radon_nikodym - *p.path_rate); },
            o.threads);
        return median_of(gaps);
    };
    const double coarse = median_gap(128), fine = median_gap(256);
    r.measurements.push_back(measure("median gap ratio N=128 / N=256, lower", coarse / fine, ">=", 1.3));
    r.measurements.push_back(measure("median gap ratio N=128 / N=256, upper", coarse / fine, "<=", 3.0));
    r.detail = "medians " + std::to_string(coarse) + " and " + std::to_string(fine);
    return r;
}

CriterionResult psi_round_trip(const VerifyOptions&) {
    CriterionResult r;
    const auto rates = SwitchRateFamily::curie_weiss(1.0);
    double reciprocity = 0.0;
    auto error_at = [&](std::size_t grid) {
        const auto traj = hydro::solve_perturbed(ldp_solver_spec(grid, true));
        const auto rec = ldp::psi_reconstruction(traj, ldp::flux_extraction(traj), rates);
        reciprocity = std::max(reciprocity, rec.reciprocal_error);
        double err = 0.0;
        for (std::size_t k = 0; k < traj.size(); ++k) {
            for (std::size_t i = 0; i < grid; ++i) {
                err = std::max(err, std::abs(rec.tilde(k, i) - ldp_tilt().tilde(traj.time(k), traj[k].center(i))));
            }
        }
        return err;
    };
    const double coarse = error_at(256), fine = error_at(512);
    r.measurements.push_back(measure("sup |H~_rec - H~| at M=256", coarse, "<", 0.02));
    r.measurements.push_back(measure("error ratio M=256 / M=512", coarse / fine, ">=", 2.0));
    r.measurements.push_back(measure("max |Psi(+)Psi(-) - 1|", reciprocity, "<", 1e-10));
    return r;
}

CriterionResult variational_consistency(const VerifyOptions& o) {
    CriterionResult r;
    const auto rates = SwitchRateFamily::curie_weiss(1.0);
    const auto traj = hydro::solve_perturbed(ldp_solver_spec(512, true));
    const auto rec = ldp::psi_reconstruction(traj, ldp::flux_extraction(traj), rates);
    const double exact = ldp::dynamic_rate_exact(traj, rec.tilde, rates);
    const auto family = ldp::random_single_mode_family(50, seed_for(o, 7, 0));
    const auto sweep = ldp::variational_lower_bound_sweep(traj, family, rates);
    r.measurements.push_back(measure("max_G I(G) - exact", sweep.best_value - exact, "<=", 1e-4));
    const double at_h = ldp::dynamic_rate_with_G(traj, ldp_tilt(), rates);
    r.measurements.push_back(measure("|I(H) - exact|", std::abs(at_h - exact), "<", 1e-4));
    r.detail = "exact-formula value " + std::to_string(exact);
    return r;
}

CriterionResult zero_rate_at_typicality(const VerifyOptions&) {
    CriterionResult r;
    const auto spec = ldp_solver_spec(128, false);
    const auto typical = hydro::solve_hydrodynamic(spec);
    const auto report = ldp::total_rate(typical, spec.initial, spec.rate_family);
    r.measurements.push_back(measure("total rate of the hydrodynamic path", report.total, "<", 1e-5));
    r.measurements.push_back(measure("static_rate(rho, rho)", ldp::static_rate(spec.initial, spec.initial), "==", 0.0));
    return r;
}

CriterionResult picard_contraction(const VerifyOptions&) {
    CriterionResult r;
    const auto spec = solver_spec(256, 0.2, SwitchRateFamily::curie_weiss(2.0), [](double x, Spin s) {
        return s == Spin::plus ? 0.6 + 0.2 * std::cos(2 * kPi * x) : 0.4;
    });
    const auto iterates = hydro::picard_iterate(spec, 12);
    // d[n] = |rho^(n) - rho^(n-1)|, n >= 1
    std::vector<double> d(iterates.size(), 0.0);
    for (std::size_t n = 1; n < iterates.size(); ++n) d[n] = hydro::l1_distance(iterates[n], iterates[n - 1]);
    double worst = 0.0;
    for (std::size_t n = 1; n <= 5; ++n) worst = std::max(worst, d[n + 1] / d[n]);
    r.measurements.push_back(measure("max_{n=1..5} d_{n+1}/d_n", worst, "<", 1.0));
    const double gap = hydro::l1_distance(iterates.back(), hydro::solve_hydrodynamic(spec));
    r.measurements.push_back(measure("|rho^(12) - direct|", gap, "<", 1e-6));
    return r;
}

CriterionResult master_equation_oracle(const VerifyOptions& o) {
    CriterionResult r;
    const std::size_t n = 4, single = 2 * n;
    const double t_final = 0.5;
    const auto rates = SwitchRateFamily::curie_weiss(1.0);
    const auto exact = two_particle_law(n, rates, 0, Spin::plus, 1, Spin::plus, t_final);

    LatticeConfiguration start(n);
    start.add(0, Spin::plus);
    start.add(1, Spin::plus);
    auto spec = sim_spec(n, t_final, rates, start, seed_for(o, 10, 0));
    spec.snapshot_times = {t_final};
    const std::size_t samples = 100000;
    const auto keys = sim::map_replicas<std::size_t>(
        spec, samples,
        [single](std::size_t, const sim::PathRecord& p) {
            std::vector<std::size_t> states;
            const auto& cfg = p.snapshots.back();
            for (std::size_t x = 0; x < cfg.n_sites(); ++x) {
                for (Spin s : kSpins) {
                    for (auto c = cfg.count(x, s); c > 0; --c) states.push_back(2 * x + layer(s));
                }
            }
            return pair_index(single, states.at(0), states.at(1));
        },
        o.threads);
    std::vector<double> empirical(exact.size(), 0.0);
    for (std::size_t k : keys) empirical[k] += 1.0 / static_cast<double>(samples);
    double tv = 0.0;
    for (std::size_t k = 0; k < exact.size(); ++k) tv += 0.5 * std::abs(exact[k] - empirical[k]);
    r.measurements.push_back(measure("TV(exact, KMC)", tv, "<", 0.02));
    return r;
}

CriterionResult conservation_and_determinism(const VerifyOptions& o) {
    CriterionResult r;
    const auto rates = SwitchRateFamily::curie_weiss(2.0);
    const PerturbationField tilt({FourierMode{1, {0.3, 0.2}, {}}}, {FourierMode{2, {}, {-0.2}}});

    auto spec = sim_spec(128, 1.0, rates, ldp_profile, seed_for(o, 11, 0));
    spec.tilt = tilt;
    for (int k = 0; k <= 10; ++k) spec.snapshot_times.push_back(0.1 * k);
    double particle_change = 0.0;
    for (bool tilted : {false, true}) {
        auto s = spec;
        if (!tilted) s.tilt.reset();
        const auto totals = sim::map_replicas<double>(
            s, 16,
            [](std::size_t, const sim::PathRecord& p) {
                double worst = 0.0;
                for (const auto& cfg : p.snapshots) {
                    worst = std::max(worst, std::abs(static_cast<double>(cfg.total() - p.initial.total())));
                }
                return worst;
            },
            o.threads);
        particle_change = std::max(particle_change, *std::max_element(totals.begin(), totals.end()));
    }
    r.measurements.push_back(measure("max ||eta_t| - |eta_0||", particle_change, "==", 0.0));

    auto pde = solver_spec(256, 1.0, rates, ldp_profile);
    pde.tilt = tilt;
    const auto solved = hydro::solve_detailed(pde);
    r.measurements.push_back(measure("PDE relative mass drift", solved.mass_drift, "<", 1e-12));

    const bool same_path = sim::run_path(spec) == sim::run_path(spec);
    const bool same_pde = hydro::solve_detailed(pde).trajectory == solved.trajectory;
    auto m_final = [](std::size_t, const sim::PathRecord& p) { return p.magnetization_series.back(); };
    const bool same_ensemble = sim::map_replicas<double>(spec, 8, m_final, 1) == sim::map_replicas<double>(spec, 8, m_final, 3);
    r.measurements.push_back(measure("path mismatches for equal seeds", same_path ? 0.0 : 1.0, "==", 0.0));
    r.measurements.push_back(measure("PDE mismatches on rerun", same_pde ? 0.0 : 1.0, "==", 0.0));
    r.measurements.push_back(measure("ensemble mismatches, 1 vs 3 threads", same_ensemble ? 0.0 : 1.0, "==", 0.0));
    return r;
}

CriterionResult dynkin_carre_du_champ(const VerifyOptions& o) {
    CriterionResult r;
    auto spec = sim_spec(256, 0.5, SwitchRateFamily::curie_weiss(1.0), two_level(1.0, 1.0), seed_for(o, 12, 0));
    const PerturbationField phi({FourierMode{1, {1.0}, {}}}, {FourierMode{1, {-1.0}, {}}});
    spec.test_functions = {{"phi", phi}};
    const auto stats = sim::map_replicas<std::pair<double, double>>(
        spec, 1000,
        [](std::size_t, const sim::PathRecord& p) {
            return std::pair{p.dynkin_residuals.at("phi").back(), p.quadratic_variation.at("phi")};
        },
        o.threads);
    std::vector<double> m, qv;
    for (const auto& [a, b] : stats) {
        m.push_back(a);
        qv.push_back(b);
    }
    const double se = std::sqrt(variance_of(m) / static_cast<double>(m.size()));
    r.measurements.push_back(measure("|mean M_T| / SE", std::abs(mean_of(m)) / se, "<", 4.0));
    r.measurements.push_back(measure("|var M_T / mean int Gamma - 1|", std::abs(variance_of(m) / mean_of(qv) - 1.0), "<", 0.2));
    return r;
}

}  // namespace

Measurement measure(std::string name, double value, std::string comparator, double threshold) {
    Measurement m{std::move(name), value, std::move(comparator), threshold, false};
    if (m.comparator == "<") m.passed = value < threshold;
    else if (m.comparator == "<=") m.passed = value <= threshold;
    else if (m.comparator == ">") m.passed = value > threshold;
    else if (m.comparator == ">=") m.passed = value >= threshold;
    else if (m.comparator == "==") m.passed = value == threshold;
    else throw ConfigurationError("unknown comparator " + m.comparator);
    return m;
}

nlohmann::json Measurement::to_json() const {
    return {{"name", name}, {"value", value}, {"comparator", comparator}, {"threshold", threshold}, {"passed", passed}};
}

nlohmann::json CriterionResult::to_json() const {
    nlohmann::json ms = nlohmann::json::array();
    for (const auto& m : measurements) ms.push_back(m.to_json());
    return {{"id", id}, {"name", name}, {"passed", passed}, {"measurements", ms}, {"detail", detail}, {"seconds", seconds}};
}

std::string CriterionResult::summary_line() const {
    char head[96];
    std::snprintf(head, sizeof head, "%s [%2d] %s (%.1f s):", passed ? "PASS" : "FAIL", id, name.c_str(), seconds);
    std::string line = head;
    for (std::size_t i = 0; i < measurements.size(); ++i) {
        const auto& m = measurements[i];
        char buf[256];
        std::snprintf(buf, sizeof buf, "%s %s = %.6g (%s %.6g)", i == 0 ? "" : ";", m.name.c_str(), m.value,
                      m.comparator.c_str(), m.threshold);
        line += buf;
    }
    return line;
}

const std::vector<Criterion>& all_criteria() {
    static const std::vector<Criterion> list = {
        {1, "hydrodynamic convergence", hydrodynamic_convergence},
        {2, "magnetization ODE", magnetization_ode},
        {3, "Curie-Weiss flocking", curie_weiss_flocking},
        {4, "exponential martingale mean one", martingale_mean_one},
        {5, "Radon-Nikodym to rate bridge", radon_nikodym_bridge},
        {6, "Psi round trip", psi_round_trip},
        {7, "variational consistency", variational_consistency},
        {8, "zero rate at typicality", zero_rate_at_typicality},
        {9, "Picard contraction", picard_contraction},
        {10, "master-equation oracle", master_equation_oracle},
        {11, "conservation and determinism", conservation_and_determinism},
        {12, "Dynkin martingale and carre du champ", dynkin_carre_du_champ},
    };
    return list;
}

CriterionResult run_criterion(int id, const VerifyOptions& options) {
    const auto& list = all_criteria();
    const auto it = std::find_if(list.begin(), list.end(), [id](const Criterion& c) { return c.id == id; });
    if (it == list.end()) throw ConfigurationError("unknown criterion " + std::to_string(id));
    const auto start = std::chrono::steady_clock::now();
    CriterionResult r = it->run(options);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    r.id = it->id;
    r.name = it->name;
    r.passed = !r.measurements.empty() &&
               std::all_of(r.measurements.begin(), r.measurements.end(), [](const Measurement& m) { return m.passed; });
    return r;
}

namespace {

const std::map<std::string, std::vector<int>>& suites() {
    static const std::map<std::string, std::vector<int>> table = {
        {"conservation", {11}},      {"martingale", {4, 12}}, {"convergence", {1, 2}},
        {"fixed-points", {3}},       {"ldp-roundtrip", {5, 6, 7, 8}}, {"picard", {9}},
        {"master-oracle", {10}},
    };
    return table;
}

}  // namespace

std::vector<int> suite_criteria(const std::string& suite) {
    if (suite == "all") {
        std::vector<int> ids;
        for (const auto& c : all_criteria()) ids.push_back(c.id);
        return ids;
    }
    const auto it = suites().find(suite);
    if (it == suites().end()) throw ConfigurationError("unknown verification suite '" + suite + "'");
    return it->second;
}

std::vector<std::string> suite_names() {
    std::vector<std::string> names;
    for (const auto& [name, ids] : suites()) names.push_back(name);
    names.push_back("all");
    return names;
}

nlohmann::json report_json(const std::string& suite, const std::vector<CriterionResult>& results) {
    nlohmann::json list = nlohmann::json::array();
    bool ok = !results.empty();
    for (const auto& r : results) {
        list.push_back(r.to_json());
        ok = ok && r.passed;
    }
    return {{"suite", suite}, {"passed", ok}, {"criteria", list}};
}

}  // namespace rtp::verify
