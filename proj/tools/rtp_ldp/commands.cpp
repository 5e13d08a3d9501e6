#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "rtp/core/errors.hpp"
#include "rtp/hydro/magnetization.hpp"
#include "rtp/hydro/solver.hpp"
#include "rtp/io/formats.hpp"
#include "rtp/io/manifest.hpp"
#include "rtp/ldp/rate_function.hpp"
#include "rtp/sim/ensemble.hpp"
#include "rtp/sim/simulator.hpp"
#include "rtp/verify/criteria.hpp"

#ifndef RTP_VERSION
#define RTP_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace rtp::cli {

namespace {

using Clock = std::chrono::steady_clock;

/// A spec file may be a bare spec or a manifest carrying one under "spec".
json load_spec(const std::string& path) {
    if (path.empty()) return json::object();
    json doc = io::load_json_argument(path);
    if (doc.contains("spec") && doc.contains("command")) doc = doc.at("spec");
    if (!doc.is_object()) throw ConfigurationError("spec must be a JSON object");
    return doc;
}

template <class T>
T spec_value(const json& spec, const char* key, const T& fallback) {
    try {
        return spec.contains(key) && !spec.at(key).is_null() ? spec.at(key).get<T>() : fallback;
    } catch (const json::exception& e) {
        throw ConfigurationError(std::string("bad value for '") + key + "': " + e.what());
    }
}

std::optional<PerturbationField> field_of(const json& doc) {
    if (doc.is_null()) return std::nullopt;
    return PerturbationField::from_json(doc);
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

void write_json(const fs::path& path, const json& doc) { open_out(path) << doc.dump(2) << '\n'; }

fs::path prepare_dir(const std::string& dir) {
    if (dir.empty()) throw ConfigurationError("--out-dir is required");
    fs::create_directories(dir);
    return fs::path(dir);
}

/// Profile string or CSV path to a field on `grid` cells (grid 0: CSV grid).
DensityField initial_field(const std::string& text, std::size_t grid) {
    if (io::is_named_profile(text)) {
        if (grid == 0) throw ConfigurationError("--grid is required with a named profile");
        return DensityField::from_profile(grid, io::parse_profile(text));
    }
    DensityField f = io::read_density_csv(text);
    if (grid != 0 && f.grid_size() != grid) throw ConfigurationError("initial CSV grid does not match --grid");
    return f;
}

io::RunManifest start_manifest(const std::string& command, json spec) {
    io::RunManifest m;
    m.command = command;
    m.spec = std::move(spec);
    m.tool_version = RTP_VERSION;
    m.started_at = io::utc_timestamp();
    return m;
}

// simulate

struct ResolvedSimulation {
    json spec;
    sim::SimulationSpec sim;
    std::size_t replicas = 1;
    std::size_t grid = 0;
};

ResolvedSimulation resolve_simulation(const SimulateArgs& a) {
    json s = load_spec(a.spec_file);
    if (a.n_sites) s["n_sites"] = *a.n_sites;
    if (a.t_final) s["t_final"] = *a.t_final;
    if (a.seed) s["seed"] = *a.seed;
    if (a.replicas) s["replicas"] = *a.replicas;
    if (!a.rate.empty()) s["rate"] = io::load_json_argument(a.rate);
    if (!a.tilt.empty()) s["tilt"] = io::load_json_argument(a.tilt);
    if (!a.rn_field.empty()) s["radon_nikodym_field"] = io::load_json_argument(a.rn_field);
    if (!a.initial.empty()) s["initial"] = a.initial;
    if (a.grid) s["grid"] = *a.grid;

    ResolvedSimulation r;
    auto& spec = r.sim;
    spec.n_sites = spec_value<std::size_t>(s, "n_sites", 0);
    if (spec.n_sites == 0) throw ConfigurationError("--n-sites (or n_sites in the spec) must be positive");
    spec.t_final = spec_value<double>(s, "t_final", 1.0);
    spec.seed = spec_value<std::uint64_t>(s, "seed", 0);
    r.replicas = spec_value<std::size_t>(s, "replicas", 1);
    if (r.replicas == 0) throw ConfigurationError("replicas must be >= 1");
    spec.rate_family = s.contains("rate") ? SwitchRateFamily::from_json(s.at("rate")) : SwitchRateFamily::constant();
    spec.tilt = field_of(s.value("tilt", json()));
    spec.radon_nikodym_field = field_of(s.value("radon_nikodym_field", json()));
    for (const auto& tf : s.value("test_functions", json::array())) {
        spec.test_functions.push_back({tf.at("id").get<std::string>(), PerturbationField::from_json(tf.at("field"))});
    }
    const auto initial = spec_value<std::string>(s, "initial", "uniform(1,1)");
    if (io::is_named_profile(initial)) {
        spec.initial = io::parse_profile(initial);
    } else {
        spec.initial = io::read_density_csv(initial);
    }

    if (!a.snapshots.empty()) {
        s["snapshots"] = a.snapshots;
    } else if (a.snapshot_count) {
        std::vector<double> times;
        for (std::size_t k = 0; k <= *a.snapshot_count; ++k) {
            times.push_back(spec.t_final * static_cast<double>(k) / static_cast<double>(*a.snapshot_count));
        }
        s["snapshots"] = times;
    }
    spec.snapshot_times = spec_value<std::vector<double>>(s, "snapshots", {});
    spec.validate();
    spec.snapshot_times = spec.resolved_snapshot_times();
    r.grid = spec_value<std::size_t>(s, "grid", 0);
    if (r.grid != 0 && spec.n_sites % r.grid != 0) throw ConfigurationError("grid must divide n_sites");

    // fully resolved form, as recorded in the manifest
    s["n_sites"] = spec.n_sites;
    s["t_final"] = spec.t_final;
    s["seed"] = spec.seed;
    s["replicas"] = r.replicas;
    s["rate"] = spec.rate_family.to_json();
    s["tilt"] = spec.tilt ? spec.tilt->to_json() : json();
    s["radon_nikodym_field"] = spec.radon_nikodym_field ? spec.radon_nikodym_field->to_json() : json();
    s["initial"] = initial;
    s["snapshots"] = spec.snapshot_times;
    s["grid"] = r.grid;
    r.spec = s;
    return r;
}

json path_diagnostics(const sim::PathRecord& p, std::uint64_t seed) {
    json d = {{"seed", seed},
              {"n_sites", p.n_sites},
              {"t_final", p.t_final},
              {"particles", p.initial.total()},
              {"jump_counts",
               {{"active", p.jump_counts.active},
                {"flips_plus_to_minus", p.jump_counts.flips_plus_to_minus},
                {"flips_minus_to_plus", p.jump_counts.flips_minus_to_plus}}},
              {"rejected_proposals", p.rejected_proposals},
              {"magnetization_final", p.magnetization_series.back()}};
    d["log_radon_nikodym"] = p.log_radon_nikodym ? json(*p.log_radon_nikodym) : json();
    d["path_rate"] = p.path_rate ? json(*p.path_rate) : json();
    d["dynkin_final"] = json::object();
    for (const auto& [id, series] : p.dynkin_residuals) d["dynkin_final"][id] = series.back();
    d["quadratic_variation"] = p.quadratic_variation;
    return d;
}

/// Writes one path's files under root / sub and returns their relative paths.
std::vector<fs::path> write_path(const fs::path& root, const fs::path& sub, const sim::PathRecord& p,
                                 std::uint64_t seed, std::size_t grid) {
    fs::create_directories(root / sub);
    std::vector<fs::path> files;
    for (std::size_t k = 0; k < p.snapshots.size(); ++k) {
        char name[32];
        std::snprintf(name, sizeof name, "snapshot_%04zu.csv", k);
        auto out = open_out(root / sub / name);
        io::write_snapshot_csv(out, p.snapshot_times[k], p.snapshots[k]);
        files.push_back(sub / name);
    }
    {
        auto out = open_out(root / sub / "magnetization.csv");
        io::write_series_csv(out, p.snapshot_times, p.magnetization_series);
        files.push_back(sub / "magnetization.csv");
    }
    if (grid != 0 && p.snapshot_times.size() >= 2) {
        std::vector<DensityField> slices;
        for (const auto& cfg : p.snapshots) slices.push_back(sim::empirical_density(cfg, grid));
        bool uniform = p.snapshot_times.front() == 0.0;
        const double dt = p.snapshot_times[1];
        for (std::size_t k = 0; k < p.snapshot_times.size(); ++k) {
            uniform = uniform && std::abs(p.snapshot_times[k] - dt * static_cast<double>(k)) < 1e-12;
        }
        if (uniform) {
            auto out = open_out(root / sub / "empirical_density.csv");
            io::write_trajectory_csv(out, DensityTrajectory(dt, std::move(slices)));
            files.push_back(sub / "empirical_density.csv");
        }
    }
    write_json(root / sub / "diagnostics.json", path_diagnostics(p, seed));
    files.push_back(sub / "diagnostics.json");
    return files;
}

json aggregate(const std::vector<sim::PathRecord>& paths) {
    const double n = static_cast<double>(paths.size());
    auto mean_var = [n](const std::vector<double>& v) {
        double mu = 0.0, var = 0.0;
        for (double x : v) mu += x / n;
        for (double x : v) var += (x - mu) * (x - mu);
        return json{{"mean", mu}, {"variance", n > 1 ? var / (n - 1) : 0.0}};
    };
    const auto& times = paths.front().snapshot_times;
    json m_mean = json::array(), m_var = json::array();
    for (std::size_t k = 0; k < times.size(); ++k) {
        std::vector<double> v;
        for (const auto& p : paths) v.push_back(p.magnetization_series[k]);
        const auto mv = mean_var(v);
        m_mean.push_back(mv["mean"]);
        m_var.push_back(mv["variance"]);
    }
    json out = {{"n_replicas", paths.size()},
                {"snapshot_times", times},
                {"magnetization_mean", m_mean},
                {"magnetization_variance", m_var}};
    if (paths.front().log_radon_nikodym) {
        std::vector<double> v, z;
        for (const auto& p : paths) {
            v.push_back(*p.log_radon_nikodym);
            z.push_back(std::exp(static_cast<double>(p.n_sites) * *p.log_radon_nikodym));
        }
        out["log_radon_nikodym"] = mean_var(v);
        out["radon_nikodym"] = mean_var(z);
    }
    for (const auto& [id, series] : paths.front().dynkin_residuals) {
        std::vector<double> m, q;
        for (const auto& p : paths) {
            m.push_back(p.dynkin_residuals.at(id).back());
            q.push_back(p.quadratic_variation.at(id));
        }
        out["dynkin_final"][id] = mean_var(m);
        out["quadratic_variation"][id] = mean_var(q);
    }
    return out;
}

}  // namespace

int run_simulate(const SimulateArgs& args) {
    const auto t0 = Clock::now();
    auto r = resolve_simulation(args);
    const fs::path root = prepare_dir(args.out_dir);
    auto manifest = start_manifest("simulate", r.spec);

    if (r.replicas == 1) {
        const auto path = sim::run_path(r.sim);
        manifest.seeds = {r.sim.seed};
        manifest.outputs = write_path(root, "", path, r.sim.seed, r.grid);
    } else {
        const auto paths = sim::map_replicas<sim::PathRecord>(
            r.sim, r.replicas, [](std::size_t, const sim::PathRecord& p) { return p; }, args.threads);
        for (std::size_t i = 0; i < paths.size(); ++i) {
            char sub[32];
            std::snprintf(sub, sizeof sub, "replica_%04zu", i);
            const auto seed = sim::replica_seed(r.sim.seed, i);
            manifest.seeds.push_back(seed);
            for (auto& f : write_path(root, sub, paths[i], seed, r.grid)) manifest.outputs.push_back(f);
        }
        write_json(root / "aggregate.json", aggregate(paths));
        manifest.outputs.push_back("aggregate.json");
    }
    manifest.wall_clock_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    manifest.write(root / "manifest.json", root);
    return 0;
}

int run_solve(const SolveArgs& args, bool perturbed) {
    const auto t0 = Clock::now();
    json s = load_spec(args.spec_file);
    if (args.grid) s["grid"] = *args.grid;
    if (args.t_final) s["t_final"] = *args.t_final;
    if (!args.rate.empty()) s["rate"] = io::load_json_argument(args.rate);
    if (!args.tilt.empty()) s["tilt"] = io::load_json_argument(args.tilt);
    if (!args.initial.empty()) s["initial"] = args.initial;
    if (args.substeps) s["substeps"] = *args.substeps;
    if (args.stride) s["stride"] = *args.stride;
    if (!perturbed && s.contains("tilt") && !s.at("tilt").is_null()) {
        throw ConfigurationError("hydro ignores tilts; use the perturbed command");
    }

    hydro::SolverSpec spec;
    const auto initial = spec_value<std::string>(s, "initial", "uniform(1,1)");
    spec.initial = initial_field(initial, spec_value<std::size_t>(s, "grid", 0));
    spec.grid_size = spec.initial.grid_size();
    spec.t_final = spec_value<double>(s, "t_final", 1.0);
    spec.rate_family = s.contains("rate") ? SwitchRateFamily::from_json(s.at("rate")) : SwitchRateFamily::constant();
    spec.tilt = perturbed ? field_of(s.value("tilt", json())) : std::nullopt;
    spec.reaction_substeps = spec_value<std::size_t>(s, "substeps", 1);
    spec.stride = spec_value<std::size_t>(s, "stride", 1);
    spec.validate();

    s["grid"] = spec.grid_size;
    s["t_final"] = spec.t_final;
    s["rate"] = spec.rate_family.to_json();
    s["initial"] = initial;
    s["substeps"] = spec.reaction_substeps;
    s["stride"] = spec.stride;
    if (perturbed) s["tilt"] = spec.tilt ? spec.tilt->to_json() : json();

    const fs::path root = prepare_dir(args.out_dir);
    auto manifest = start_manifest(perturbed ? "perturbed" : "hydro", s);
    const auto result = hydro::solve_detailed(spec);
    const auto& traj = result.trajectory;
    {
        auto out = open_out(root / "trajectory.csv");
        io::write_trajectory_csv(out, traj);
    }
    std::vector<double> times;
    for (std::size_t k = 0; k < traj.size(); ++k) times.push_back(traj.time(k));
    {
        auto out = open_out(root / "magnetization.csv");
        io::write_series_csv(out, times, result.magnetization);
    }

    json meta = {{"grid", spec.grid_size},
                 {"n_steps", spec.n_steps()},
                 {"dt", spec.dt()},
                 {"t_final_requested", spec.t_final},
                 {"t_final_reached", spec.dt() * static_cast<double>(spec.n_steps())},
                 {"mass", traj.front().total_mass()},
                 {"mass_drift", result.mass_drift},
                 {"min_value", result.min_value}};
    meta["magnetization_residual"] =
        traj.size() >= 3 ? json(hydro::perturbed_magnetization_check(traj, spec.tilt, spec.rate_family)) : json();
    if (!spec.tilt || spec.tilt->is_zero()) {
        // the closed magnetization equation only holds without a tilt
        const double m0 = traj.front().magnetization();
        const auto ode = hydro::integrate_magnetization_ode(spec.rate_family, m0, traj.t_final(), traj.dt() / 8.0);
        double gap = 0.0;
        for (std::size_t k = 0; k < traj.size() && 8 * k < ode.values.size(); ++k) {
            gap = std::max(gap, std::abs(result.magnetization[k] - ode.values[8 * k]));
        }
        meta["magnetization_ode_gap"] = gap;
    }
    write_json(root / "metadata.json", meta);
    manifest.outputs = {"trajectory.csv", "magnetization.csv", "metadata.json"};
    manifest.wall_clock_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    manifest.write(root / "manifest.json", root);
    return 0;
}

int run_rate(const RateArgs& args) {
    const auto t0 = Clock::now();
    if (args.out.empty()) throw ConfigurationError("--out is required");
    const auto traj = io::read_trajectory_csv(fs::path(args.trajectory));
    const DensityField reference = initial_field(args.reference_density, traj.grid_size());
    const auto rates = args.rate.empty() ? SwitchRateFamily::constant()
                                         : SwitchRateFamily::from_json(io::load_json_argument(args.rate));
    ldp::RateOptions options;
    options.epsilon = args.epsilon;
    if (options.epsilon && !(*options.epsilon >= 0.0 && *options.epsilon < 1.0)) {
        throw ConfigurationError("--epsilon must lie in [0, 1)");
    }
    const auto report = ldp::total_rate(traj, reference, rates, options);

    const fs::path out(args.out);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    write_json(out, report.to_json(!args.omit_grid));

    json spec = {{"trajectory", args.trajectory}, {"reference_density", args.reference_density},
                 {"rate", rates.to_json()},       {"epsilon", args.epsilon ? json(*args.epsilon) : json()},
                 {"include_grid", !args.omit_grid}};
    auto manifest = start_manifest("rate", spec);
    manifest.outputs = {out.filename()};
    manifest.wall_clock_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    fs::path manifest_path = out;
    manifest_path.replace_extension(".manifest.json");
    manifest.write(manifest_path, out.has_parent_path() ? out.parent_path() : fs::path("."));
    return 0;
}

int run_verify(const VerifyArgs& args) {
    const auto t0 = Clock::now();
    const auto ids = verify::suite_criteria(args.suite);
    verify::VerifyOptions options;
    options.seed = args.seed;
    options.threads = args.threads;
    std::vector<verify::CriterionResult> results;
    for (int id : ids) {
        results.push_back(verify::run_criterion(id, options));
        std::cerr << results.back().summary_line() << '\n';
    }
    const json report = verify::report_json(args.suite, results);
    std::cout << report.dump(2) << '\n';
    if (!args.out_dir.empty()) {
        const fs::path root = prepare_dir(args.out_dir);
        write_json(root / "report.json", report);
        auto manifest = start_manifest("verify", {{"suite", args.suite}, {"seed", args.seed}});
        manifest.seeds = {args.seed};
        manifest.outputs = {"report.json"};
        manifest.wall_clock_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
        manifest.write(root / "manifest.json", root);
    }
    return report.at("passed").get<bool>() ? 0 : 1;
}

}  // namespace rtp::cli
