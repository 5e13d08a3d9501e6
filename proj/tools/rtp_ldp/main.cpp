#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "commands.hpp"
#include "rtp/core/errors.hpp"
#include "rtp/verify/criteria.hpp"

namespace {

constexpr int kRuntimeError = 1;
constexpr int kUsageError = 2;

}  // namespace

int main(int argc, char** argv) {
    using namespace rtp::cli;
    CLI::App app{"Run-and-tumble particles: simulation, hydrodynamic solves, rate functions and verification"};
    app.require_subcommand(1);
    app.set_version_flag("--version", RTP_VERSION);

    unsigned threads = 0;
    app.add_option("--threads", threads, "Worker threads for replica runs (default: RTP_LDP_THREADS or all cores)")
        ->envname("RTP_LDP_THREADS");

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Simulate the particle system");
    simulate->add_option("--spec", sim.spec_file, "JSON spec or a previous manifest.json");
    simulate->add_option("--n-sites", sim.n_sites, "Number of lattice sites N");
    simulate->add_option("--t-final", sim.t_final, "Final time T");
    simulate->add_option("--seed", sim.seed, "64-bit seed");
    simulate->add_option("--replicas", sim.replicas, "Independent replicas (seed ^ i)");
    simulate->add_option("--rate", sim.rate, "Switch rate JSON (file or inline)");
    simulate->add_option("--tilt", sim.tilt, "Tilt field JSON; simulates the perturbed dynamics");
    simulate->add_option("--rn-field", sim.rn_field, "Field H whose (1/N) log Z^H is accumulated");
    simulate->add_option("--initial", sim.initial, "uniform(a,b), sine(mean,amp,layer) or a density CSV");
    simulate->add_option("--snapshots", sim.snapshots, "Snapshot times")->delimiter(',');
    simulate->add_option("--snapshot-count", sim.snapshot_count, "Uniform snapshots: count intervals on [0, T]");
    simulate->add_option("--grid", sim.grid, "Also write the binned empirical density on this many cells");
    simulate->add_option("--out-dir", sim.out_dir, "Output directory")->required();

    SolveArgs solve;
    auto add_solve = [&](const char* name, const char* help, bool with_tilt) {
        auto* cmd = app.add_subcommand(name, help);
        cmd->add_option("--spec", solve.spec_file, "JSON spec or a previous manifest.json");
        cmd->add_option("--grid", solve.grid, "Number of cells M");
        cmd->add_option("--t-final", solve.t_final, "Final time T");
        cmd->add_option("--rate", solve.rate, "Switch rate JSON (file or inline)");
        if (with_tilt) cmd->add_option("--tilt", solve.tilt, "Tilt field JSON");
        cmd->add_option("--initial", solve.initial, "uniform(a,b), sine(mean,amp,layer) or a density CSV");
        cmd->add_option("--substeps", solve.substeps, "RK4 substeps per reaction half step");
        cmd->add_option("--stride", solve.stride, "Store every k-th step");
        cmd->add_option("--out-dir", solve.out_dir, "Output directory")->required();
        return cmd;
    };
    auto* hydro = add_solve("hydro", "Solve the hydrodynamic equation", false);
    auto* perturbed = add_solve("perturbed", "Solve the perturbed hydrodynamic equation", true);

    RateArgs rate;
    auto* rate_cmd = app.add_subcommand("rate", "Evaluate the rate function of a trajectory");
    rate_cmd->add_option("--trajectory", rate.trajectory, "Trajectory CSV (t,x_index,sigma,value)")->required();
    rate_cmd->add_option("--reference-density", rate.reference_density, "Initial reference profile or density CSV")
        ->required();
    rate_cmd->add_option("--rate", rate.rate, "Switch rate JSON (file or inline)");
    rate_cmd->add_option("--epsilon", rate.epsilon, "Force regularization (1 - eps) rho + eps");
    rate_cmd->add_flag("--no-grid", rate.omit_grid, "Omit the reconstructed tilt grid from the report");
    rate_cmd->add_option("--out", rate.out, "Report JSON path")->required();

    VerifyArgs ver;
    auto* verify = app.add_subcommand("verify", "Run a verification suite");
    std::string suites;
    for (const auto& s : rtp::verify::suite_names()) suites += (suites.empty() ? "" : ", ") + s;
    verify->add_option("suite", ver.suite, "One of: " + suites)->required();
    verify->add_option("--seed", ver.seed, "Base seed");
    verify->add_option("--out-dir", ver.out_dir, "Also write report.json and manifest.json here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kUsageError;
    }

    try {
        if (*simulate) {
            sim.threads = threads;
            return run_simulate(sim);
        }
        if (*hydro) return run_solve(solve, false);
        if (*perturbed) return run_solve(solve, true);
        if (*rate_cmd) return run_rate(rate);
        if (*verify) {
            ver.threads = threads;
            return run_verify(ver);
        }
    } catch (const rtp::ConfigurationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const rtp::DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: malformed spec: " << e.what() << '\n';
        return kUsageError;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << '\n';
        return kRuntimeError;
    }
    return kUsageError;
}
