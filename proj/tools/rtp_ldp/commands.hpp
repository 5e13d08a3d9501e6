#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace rtp::cli {

/// Flags shared by the commands; unset optionals fall back to the spec file.
struct SimulateArgs {
    std::string spec_file;
    std::optional<std::size_t> n_sites;
    std::optional<double> t_final;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> replicas;
    std::string rate;
    std::string tilt;
    std::string rn_field;
    std::string initial;
    std::vector<double> snapshots;
    std::optional<std::size_t> snapshot_count;
    std::optional<std::size_t> grid;
    unsigned threads = 0;
    std::string out_dir;
};

struct SolveArgs {
    std::string spec_file;
    std::optional<std::size_t> grid;
    std::optional<double> t_final;
    std::string rate;
    std::string tilt;
    std::string initial;
    std::optional<std::size_t> substeps;
    std::optional<std::size_t> stride;
    std::string out_dir;
};

struct RateArgs {
    std::string trajectory;
    std::string reference_density;
    std::string rate;
    std::optional<double> epsilon;
    bool omit_grid = false;
    std::string out;
};

struct VerifyArgs {
    std::string suite;
    std::uint64_t seed = 20240617;
    unsigned threads = 0;
    std::string out_dir;
};

/// Each command returns the process exit code and throws ConfigurationError /
/// DomainError for invalid input.
int run_simulate(const SimulateArgs& args);
int run_solve(const SolveArgs& args, bool perturbed);
int run_rate(const RateArgs& args);
int run_verify(const VerifyArgs& args);

}  // namespace rtp::cli
