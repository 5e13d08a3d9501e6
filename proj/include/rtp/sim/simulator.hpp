#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rtp/core/density.hpp"
#include "rtp/core/lattice.hpp"
#include "rtp/core/perturbation.hpp"
#include "rtp/core/rate_family.hpp"
#include "rtp/sim/fenwick.hpp"
#include "rtp/sim/rng.hpp"

namespace rtp::sim {

/// Named smooth test function used for Dynkin residuals and quadratic variation.
struct TestFunction {
    std::string id;
    PerturbationField field;
};

/// Poisson intensity given as a closed-form profile, as a density on a grid
/// (piecewise constant per cell), or a fixed starting configuration.
using InitialCondition = std::variant<DensityField::Profile, DensityField, LatticeConfiguration>;

struct SimulationSpec {
    std::size_t n_sites = 0;
    InitialCondition initial = DensityField::Profile([](double, Spin) { return 1.0; });
    SwitchRateFamily rate_family = SwitchRateFamily::constant();
    std::optional<PerturbationField> tilt;
    double t_final = 1.0;
    std::uint64_t seed = 0;
    /// Sorted times in [0, t_final]; empty means {0, t_final}.
    std::vector<double> snapshot_times;
    /// Field H whose (1/N) log Z^H and on-path rate functional are accumulated.
    std::optional<PerturbationField> radon_nikodym_field;
    std::vector<TestFunction> test_functions;
    bool record_events = false;

    /// Throws ConfigurationError on invalid combinations.
    void validate() const;
    std::vector<double> resolved_snapshot_times() const;
};

enum class EventKind : std::uint8_t { active_jump, flip, none };

struct Event {
    double time = 0.0;
    std::uint32_t site = 0;
    Spin spin = Spin::plus;  // state before the event
    EventKind kind = EventKind::none;

    friend bool operator==(const Event&, const Event&) = default;
};

struct JumpCounts {
    std::int64_t active = 0;
    std::int64_t flips_plus_to_minus = 0;
    std::int64_t flips_minus_to_plus = 0;

    std::int64_t flips() const { return flips_plus_to_minus + flips_minus_to_plus; }
    friend bool operator==(const JumpCounts&, const JumpCounts&) = default;
};

struct PathRecord {
    std::size_t n_sites = 0;
    double t_final = 0.0;
    SwitchRateFamily rate_family;
    std::optional<PerturbationField> tilt;

    LatticeConfiguration initial;
    std::vector<double> snapshot_times;
    std::vector<LatticeConfiguration> snapshots;
    std::vector<double> magnetization_series;
    std::vector<JumpCounts> jump_count_series;
    JumpCounts jump_counts;
    std::int64_t rejected_proposals = 0;

    /// (1/N) log Z^H_{N,T} for SimulationSpec::radon_nikodym_field.
    std::optional<double> log_radon_nikodym;
    /// Dynamic rate functional of the empirical path, I_tr(pi^N; H), same field.
    std::optional<double> path_rate;
    /// Dynkin martingale of each test function at the snapshot times.
    std::map<std::string, std::vector<double>> dynkin_residuals;
    /// int_0^T Gamma dt per test function.
    std::map<std::string, double> quadratic_variation;

    bool has_event_log = false;
    std::vector<Event> event_log;

    friend bool operator==(const PathRecord&, const PathRecord&) = default;
};

/// Independent Poisson occupation numbers with mean rho(x/N, sigma).
LatticeConfiguration sample_initial(const SimulationSpec& spec, Rng& rng);

/// Event selection for the plain and tilted generators.
///
/// Sites are drawn from per-layer Fenwick trees over eta(., sigma). With a
/// tilt, proposals are made at the class-uniform bound rates and accepted
/// with probability (exact time-t rate) / bound (thinning), which keeps the
/// simulation exact for time-dependent tilts.
class EventSampler {
public:
    EventSampler(const SimulationSpec& spec, const LatticeConfiguration& cfg);

    /// Next accepted event after `clock`. If none occurs before `horizon` the
    /// returned event has kind `none` and time > horizon; an empty
    /// configuration returns kind `none` with infinite time.
    Event next(const LatticeConfiguration& cfg, double clock, double horizon, Rng& rng);

    /// Applies the event to cfg and the sampling trees.
    void apply(LatticeConfiguration& cfg, const Event& ev);

    /// Total untilted event rate N |eta| + sum_sigma n(sigma) c(sigma, m).
    double total_rate(const LatticeConfiguration& cfg) const;
    /// Exact tilted rate for a particle at (x, s) at time t.
    double jump_rate(std::size_t x, Spin s, double t) const;
    double flip_rate(const LatticeConfiguration& cfg, std::size_t x, Spin s, double t) const;

    std::int64_t rejected() const { return rejected_; }

private:
    double jump_factor(std::size_t x, Spin s, double t) const;
    double flip_factor(std::size_t x, Spin s, double t) const;

    std::size_t n_sites_;
    SwitchRateFamily rates_;
    std::optional<PerturbationField> tilt_;
    bool tilt_constant_ = true;
    double jump_bound_ = 1.0;
    double flip_bound_ = 1.0;
    std::array<FenwickTree, 2> trees_;
    std::array<std::vector<double>, 2> cached_jump_factor_;
    std::array<std::vector<double>, 2> cached_flip_factor_;
    std::int64_t rejected_ = 0;
};

/// Simulates one path on [0, T]. Deterministic in spec.seed.
PathRecord run_path(const SimulationSpec& spec);

/// Bins eta(x, sigma) / N into M cells of width 1/M; M must divide N.
DensityField empirical_density(const LatticeConfiguration& cfg, std::size_t grid_size);

/// Snapshots of a path as a density trajectory; snapshot times must be uniform from 0.
DensityTrajectory empirical_trajectory(const PathRecord& path, std::size_t grid_size);

/// Post-hoc path functionals. All of these replay the recorded event log and
/// throw StateError if the path was run without record_events.
double log_radon_nikodym(const PathRecord& path, const PerturbationField& field);
double path_rate_functional(const PathRecord& path, const PerturbationField& field);
/// Dynkin martingale of `test_function` at the path's snapshot times.
std::vector<double> dynkin_residual(const PathRecord& path, const PerturbationField& test_function);
double quadratic_variation(const PathRecord& path, const PerturbationField& test_function);

}  // namespace rtp::sim
