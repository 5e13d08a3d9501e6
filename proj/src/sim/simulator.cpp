#include "rtp/sim/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <set>

#include "rtp/core/errors.hpp"
#include "rtp/sim/path_integrals.hpp"

namespace rtp::sim {

void SimulationSpec::validate() const {
    if (n_sites == 0) throw ConfigurationError("n_sites must be positive");
    if (!(t_final >= 0.0) || !std::isfinite(t_final)) throw ConfigurationError("t_final must be finite and >= 0");
    if (!std::is_sorted(snapshot_times.begin(), snapshot_times.end())) {
        throw ConfigurationError("snapshot times must be sorted");
    }
    for (double t : snapshot_times) {
        if (t < 0.0 || t > t_final) throw ConfigurationError("snapshot times must lie in [0, t_final]");
    }
    if (const auto* cfg = std::get_if<LatticeConfiguration>(&initial); cfg && cfg->n_sites() != n_sites) {
        throw ConfigurationError("initial configuration has the wrong number of sites");
    }
    std::set<std::string> ids;
    for (const auto& f : test_functions) {
        if (!ids.insert(f.id).second) throw ConfigurationError("duplicate test function id '" + f.id + "'");
    }
}

std::vector<double> SimulationSpec::resolved_snapshot_times() const {
    if (!snapshot_times.empty()) return snapshot_times;
    if (t_final == 0.0) return {0.0};
    return {0.0, t_final};
}

LatticeConfiguration sample_initial(const SimulationSpec& spec, Rng& rng) {
    if (const auto* cfg = std::get_if<LatticeConfiguration>(&spec.initial)) return *cfg;

    const std::size_t n = spec.n_sites;
    auto intensity = [&](std::size_t x, Spin s) -> double {
        const double pos = static_cast<double>(x) / static_cast<double>(n);
        if (const auto* profile = std::get_if<DensityField::Profile>(&spec.initial)) return (*profile)(pos, s);
        const auto& field = std::get<DensityField>(spec.initial);
        const auto cell = std::min(field.grid_size() - 1, static_cast<std::size_t>(pos * field.grid_size()));
        return field(cell, s);
    };

    LatticeConfiguration cfg(n);
    for (Spin s : kSpins) {
        for (std::size_t x = 0; x < n; ++x) {
            const double mean = intensity(x, s);
            if (!(mean >= 0.0) || !std::isfinite(mean)) throw DomainError("initial density must be finite and >= 0");
            if (mean == 0.0) continue;
            std::poisson_distribution<LatticeConfiguration::Count> pois(mean);
            cfg.add(x, s, pois(rng));
        }
    }
    return cfg;
}

EventSampler::EventSampler(const SimulationSpec& spec, const LatticeConfiguration& cfg)
    : n_sites_(cfg.n_sites()), rates_(spec.rate_family) {
    if (spec.tilt && !spec.tilt->is_zero()) {
        tilt_ = spec.tilt;
        tilt_constant_ = tilt_->is_time_constant();
        // |H(y) - H(x)| <= sup|dH/dx| / N for lattice neighbours; |H~| <= 2 sup|H|
        jump_bound_ = std::exp(tilt_->slope_bound(spec.t_final) / static_cast<double>(n_sites_));
        flip_bound_ = std::exp(2.0 * tilt_->sup_bound(spec.t_final));
        if (tilt_constant_) {
            for (Spin s : kSpins) {
                auto& jf = cached_jump_factor_[layer(s)];
                auto& ff = cached_flip_factor_[layer(s)];
                jf.resize(n_sites_);
                ff.resize(n_sites_);
                for (std::size_t x = 0; x < n_sites_; ++x) {
                    const double pos = static_cast<double>(x) / static_cast<double>(n_sites_);
                    const double next =
                        static_cast<double>(cfg.shifted(x, s)) / static_cast<double>(n_sites_);
                    jf[x] = std::exp(tilt_->value(0.0, next, s) - tilt_->value(0.0, pos, s));
                    ff[x] = std::exp(-sign(s) * tilt_->tilde(0.0, pos));
                }
            }
        }
    }
    for (Spin s : kSpins) trees_[layer(s)] = FenwickTree::from_weights(cfg.layer_counts(s));
}

double EventSampler::jump_factor(std::size_t x, Spin s, double t) const {
    if (!tilt_) return 1.0;
    if (tilt_constant_) return cached_jump_factor_[layer(s)][x];
    const double inv_n = 1.0 / static_cast<double>(n_sites_);
    const std::size_t y = s == Spin::plus ? (x + 1) % n_sites_ : (x + n_sites_ - 1) % n_sites_;
    return std::exp(tilt_->value(t, static_cast<double>(y) * inv_n, s) -
                    tilt_->value(t, static_cast<double>(x) * inv_n, s));
}

double EventSampler::flip_factor(std::size_t x, Spin s, double t) const {
    if (!tilt_) return 1.0;
    if (tilt_constant_) return cached_flip_factor_[layer(s)][x];
    return std::exp(-sign(s) * tilt_->tilde(t, static_cast<double>(x) / static_cast<double>(n_sites_)));
}

double EventSampler::jump_rate(std::size_t x, Spin s, double t) const {
    return static_cast<double>(n_sites_) * jump_factor(x, s, t);
}

double EventSampler::flip_rate(const LatticeConfiguration& cfg, std::size_t x, Spin s, double t) const {
    return rates_.evaluate_unchecked(s, cfg.magnetization()) * flip_factor(x, s, t);
}

double EventSampler::total_rate(const LatticeConfiguration& cfg) const {
    const double m = cfg.magnetization();
    double total = static_cast<double>(n_sites_) * static_cast<double>(cfg.total());
    for (Spin s : kSpins) total += static_cast<double>(cfg.class_total(s)) * rates_.evaluate_unchecked(s, m);
    return total;
}

Event EventSampler::next(const LatticeConfiguration& cfg, double clock, double horizon, Rng& rng) {
    if (cfg.empty()) return Event{std::numeric_limits<double>::infinity(), 0, Spin::plus, EventKind::none};

    const auto n_plus = cfg.class_total(Spin::plus);
    const auto n_minus = cfg.class_total(Spin::minus);
    const auto n_total = static_cast<std::uint64_t>(cfg.total());
    const double m = cfg.magnetization();
    const double active = static_cast<double>(n_sites_) * static_cast<double>(n_total) * jump_bound_;
    const double flip_plus = static_cast<double>(n_plus) * rates_.evaluate_unchecked(Spin::plus, m) * flip_bound_;
    const double flip_minus = static_cast<double>(n_minus) * rates_.evaluate_unchecked(Spin::minus, m) * flip_bound_;
    const double total = active + flip_plus + flip_minus;

    for (;;) {
        clock += exponential(rng, total);
        if (clock > horizon) return Event{clock, 0, Spin::plus, EventKind::none};

        const double u = uniform01(rng) * total;
        Event ev;
        ev.time = clock;
        double accept = 1.0;
        if (u < active) {
            const auto k = static_cast<std::int64_t>(uniform_below(rng, n_total));
            ev.kind = EventKind::active_jump;
            if (k < n_plus) {
                ev.spin = Spin::plus;
                ev.site = static_cast<std::uint32_t>(trees_[0].find(k));
            } else {
                ev.spin = Spin::minus;
                ev.site = static_cast<std::uint32_t>(trees_[1].find(k - n_plus));
            }
            if (tilt_) accept = jump_factor(ev.site, ev.spin, clock) / jump_bound_;
        } else {
            ev.kind = EventKind::flip;
            ev.spin = u < active + flip_plus ? Spin::plus : Spin::minus;
            const auto n_class = static_cast<std::uint64_t>(cfg.class_total(ev.spin));
            if (n_class == 0) continue;  // only reachable through rounding at the category boundary
            const auto k = static_cast<std::int64_t>(uniform_below(rng, n_class));
            ev.site = static_cast<std::uint32_t>(trees_[layer(ev.spin)].find(k));
            if (tilt_) accept = flip_factor(ev.site, ev.spin, clock) / flip_bound_;
        }
        if (!tilt_ || uniform01(rng) < accept) return ev;
        ++rejected_;
    }
}

void EventSampler::apply(LatticeConfiguration& cfg, const Event& ev) {
    const std::size_t x = ev.site;
    const Spin s = ev.spin;
    cfg.remove(x, s);
    trees_[layer(s)].add(x, -1);
    if (ev.kind == EventKind::active_jump) {
        const std::size_t y = cfg.shifted(x, s);
        cfg.add(y, s);
        trees_[layer(s)].add(y, 1);
    } else {
        cfg.add(x, flipped(s));
        trees_[layer(flipped(s))].add(x, 1);
    }
}

namespace {

/// Integrands attached to a path together with their boundary terms.
struct PathFunctionals {
    std::vector<std::unique_ptr<SiteIntegrand>> owned;
    std::optional<PerturbationField> rn_field;
    std::vector<PerturbationField> test_fields;
    std::size_t n_sites = 0;

    PathFunctionals(std::size_t n, const std::optional<PerturbationField>& rn, std::vector<PerturbationField> tests,
                    const std::optional<PerturbationField>& tilt)
        : rn_field(rn), test_fields(std::move(tests)), n_sites(n) {
        const PerturbationField k = tilt.value_or(PerturbationField{});
        if (rn_field) {
            owned.push_back(exponential_martingale_integrand(*rn_field, n));
            owned.push_back(path_rate_integrand(*rn_field, n));
        }
        for (const auto& g : test_fields) {
            owned.push_back(dynkin_integrand(g, k, n));
            owned.push_back(carre_du_champ_integrand(g, k, n));
        }
    }

    std::vector<const SiteIntegrand*> pointers() const {
        std::vector<const SiteIntegrand*> out;
        for (const auto& p : owned) out.push_back(p.get());
        return out;
    }

    std::size_t test_offset() const { return rn_field ? 2 : 0; }
};

/// Drives a PathIntegrator through a sequence of events, recording snapshots.
class PathDriver {
public:
    PathDriver(const PathFunctionals& fns, const SwitchRateFamily& rates, LatticeConfiguration cfg,
               std::vector<double> snapshot_times)
        : fns_(fns), integ_(rates, fns.pointers()), cfg_(std::move(cfg)), times_(std::move(snapshot_times)) {
        integ_.start(cfg_, 0.0);
        if (fns_.rn_field) rn_boundary0_ = pairing(cfg_, *fns_.rn_field, 0.0);
        for (const auto& g : fns_.test_fields) test_boundary0_.push_back(pairing(cfg_, g, 0.0));
        dynkin_.resize(fns_.test_fields.size());
    }

    LatticeConfiguration& cfg() { return cfg_; }

    /// Records every pending snapshot strictly before `t`.
    void snapshots_before(double t) {
        while (next_ < times_.size() && times_[next_] < t) record(times_[next_++]);
    }

    void before_event(const Event& ev) {
        integ_.touch(cfg_, ev.site, ev.spin, ev.time);
        if (ev.kind == EventKind::active_jump) {
            integ_.touch(cfg_, cfg_.shifted(ev.site, ev.spin), ev.spin, ev.time);
        } else {
            integ_.touch(cfg_, ev.site, flipped(ev.spin), ev.time);
        }
    }

    void after_event(const Event& ev) {
        if (ev.kind == EventKind::active_jump) {
            ++counts_.active;
        } else {
            (ev.spin == Spin::plus ? counts_.flips_plus_to_minus : counts_.flips_minus_to_plus) += 1;
            integ_.magnetization_changed(ev.time, cfg_.magnetization());
        }
    }

    void finish(PathRecord& rec, double t_final) {
        snapshots_before(std::numeric_limits<double>::infinity());
        integ_.flush(cfg_, t_final);
        rec.snapshot_times = times_;
        rec.snapshots = std::move(snapshots_);
        rec.magnetization_series = std::move(magnetization_);
        rec.jump_count_series = std::move(count_series_);
        rec.jump_counts = counts_;
        const double inv_n = 1.0 / static_cast<double>(fns_.n_sites);
        if (fns_.rn_field) {
            const double boundary = pairing(cfg_, *fns_.rn_field, t_final) - rn_boundary0_;
            rec.log_radon_nikodym = boundary - inv_n * integ_.value(0);
            rec.path_rate = boundary - inv_n * integ_.value(1);
        }
        for (std::size_t i = 0; i < fns_.test_fields.size(); ++i) {
            quadratic_variation_.push_back(integ_.value(fns_.test_offset() + 2 * i + 1));
        }
    }

    const std::vector<std::vector<double>>& dynkin() const { return dynkin_; }
    const std::vector<double>& quadratic_variation() const { return quadratic_variation_; }

private:
    void record(double t) {
        snapshots_.push_back(cfg_);
        magnetization_.push_back(cfg_.magnetization());
        count_series_.push_back(counts_);
        if (fns_.test_fields.empty()) return;
        integ_.flush(cfg_, t);
        for (std::size_t i = 0; i < fns_.test_fields.size(); ++i) {
            const double integral = integ_.value(fns_.test_offset() + 2 * i);
            dynkin_[i].push_back(pairing(cfg_, fns_.test_fields[i], t) - test_boundary0_[i] - integral);
        }
    }

    const PathFunctionals& fns_;
    PathIntegrator integ_;
    LatticeConfiguration cfg_;
    std::vector<double> times_;
    std::size_t next_ = 0;
    JumpCounts counts_;
    double rn_boundary0_ = 0.0;
    std::vector<double> test_boundary0_;
    std::vector<LatticeConfiguration> snapshots_;
    std::vector<double> magnetization_;
    std::vector<JumpCounts> count_series_;
    std::vector<std::vector<double>> dynkin_;
    std::vector<double> quadratic_variation_;
};

std::vector<PerturbationField> fields_of(const std::vector<TestFunction>& fns) {
    std::vector<PerturbationField> out;
    for (const auto& f : fns) out.push_back(f.field);
    return out;
}

/// Replays a recorded path through a fresh set of functionals.
PathRecord replay(const PathRecord& path, const std::optional<PerturbationField>& rn,
                  std::vector<PerturbationField> tests, std::vector<std::vector<double>>* dynkin,
                  std::vector<double>* qv) {
    if (!path.has_event_log) throw StateError("path was recorded without an event log");
    PathFunctionals fns(path.n_sites, rn, std::move(tests), path.tilt);
    PathDriver driver(fns, path.rate_family, path.initial, path.snapshot_times);
    LatticeConfiguration& cfg = driver.cfg();
    for (const Event& ev : path.event_log) {
        driver.snapshots_before(ev.time);
        driver.before_event(ev);
        cfg.remove(ev.site, ev.spin);
        if (ev.kind == EventKind::active_jump) {
            cfg.add(cfg.shifted(ev.site, ev.spin), ev.spin);
        } else {
            cfg.add(ev.site, flipped(ev.spin));
        }
        driver.after_event(ev);
    }
    PathRecord out;
    driver.finish(out, path.t_final);
    if (dynkin) *dynkin = driver.dynkin();
    if (qv) *qv = driver.quadratic_variation();
    return out;
}

}  // namespace

PathRecord run_path(const SimulationSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    LatticeConfiguration initial = sample_initial(spec, rng);

    PathRecord rec;
    rec.n_sites = spec.n_sites;
    rec.t_final = spec.t_final;
    rec.rate_family = spec.rate_family;
    if (spec.tilt && !spec.tilt->is_zero()) rec.tilt = spec.tilt;
    rec.initial = initial;
    rec.has_event_log = spec.record_events;

    PathFunctionals fns(spec.n_sites, spec.radon_nikodym_field, fields_of(spec.test_functions), rec.tilt);
    PathDriver driver(fns, spec.rate_family, std::move(initial), spec.resolved_snapshot_times());
    LatticeConfiguration& cfg = driver.cfg();
    EventSampler sampler(spec, cfg);

    double clock = 0.0;
    for (;;) {
        const Event ev = sampler.next(cfg, clock, spec.t_final, rng);
        driver.snapshots_before(ev.time);
        if (ev.kind == EventKind::none) break;
        driver.before_event(ev);
        sampler.apply(cfg, ev);
        driver.after_event(ev);
        if (spec.record_events) rec.event_log.push_back(ev);
        clock = ev.time;
    }
    driver.finish(rec, spec.t_final);
    rec.rejected_proposals = sampler.rejected();
    for (std::size_t i = 0; i < spec.test_functions.size(); ++i) {
        rec.dynkin_residuals[spec.test_functions[i].id] = driver.dynkin()[i];
        rec.quadratic_variation[spec.test_functions[i].id] = driver.quadratic_variation()[i];
    }
    return rec;
}

DensityField empirical_density(const LatticeConfiguration& cfg, std::size_t grid_size) {
    const std::size_t n = cfg.n_sites();
    if (grid_size == 0 || grid_size > n || n % grid_size != 0) {
        throw ConfigurationError("binning grid size must divide the number of sites");
    }
    const std::size_t per_cell = n / grid_size;
    const double scale = static_cast<double>(grid_size) / static_cast<double>(n);
    DensityField out(grid_size);
    for (Spin s : kSpins) {
        const auto& counts = cfg.layer_counts(s);
        auto vals = out.layer_values(s);
        for (std::size_t x = 0; x < n; ++x) vals[x / per_cell] += static_cast<double>(counts[x]);
        for (double& v : vals) v *= scale;
    }
    return out;
}

DensityTrajectory empirical_trajectory(const PathRecord& path, std::size_t grid_size) {
    const auto& t = path.snapshot_times;
    if (t.empty() || t.front() != 0.0) throw ConfigurationError("empirical trajectory needs a snapshot at t = 0");
    const double dt = t.size() > 1 ? t[1] - t[0] : 0.0;
    for (std::size_t k = 1; k < t.size(); ++k) {
        if (std::abs(t[k] - static_cast<double>(k) * dt) > 1e-9 * std::max(1.0, t.back())) {
            throw ConfigurationError("empirical trajectory needs uniformly spaced snapshots");
        }
    }
    std::vector<DensityField> slices;
    slices.reserve(path.snapshots.size());
    for (const auto& cfg : path.snapshots) slices.push_back(empirical_density(cfg, grid_size));
    return DensityTrajectory(dt, std::move(slices));
}

double log_radon_nikodym(const PathRecord& path, const PerturbationField& field) {
    return *replay(path, field, {}, nullptr, nullptr).log_radon_nikodym;
}

double path_rate_functional(const PathRecord& path, const PerturbationField& field) {
    return *replay(path, field, {}, nullptr, nullptr).path_rate;
}

std::vector<double> dynkin_residual(const PathRecord& path, const PerturbationField& test_function) {
    std::vector<std::vector<double>> dynkin;
    replay(path, std::nullopt, {test_function}, &dynkin, nullptr);
    return dynkin.front();
}

double quadratic_variation(const PathRecord& path, const PerturbationField& test_function) {
    std::vector<double> qv;
    replay(path, std::nullopt, {test_function}, nullptr, &qv);
    return qv.front();
}

}  // namespace rtp::sim
