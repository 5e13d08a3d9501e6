#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rtp/core/rate_family.hpp"
#include "rtp/core/spin.hpp"

namespace rtp::verify {

/// One measured quantity compared against its threshold.
struct Measurement {
    std::string name;
    double value = 0.0;
    /// One of "<", "<=", ">", ">=", "==".
    std::string comparator;
    double threshold = 0.0;
    bool passed = false;

    nlohmann::json to_json() const;
};

Measurement measure(std::string name, double value, std::string comparator, double threshold);

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::vector<Measurement> measurements;
    std::string detail;
    double seconds = 0.0;

    nlohmann::json to_json() const;
    /// "PASS [ 3] name: m1 = v (< t), ..." on one line.
    std::string summary_line() const;
};

struct VerifyOptions {
    std::uint64_t seed = 20240617;
    /// Worker threads for replica ensembles; 0 uses the default count.
    unsigned threads = 0;
};

using CriterionFn = std::function<CriterionResult(const VerifyOptions&)>;

struct Criterion {
    int id = 0;
    std::string name;
    CriterionFn run;
};

/// The twelve acceptance criteria in id order.
const std::vector<Criterion>& all_criteria();

/// Runs one criterion, filling in id, name, pass flag and wall-clock time.
CriterionResult run_criterion(int id, const VerifyOptions& options);

/// Suite name to criterion ids. Throws ConfigurationError for unknown names.
std::vector<int> suite_criteria(const std::string& suite);
std::vector<std::string> suite_names();

/// {"suite": ..., "passed": ..., "criteria": [...]}.
nlohmann::json report_json(const std::string& suite, const std::vector<CriterionResult>& results);

/// Exact time-t law of two labeled particles on N sites, projected to
/// unordered occupation. States of one particle are s = 2 x + layer(sigma);
/// the returned vector is indexed by pair_index(a, b) with a <= b.
std::vector<double> two_particle_law(std::size_t n_sites, const SwitchRateFamily& rates, std::size_t site_a,
                                     Spin spin_a, std::size_t site_b, Spin spin_b, double t);
std::size_t pair_index(std::size_t n_single_states, std::size_t a, std::size_t b);

}  // namespace rtp::verify
