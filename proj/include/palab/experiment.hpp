#pragma once

#include <functional>
#include <optional>

#include "palab/processes.hpp"

namespace palab {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TolerancePolicy {
    double stderr_factor = 4.0;
    double floor = 0.0;
    bool pass(double abs_error, double stderr_val) const {
        return abs_error <= std::max(stderr_factor * stderr_val, floor);
    }
};

// Parsed experiment description; schema-validated, unknown keys rejected.
struct ExperimentConfig {
    std::string scenario;
    std::vector<int> k;
    std::vector<long> N;
    std::vector<double> t;
    long samples = 0;
    uint64_t seed = 0;
    bool has_seed = false;
    int steps = 200;
    int threads = 1;
    long batches = 16;
    long l = 8;
    TolerancePolicy tolerance;
    std::string out_dir;
    std::string cls;                                 // gaussian-approx class
    std::string ensemble;                            // strong-invariance family kind
    std::string matrix_path;                         // const-matrix file (csv or palb)
    std::vector<std::pair<double, double>> atoms;    // law / jump atoms
    double drift = 0, diffusion = 0;
    std::string triplet_mode;                        // additive | multiplicative

    static ExperimentConfig from_json_text(const std::string& text);
};

struct ResultRecord {
    std::string scenario;
    int k = 0;
    std::string partition;
    long N = 0;
    double t = 0;
    double estimate = 0;
    double stderr_ = 0;
    double prediction = 0;
    double abs_error = 0;
    bool pass = false;
};

std::string results_to_csv(const std::vector<ResultRecord>& rs);
std::string results_summary_json(const std::string& scenario,
                                 const std::vector<ResultRecord>& rs);

// Executes the named scenario; when config.out_dir is set, writes results.csv
// and summary.json there. Identical config => identical bytes.
std::vector<ResultRecord> run_experiment(const ExperimentConfig& config);

// --- verification surface -------------------------------------------------------

struct CriterionResult {
    std::string id;
    std::string name;
    bool exact = false;  // exact-arithmetic criterion vs Monte Carlo
    bool pass = false;
    std::string detail;
};

// Runs the acceptance battery; level in {"exact", "mc", "all"}. Prints one
// pass/fail line per criterion to out when given.
std::vector<CriterionResult> verify_suite(const std::string& level, int threads,
                                          std::ostream* out = nullptr);

// Representation/Gram checker parameterized over the composition rule so a
// tampered compose is caught with a named counterexample pair.
using ComposeFn = std::function<ComposeResult(const Partition&, const Partition&)>;
std::optional<std::pair<Partition, Partition>> representation_counterexample(
    int k, long N, const ComposeFn& comp, int threads);

}  // namespace palab
