#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mclearn/dtmc.hpp"
#include "mclearn/ga.hpp"

namespace mclearn {

// Experiment description, parsed from a flat key = value file (quoted
// strings, numbers, booleans, [lists]).  See README for the key reference.
struct ExperimentSpec {
    std::uint64_t seed = 0;

    // Generator: either a model file or random_dtmc parameters.
    std::string generator_path;
    int random_states = 0;
    double random_density = 0.0;
    int random_symbols = 0;

    std::vector<long long> sizes;   // training sizes, strictly increasing
    int trace_len = 10;             // multi-execution sampling length
    double stop_prob = 0.0;         // alternative: geometric stopping

    std::vector<std::string> learners; // aalergia | ga | pst | ga-single
    double epsilon = 0.5;
    bool epsilon_search = false;
    double epsilon_lo = 1.0 / 1024.0;
    double epsilon_hi = 1024.0;
    double mu = 0.5;
    int population = 64;
    int generations = 50;
    std::string select = "tournament"; // or roulette
    std::string xover = "two";         // one | two | uniform
    int max_depth = 8;
    int threads = 1;

    std::vector<std::string> properties;
    std::vector<std::string> metrics;  // ard | mse_steady | pred_acc

    bool smc = false;        // adds an "smc" pseudo-learner estimating on the
                             // generator with `size` runs
    double smc_delta = 0.05;

    bool measure_time = false; // real wall_ms (breaks byte-reproducibility)
};

ExperimentSpec parse_experiment_spec(const std::string& text);
ExperimentSpec parse_experiment_spec_file(const std::string& path);

struct MetricRow {
    std::string learner;
    long long size = 0;
    double wall_ms = 0.0;
    std::string metric;
    std::string value; // formatted; "nan" marks undefined results
};

// Header learner,size,wall_ms,metric,value then one row each.
std::string results_csv(const std::vector<MetricRow>& rows);

// Runs the experiment grid.  Rows come out in canonical order (learner,
// size, metric); results.csv in out_dir is appended row by row and flushed,
// so partial results survive a failure; learned models are persisted as
// model_<learner>_<size>.dtmc.
std::vector<MetricRow> run_experiment(const ExperimentSpec& spec,
                                      const std::string& out_dir);

struct BicSweepRow {
    double eps = 0.0;
    double abs_bic = 0.0;
    int states = 0;
};

// AALERGIA models along an epsilon grid; |BIC| per point for the
// model-selection curve.
std::vector<BicSweepRow> bic_sweep(const TraceSet& pi, const std::vector<double>& grid,
                                   double mu = 0.5);

// Header epsilon,abs_bic,states then one row per grid point.
std::string bic_sweep_csv(const std::vector<BicSweepRow>& rows);

// Geometric grid helper for the CLI: `steps` points from lo to hi inclusive.
std::vector<double> geometric_grid(double lo, double hi, int steps);

} // namespace mclearn
