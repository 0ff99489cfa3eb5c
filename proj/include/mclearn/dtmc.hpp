#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mclearn/alphabet.hpp"
#include "mclearn/rng.hpp"

namespace mclearn {

struct Transition {
    int dst = 0;
    double prob = 0.0;
};

// Labelled discrete-time Markov chain.  Every state carries exactly one
// observation symbol; rows are sparse and kept sorted by destination id.
struct Dtmc {
    Alphabet alphabet;
    std::vector<int> labels;                  // labels[s] = symbol id of state s
    std::vector<double> init;                 // initial distribution
    std::vector<std::vector<Transition>> rows; // rows[s] = outgoing transitions

    int n() const { return static_cast<int>(labels.size()); }

    double prob(int src, int dst) const {
        for (const auto& t : rows[static_cast<std::size_t>(src)])
            if (t.dst == dst) return t.prob;
        return 0.0;
    }
};

struct ValidationReport {
    bool ok = true;                    // no hard violations
    std::vector<std::string> errors;   // stochasticity / totality violations
    std::vector<std::string> warnings; // reachability and similar soft issues

    std::string to_string() const;
};

// Checks row stochasticity, initial-distribution stochasticity, label
// totality, index ranges, and reachability from the initial support.
// Reachability problems are warnings; everything else is an error.
ValidationReport validate_dtmc(const Dtmc& d, double tol = 1e-9);

// Text serialization (see README for the format).  Round-trips bit-exactly:
// probabilities are written as shortest round-trip decimals.
std::string save_dtmc(const Dtmc& d);
void save_dtmc_file(const Dtmc& d, const std::string& path);
Dtmc load_dtmc(const std::string& text);
Dtmc load_dtmc_file(const std::string& path);

struct SampleParams {
    long long count = 1;      // number of traces
    int fixed_len = 0;        // >0: every trace has exactly this many symbols
    double stop_prob = 0.0;   // >0: geometric stop after each symbol
    std::uint64_t seed = 0;
};

// Draws traces by simulating the chain.  Each trace has its own derived
// stream, so trace i is the same no matter how many traces are requested.
TraceSet sample_traces(const Dtmc& d, const SampleParams& p);

// Probability that the chain emits exactly this label sequence as a prefix
// (Eq. 1 path sum).  The trace must use the model's symbol ids.
double string_probability(const Dtmc& d, const Trace& t);

// ln of the above; -inf when the probability is exactly 0.  Scaled forward
// pass, so traces of length 10^4+ do not underflow.
double log_string_probability(const Dtmc& d, const Trace& t);

// Sum of trace log-probabilities over the whole set (duplicates batched).
// Symbols are matched by name between the trace alphabet and the model
// alphabet; a symbol the model cannot emit makes the result -inf.
double log_likelihood(const Dtmc& d, const TraceSet& pi);

// Stationary distribution by damped power iteration from the initial
// distribution.  Throws ConvergenceError when max_iter is exhausted.
std::vector<double> steady_state(const Dtmc& d, double tol = 1e-10,
                                 long long max_iter = 1000000);

// Random connected DTMC in the Tabakov-Vardi style: each row gets
// ceil(density*n) distinct successors with normalized positive weights,
// labels are uniform over `symbols` symbols (named a, b, c, ...), the initial
// distribution is a point mass on state 0, and unreachable states are wired
// in deterministically until the chain is connected.
Dtmc random_dtmc(int n, double density, int symbols, std::uint64_t seed);

} // namespace mclearn
