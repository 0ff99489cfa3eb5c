#pragma once

#include <cstdint>
#include <string>

#include "mclearn/dtmc.hpp"
#include "mclearn/property.hpp"

namespace mclearn {

// Hoeffding/Chernoff half-width: with N samples, the estimate is within
// sqrt(ln(2/delta) / (2N)) of the true probability with confidence
// 1 - delta.
double smc_halfwidth(double delta, long long samples);

// Smallest N achieving the requested half-width.
long long smc_samples_for(double delta, double halfwidth);

struct SmcParams {
    double delta = 0.01;      // error probability
    long long samples = 0;    // explicit N, or
    double halfwidth = 0.0;   // target half-width (derives N); exactly one set
    std::uint64_t seed = 0;
};

struct SmcResult {
    double estimate = 0.0;
    double halfwidth = 0.0;
    long long samples = 0;
    double confidence = 0.0; // the delta used

    // "estimate=<v> halfwidth=<w> samples=<N> confidence=<d>"
    std::string line() const;
};

// Statistical model checking by simulation: draws N traces of bound+1
// symbols from the model and evaluates the (step-bounded) property on each.
// Unbounded properties are a usage error: a finite prefix cannot decide
// them.
SmcResult smc_check(const Dtmc& d, const Property& p, const SmcParams& params);

// Same estimator over recorded traces, consumed in order.  Runs out of
// traces, or meets one too short to decide the property: usage error.
SmcResult smc_check_traces(const TraceSet& source, const Property& p,
                           const SmcParams& params);

// Shared per-trace evaluation (exposed for tests): does the bounded property
// hold on this label sequence?  Returns -1 undecidable / 0 false / 1 true.
int evaluate_bounded(const Property& p, const Trace& t, const Alphabet& a);

} // namespace mclearn
