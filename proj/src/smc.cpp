#include "mclearn/smc.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include "mclearn/errors.hpp"
#include "mclearn/format.hpp"

namespace mclearn {

double smc_halfwidth(double delta, long long samples) {
    if (!(delta > 0.0) || delta >= 1.0) throw UsageError("confidence delta must lie in (0,1)");
    if (samples <= 0) throw UsageError("sample count must be positive");
    return std::sqrt(std::log(2.0 / delta) / (2.0 * static_cast<double>(samples)));
}

long long smc_samples_for(double delta, double halfwidth) {
    if (!(delta > 0.0) || delta >= 1.0) throw UsageError("confidence delta must lie in (0,1)");
    if (!(halfwidth > 0.0)) throw UsageError("target half-width must be positive");
    return static_cast<long long>(
        std::ceil(std::log(2.0 / delta) / (2.0 * halfwidth * halfwidth)));
}

std::string SmcResult::line() const {
    std::ostringstream os;
    os << "estimate=" << fmt_double(estimate) << " halfwidth=" << fmt_double(halfwidth)
       << " samples=" << samples << " confidence=" << fmt_double(confidence);
    return os.str();
}

namespace {

std::vector<char> predicate_ids(const Predicate& pred, const Alphabet& a) {
    std::vector<char> member(static_cast<std::size_t>(a.size()), 0);
    for (const auto& sym : pred.symbols) {
        int id = a.find(sym);
        if (id < 0) throw UsageError("property references unknown symbol '" + sym + "'");
        member[static_cast<std::size_t>(id)] = 1;
    }
    return member;
}

long long resolve_samples(const SmcParams& params) {
    bool have_n = params.samples > 0;
    bool have_w = params.halfwidth > 0.0;
    if (have_n == have_w)
        throw UsageError("need exactly one of sample count and target half-width");
    return have_n ? params.samples : smc_samples_for(params.delta, params.halfwidth);
}

} // namespace

int evaluate_bounded(const Property& p, const Trace& t, const Alphabet& a) {
    if (!p.bounded) throw UsageError("statistical checking needs a step-bounded property");
    long long k = p.bound;
    auto right = predicate_ids(p.right, a);
    auto in_right = [&right](int sym) { return right[static_cast<std::size_t>(sym)] != 0; };
    long long horizon = std::min<long long>(k, static_cast<long long>(t.size()) - 1);

    switch (p.kind) {
    case PropKind::Eventually: {
        for (long long i = 0; i <= horizon; ++i)
            if (in_right(t[static_cast<std::size_t>(i)])) return 1;
        // No hit in the observed prefix: decided false only if we saw the
        // whole horizon.
        return static_cast<long long>(t.size()) > k ? 0 : -1;
    }
    case PropKind::Globally: {
        for (long long i = 0; i <= horizon; ++i)
            if (!in_right(t[static_cast<std::size_t>(i)])) return 0;
        return static_cast<long long>(t.size()) > k ? 1 : -1;
    }
    case PropKind::Until: {
        auto left = predicate_ids(p.left, a);
        for (long long i = 0; i <= horizon; ++i) {
            int sym = t[static_cast<std::size_t>(i)];
            if (in_right(sym)) return 1;
            if (!left[static_cast<std::size_t>(sym)]) return 0;
        }
        return static_cast<long long>(t.size()) > k ? 0 : -1;
    }
    }
    throw UsageError("unreachable property kind");
}

SmcResult smc_check(const Dtmc& d, const Property& p, const SmcParams& params) {
    if (!p.bounded) throw UsageError("statistical checking needs a step-bounded property");
    long long n = resolve_samples(params);

    SampleParams sp;
    sp.count = n;
    sp.fixed_len = static_cast<int>(p.bound) + 1;
    sp.seed = Rng::derive(params.seed, {stream::kSmc}).next_u64();
    TraceSet runs = sample_traces(d, sp);

    long long hits = 0;
    for (const auto& t : runs.traces) {
        int v = evaluate_bounded(p, t, runs.alphabet);
        // Full-horizon samples always decide.
        if (v == 1) ++hits;
    }
    SmcResult res;
    res.samples = n;
    res.estimate = static_cast<double>(hits) / static_cast<double>(n);
    res.halfwidth = smc_halfwidth(params.delta, n);
    res.confidence = params.delta;
    return res;
}

SmcResult smc_check_traces(const TraceSet& source, const Property& p,
                           const SmcParams& params) {
    if (!p.bounded) throw UsageError("statistical checking needs a step-bounded property");
    long long n = resolve_samples(params);
    if (n > static_cast<long long>(source.traces.size()))
        throw UsageError("trace source exhausted: need " + std::to_string(n) +
                         " runs but only " + std::to_string(source.traces.size()) +
                         " are available");
    long long hits = 0;
    for (long long i = 0; i < n; ++i) {
        int v = evaluate_bounded(p, source.traces[static_cast<std::size_t>(i)],
                                 source.alphabet);
        if (v < 0)
            throw UsageError("trace " + std::to_string(i) +
                             " too short to decide the property");
        hits += v;
    }
    SmcResult res;
    res.samples = n;
    res.estimate = static_cast<double>(hits) / static_cast<double>(n);
    res.halfwidth = smc_halfwidth(params.delta, n);
    res.confidence = params.delta;
    return res;
}

} // namespace mclearn
