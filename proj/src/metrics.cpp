#include "mclearn/metrics.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "mclearn/errors.hpp"

namespace mclearn {

double bic_score(const Dtmc& d, const TraceSet& pi, double mu) {
    double ll = log_likelihood(d, pi);
    if (std::isinf(ll)) return -std::numeric_limits<double>::infinity();
    double n = static_cast<double>(pi.total_letters());
    return ll - mu * static_cast<double>(d.n()) * std::log(n);
}

double ard(double estimated, double actual) {
    if (actual == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return std::abs(estimated - actual) / actual;
}

double mse_steady(const std::vector<double>& y_hat, const std::vector<double>& y) {
    if (y_hat.size() != y.size())
        throw UsageError("mse needs vectors of equal length");
    if (y.empty()) throw UsageError("mse needs non-empty vectors");
    double sum = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i)
        sum += (y_hat[i] - y[i]) * (y_hat[i] - y[i]);
    return sum / static_cast<double>(y.size());
}

double mse_steady(const Dtmc& learned, const Dtmc& actual) {
    auto pl = steady_state(learned);
    auto pa = steady_state(actual);

    // Union of symbol names, actual's order first.
    std::vector<std::string> syms = actual.alphabet.names();
    for (const auto& s : learned.alphabet.names())
        if (actual.alphabet.find(s) < 0) syms.push_back(s);

    std::vector<double> ml(syms.size(), 0.0), ma(syms.size(), 0.0);
    for (std::size_t i = 0; i < syms.size(); ++i) {
        int il = learned.alphabet.find(syms[i]);
        if (il >= 0)
            for (int s = 0; s < learned.n(); ++s)
                if (learned.labels[static_cast<std::size_t>(s)] == il)
                    ml[i] += pl[static_cast<std::size_t>(s)];
        int ia = actual.alphabet.find(syms[i]);
        if (ia >= 0)
            for (int s = 0; s < actual.n(); ++s)
                if (actual.labels[static_cast<std::size_t>(s)] == ia)
                    ma[i] += pa[static_cast<std::size_t>(s)];
    }
    return mse_steady(ml, ma);
}

double prediction_accuracy(const Dtmc& d, const Trace& td) {
    if (td.empty()) throw UsageError("prediction accuracy needs a non-empty trace");
    double p = string_probability(d, td);
    if (p == 0.0) return 0.0;
    return std::pow(p, 1.0 / static_cast<double>(td.size()));
}

double prediction_accuracy(const Dtmc& d, const TraceSet& test) {
    if (test.traces.empty()) throw UsageError("prediction accuracy needs a non-empty test set");
    long long n = test.total_letters();
    // Direct product when it cannot underflow, so the result is a single
    // std::pow call on the exact product; log-space fallback otherwise.
    std::vector<int> remap(static_cast<std::size_t>(test.alphabet.size()));
    for (int a = 0; a < test.alphabet.size(); ++a)
        remap[static_cast<std::size_t>(a)] = d.alphabet.find(test.alphabet.name(a));
    double product = 1.0;
    bool direct = true;
    for (const auto& t : test.traces) {
        Trace m;
        m.reserve(t.size());
        for (int sym : t) {
            int ms = remap[static_cast<std::size_t>(sym)];
            if (ms < 0) return 0.0;
            m.push_back(ms);
        }
        double p = string_probability(d, m);
        if (p == 0.0) return 0.0;
        product *= p;
        if (product < 1e-280) {
            direct = false;
            break;
        }
    }
    if (direct) return std::pow(product, 1.0 / static_cast<double>(n));
    double ll = log_likelihood(d, test);
    if (std::isinf(ll)) return 0.0;
    return std::exp(ll / static_cast<double>(n));
}

} // namespace mclearn
