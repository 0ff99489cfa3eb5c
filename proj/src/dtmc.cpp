#include "mclearn/dtmc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "mclearn/errors.hpp"
#include "mclearn/format.hpp"

namespace mclearn {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<char> reachable_from_init(const Dtmc& d) {
    std::vector<char> seen(static_cast<std::size_t>(d.n()), 0);
    std::deque<int> queue;
    for (int s = 0; s < d.n(); ++s) {
        if (d.init[static_cast<std::size_t>(s)] > 0.0) {
            seen[static_cast<std::size_t>(s)] = 1;
            queue.push_back(s);
        }
    }
    while (!queue.empty()) {
        int s = queue.front();
        queue.pop_front();
        for (const auto& tr : d.rows[static_cast<std::size_t>(s)]) {
            if (tr.prob > 0.0 && !seen[static_cast<std::size_t>(tr.dst)]) {
                seen[static_cast<std::size_t>(tr.dst)] = 1;
                queue.push_back(tr.dst);
            }
        }
    }
    return seen;
}

} // namespace

std::string ValidationReport::to_string() const {
    std::ostringstream os;
    os << (ok ? "valid" : "INVALID") << '\n';
    for (const auto& e : errors) os << "error: " << e << '\n';
    for (const auto& w : warnings) os << "warning: " << w << '\n';
    return os.str();
}

ValidationReport validate_dtmc(const Dtmc& d, double tol) {
    ValidationReport rep;
    auto fail = [&rep](const std::string& msg) {
        rep.ok = false;
        rep.errors.push_back(msg);
    };

    const int n = d.n();
    if (n == 0) fail("model has no states");
    if (static_cast<int>(d.init.size()) != n) fail("init vector size != state count");
    if (static_cast<int>(d.rows.size()) != n) fail("row count != state count");
    if (!rep.ok) return rep;

    for (int s = 0; s < n; ++s) {
        int lbl = d.labels[static_cast<std::size_t>(s)];
        if (lbl < 0 || lbl >= d.alphabet.size())
            fail("state " + std::to_string(s) + " has out-of-range label");
    }

    double init_sum = 0.0;
    for (int s = 0; s < n; ++s) {
        double p = d.init[static_cast<std::size_t>(s)];
        if (p < 0.0 || p > 1.0 + tol)
            fail("init[" + std::to_string(s) + "] outside [0,1]");
        init_sum += p;
    }
    if (std::abs(init_sum - 1.0) > tol)
        fail("initial distribution sums to " + fmt_double(init_sum));

    for (int s = 0; s < n; ++s) {
        double row_sum = 0.0;
        int prev_dst = -1;
        for (const auto& tr : d.rows[static_cast<std::size_t>(s)]) {
            if (tr.dst < 0 || tr.dst >= n)
                fail("transition from " + std::to_string(s) + " to out-of-range state");
            if (tr.dst <= prev_dst)
                fail("row " + std::to_string(s) + " not sorted by destination or has duplicates");
            prev_dst = tr.dst;
            if (tr.prob < 0.0 || tr.prob > 1.0 + tol)
                fail("Tr(" + std::to_string(s) + "," + std::to_string(tr.dst) + ") outside [0,1]");
            row_sum += tr.prob;
        }
        if (std::abs(row_sum - 1.0) > tol)
            fail("row " + std::to_string(s) + " sums to " + fmt_double(row_sum));
    }

    if (rep.ok) {
        auto seen = reachable_from_init(d);
        for (int s = 0; s < n; ++s)
            if (!seen[static_cast<std::size_t>(s)])
                rep.warnings.push_back("state " + std::to_string(s) +
                                       " unreachable from initial support");
    }
    return rep;
}

std::string save_dtmc(const Dtmc& d) {
    std::ostringstream os;
    os << "dtmc " << d.n() << ' ' << d.alphabet.size() << '\n';
    os << "symbols";
    for (const auto& s : d.alphabet.names()) os << ' ' << s;
    os << '\n';
    os << "labels";
    for (int lbl : d.labels) os << ' ' << d.alphabet.name(lbl);
    os << '\n';
    os << "init";
    for (double p : d.init) os << ' ' << fmt_double(p);
    os << '\n';
    for (int s = 0; s < d.n(); ++s)
        for (const auto& tr : d.rows[static_cast<std::size_t>(s)])
            os << s << ' ' << tr.dst << ' ' << fmt_double(tr.prob) << '\n';
    return os.str();
}

void save_dtmc_file(const Dtmc& d, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cannot write " + path);
    out << save_dtmc(d);
    if (!out) throw UsageError("write failed for " + path);
}

Dtmc load_dtmc(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(in, line)) {
        // strip comments, then whitespace-only lines
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        lines.push_back(line);
    }
    if (lines.empty()) throw UsageError("dtmc file is empty");

    auto tokens = [](const std::string& l) {
        std::istringstream ls(l);
        std::vector<std::string> toks;
        std::string t;
        while (ls >> t) toks.push_back(t);
        return toks;
    };

    auto head = tokens(lines[0]);
    if (head.size() != 3 || head[0] != "dtmc")
        throw UsageError("expected header 'dtmc <states> <symbols>'");
    int n = 0, k = 0;
    try {
        n = std::stoi(head[1]);
        k = std::stoi(head[2]);
    } catch (const std::exception&) {
        throw UsageError("bad counts in dtmc header");
    }
    if (n <= 0 || k <= 0) throw UsageError("dtmc needs at least one state and one symbol");
    if (lines.size() < 4) throw UsageError("dtmc file truncated");

    Dtmc d;
    auto syms = tokens(lines[1]);
    if (syms.size() != static_cast<std::size_t>(k) + 1 || syms[0] != "symbols")
        throw UsageError("expected 'symbols' line with " + std::to_string(k) + " entries");
    for (int i = 1; i <= k; ++i) {
        if (d.alphabet.find(syms[static_cast<std::size_t>(i)]) != -1)
            throw UsageError("duplicate symbol " + syms[static_cast<std::size_t>(i)]);
        d.alphabet.intern(syms[static_cast<std::size_t>(i)]);
    }

    auto lbls = tokens(lines[2]);
    if (lbls.size() != static_cast<std::size_t>(n) + 1 || lbls[0] != "labels")
        throw UsageError("expected 'labels' line with " + std::to_string(n) + " entries");
    for (int i = 1; i <= n; ++i) {
        int id = d.alphabet.find(lbls[static_cast<std::size_t>(i)]);
        if (id < 0) throw UsageError("label " + lbls[static_cast<std::size_t>(i)] + " not in symbols");
        d.labels.push_back(id);
    }

    auto inits = tokens(lines[3]);
    if (inits.size() != static_cast<std::size_t>(n) + 1 || inits[0] != "init")
        throw UsageError("expected 'init' line with " + std::to_string(n) + " entries");
    for (int i = 1; i <= n; ++i) {
        try {
            d.init.push_back(std::stod(inits[static_cast<std::size_t>(i)]));
        } catch (const std::exception&) {
            throw UsageError("bad number in init line");
        }
    }

    d.rows.assign(static_cast<std::size_t>(n), {});
    for (std::size_t li = 4; li < lines.size(); ++li) {
        auto toks = tokens(lines[li]);
        if (toks.size() != 3) throw UsageError("bad transition line: " + lines[li]);
        int src = 0, dst = 0;
        double p = 0.0;
        try {
            src = std::stoi(toks[0]);
            dst = std::stoi(toks[1]);
            p = std::stod(toks[2]);
        } catch (const std::exception&) {
            throw UsageError("bad transition line: " + lines[li]);
        }
        if (src < 0 || src >= n || dst < 0 || dst >= n)
            throw UsageError("transition indices out of range: " + lines[li]);
        d.rows[static_cast<std::size_t>(src)].push_back({dst, p});
    }
    for (auto& row : d.rows)
        std::sort(row.begin(), row.end(),
                  [](const Transition& a, const Transition& b) { return a.dst < b.dst; });

    auto rep = validate_dtmc(d);
    if (!rep.ok) throw UsageError("invalid dtmc: " + rep.errors.front());
    return d;
}

Dtmc load_dtmc_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_dtmc(buf.str());
}

namespace {

int draw_from(const std::vector<double>& dist, double u) {
    double cum = 0.0;
    int last_positive = -1;
    for (std::size_t i = 0; i < dist.size(); ++i) {
        if (dist[i] <= 0.0) continue;
        cum += dist[i];
        last_positive = static_cast<int>(i);
        if (u < cum) return last_positive;
    }
    return last_positive; // rounding residue lands on the last positive entry
}

int draw_next(const std::vector<Transition>& row, double u) {
    double cum = 0.0;
    int last = -1;
    for (const auto& tr : row) {
        if (tr.prob <= 0.0) continue;
        cum += tr.prob;
        last = tr.dst;
        if (u < cum) return last;
    }
    return last;
}

} // namespace

TraceSet sample_traces(const Dtmc& d, const SampleParams& p) {
    if (p.count <= 0) throw UsageError("sample count must be positive");
    bool fixed = p.fixed_len > 0;
    bool geo = p.stop_prob > 0.0;
    if (fixed == geo)
        throw UsageError("need exactly one of fixed length and stop probability");
    if (geo && p.stop_prob >= 1.0 && p.stop_prob != 1.0)
        throw UsageError("stop probability must lie in (0,1]");
    auto rep = validate_dtmc(d);
    if (!rep.ok) throw UsageError("refusing to sample from invalid model");

    TraceSet out;
    out.alphabet = d.alphabet;
    out.traces.reserve(static_cast<std::size_t>(p.count));
    for (long long i = 0; i < p.count; ++i) {
        Rng rng = Rng::derive(p.seed, {stream::kSample, static_cast<std::uint64_t>(i)});
        Trace t;
        int s = draw_from(d.init, rng.next_double());
        t.push_back(d.labels[static_cast<std::size_t>(s)]);
        for (;;) {
            if (fixed) {
                if (static_cast<int>(t.size()) >= p.fixed_len) break;
            } else {
                if (rng.next_double() < p.stop_prob) break;
            }
            s = draw_next(d.rows[static_cast<std::size_t>(s)], rng.next_double());
            t.push_back(d.labels[static_cast<std::size_t>(s)]);
        }
        out.traces.push_back(std::move(t));
    }
    return out;
}

namespace {

// Scaled forward pass over the label sequence.  Returns (sum of frontier,
// accumulated ln-scale); probability = sum * exp(scale).  Scaling only kicks
// in when the frontier gets tiny, so short traces see pure double products.
struct Forward {
    double sum = 0.0;
    double scale = 0.0;
};

Forward forward_pass(const Dtmc& d, const Trace& t) {
    Forward fw;
    if (t.empty()) {
        fw.sum = 1.0; // empty prefix
        return fw;
    }
    const int n = d.n();
    std::vector<double> cur(static_cast<std::size_t>(n), 0.0);
    std::vector<double> nxt(static_cast<std::size_t>(n), 0.0);
    std::vector<int> cur_ids, nxt_ids;
    for (int s = 0; s < n; ++s) {
        if (d.labels[static_cast<std::size_t>(s)] == t[0] && d.init[static_cast<std::size_t>(s)] > 0.0) {
            cur[static_cast<std::size_t>(s)] = d.init[static_cast<std::size_t>(s)];
            cur_ids.push_back(s);
        }
    }
    for (std::size_t i = 1; i < t.size(); ++i) {
        if (cur_ids.empty()) return fw; // dead frontier, probability exactly 0
        nxt_ids.clear();
        for (int s : cur_ids) {
            double f = cur[static_cast<std::size_t>(s)];
            for (const auto& tr : d.rows[static_cast<std::size_t>(s)]) {
                if (tr.prob <= 0.0) continue;
                if (d.labels[static_cast<std::size_t>(tr.dst)] != t[i]) continue;
                double& slot = nxt[static_cast<std::size_t>(tr.dst)];
                if (slot == 0.0) nxt_ids.push_back(tr.dst);
                slot += f * tr.prob;
            }
        }
        std::sort(nxt_ids.begin(), nxt_ids.end());
        for (int s : cur_ids) cur[static_cast<std::size_t>(s)] = 0.0;
        std::swap(cur, nxt);
        std::swap(cur_ids, nxt_ids);
        // Rescale only when the frontier risks underflow.
        double mx = 0.0;
        for (int s : cur_ids) mx = std::max(mx, cur[static_cast<std::size_t>(s)]);
        if (mx > 0.0 && mx < 1e-280) {
            for (int s : cur_ids) cur[static_cast<std::size_t>(s)] /= mx;
            fw.scale += std::log(mx);
        }
    }
    double sum = 0.0;
    for (int s : cur_ids) sum += cur[static_cast<std::size_t>(s)];
    fw.sum = sum;
    return fw;
}

} // namespace

double string_probability(const Dtmc& d, const Trace& t) {
    Forward fw = forward_pass(d, t);
    if (fw.sum == 0.0) return 0.0;
    return fw.scale == 0.0 ? fw.sum : fw.sum * std::exp(fw.scale);
}

double log_string_probability(const Dtmc& d, const Trace& t) {
    Forward fw = forward_pass(d, t);
    if (fw.sum == 0.0) return kNegInf;
    return std::log(fw.sum) + fw.scale;
}

double log_likelihood(const Dtmc& d, const TraceSet& pi) {
    if (pi.traces.empty()) throw UsageError("log_likelihood needs at least one trace");
    // Map trace symbols onto model symbols by name; unmapped symbols cannot be
    // emitted, so any trace containing one has probability 0.
    std::vector<int> remap(static_cast<std::size_t>(pi.alphabet.size()));
    for (int a = 0; a < pi.alphabet.size(); ++a)
        remap[static_cast<std::size_t>(a)] = d.alphabet.find(pi.alphabet.name(a));

    std::map<Trace, long long> unique;
    for (const auto& t : pi.traces) {
        Trace m;
        m.reserve(t.size());
        bool dead = false;
        for (int sym : t) {
            int ms = remap[static_cast<std::size_t>(sym)];
            if (ms < 0) {
                dead = true;
                break;
            }
            m.push_back(ms);
        }
        if (dead) return kNegInf;
        ++unique[m];
    }
    double total = 0.0;
    for (const auto& [t, cnt] : unique) {
        double lnp = log_string_probability(d, t);
        if (lnp == kNegInf) return kNegInf;
        total += static_cast<double>(cnt) * lnp;
    }
    return total;
}

std::vector<double> steady_state(const Dtmc& d, double tol, long long max_iter) {
    auto rep = validate_dtmc(d);
    if (!rep.ok) throw UsageError("steady_state on invalid model");
    const int n = d.n();
    std::vector<double> pi = d.init;
    std::vector<double> nxt(static_cast<std::size_t>(n), 0.0);
    // Light damping breaks the oscillation of periodic chains without moving
    // the fixed point: pi* . Tr = pi*  <=>  pi* . (0.999 Tr + 0.001 I) = pi*.
    const double damp = 0.999;
    for (long long it = 0; it < max_iter; ++it) {
        std::fill(nxt.begin(), nxt.end(), 0.0);
        for (int s = 0; s < n; ++s) {
            double mass = pi[static_cast<std::size_t>(s)];
            if (mass == 0.0) continue;
            for (const auto& tr : d.rows[static_cast<std::size_t>(s)])
                nxt[static_cast<std::size_t>(tr.dst)] += mass * tr.prob;
        }
        // Convergence is judged on the undamped residual.
        double resid = 0.0;
        for (int s = 0; s < n; ++s)
            resid = std::max(resid, std::abs(nxt[static_cast<std::size_t>(s)] -
                                             pi[static_cast<std::size_t>(s)]));
        if (resid <= tol) {
            double sum = 0.0;
            for (double v : nxt) sum += v;
            for (double& v : nxt) v /= sum;
            return nxt;
        }
        double sum = 0.0;
        for (int s = 0; s < n; ++s) {
            double v = damp * nxt[static_cast<std::size_t>(s)] +
                       (1.0 - damp) * pi[static_cast<std::size_t>(s)];
            nxt[static_cast<std::size_t>(s)] = v;
            sum += v;
        }
        for (double& v : nxt) v /= sum;
        std::swap(pi, nxt);
    }
    throw ConvergenceError("steady_state did not converge within " +
                           std::to_string(max_iter) + " iterations");
}

Dtmc random_dtmc(int n, double density, int symbols, std::uint64_t seed) {
    if (n <= 0) throw UsageError("random_dtmc needs at least one state");
    if (symbols <= 0) throw UsageError("random_dtmc needs at least one symbol");
    if (!(density > 0.0) || density > 1.0)
        throw UsageError("density must lie in (0,1]");

    Rng rng = Rng::derive(seed, {stream::kRandGen});
    Dtmc d;
    for (int k = 0; k < symbols; ++k) {
        // a, b, ..., z, s26, s27, ...
        std::string name = k < 26 ? std::string(1, static_cast<char>('a' + k))
                                  : "s" + std::to_string(k);
        d.alphabet.intern(name);
    }
    d.labels.resize(static_cast<std::size_t>(n));
    for (int s = 0; s < n; ++s)
        d.labels[static_cast<std::size_t>(s)] = static_cast<int>(rng.next_below(
            static_cast<std::uint64_t>(symbols)));
    d.init.assign(static_cast<std::size_t>(n), 0.0);
    d.init[0] = 1.0;

    int succ = static_cast<int>(std::ceil(density * n));
    std::vector<int> ids(static_cast<std::size_t>(n));
    d.rows.assign(static_cast<std::size_t>(n), {});
    for (int s = 0; s < n; ++s) {
        for (int i = 0; i < n; ++i) ids[static_cast<std::size_t>(i)] = i;
        // Partial Fisher-Yates: the first `succ` entries become the targets.
        for (int i = 0; i < succ; ++i) {
            int j = i + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n - i)));
            std::swap(ids[static_cast<std::size_t>(i)], ids[static_cast<std::size_t>(j)]);
        }
        double sum = 0.0;
        auto& row = d.rows[static_cast<std::size_t>(s)];
        for (int i = 0; i < succ; ++i) {
            double w = rng.next_positive();
            row.push_back({ids[static_cast<std::size_t>(i)], w});
            sum += w;
        }
        for (auto& tr : row) tr.prob /= sum;
        std::sort(row.begin(), row.end(),
                  [](const Transition& a, const Transition& b) { return a.dst < b.dst; });
    }

    // Wire in unreachable states until the chain is connected.
    for (;;) {
        auto seen = reachable_from_init(d);
        int missing = -1;
        for (int s = 0; s < n; ++s)
            if (!seen[static_cast<std::size_t>(s)]) {
                missing = s;
                break;
            }
        if (missing < 0) break;
        std::vector<int> reach;
        for (int s = 0; s < n; ++s)
            if (seen[static_cast<std::size_t>(s)]) reach.push_back(s);
        int src = reach[static_cast<std::size_t>(rng.next_below(reach.size()))];
        double w = rng.next_positive();
        auto& row = d.rows[static_cast<std::size_t>(src)];
        bool present = false;
        for (auto& tr : row)
            if (tr.dst == missing) {
                tr.prob += w;
                present = true;
                break;
            }
        if (!present) row.push_back({missing, w});
        double sum = 0.0;
        for (const auto& tr : row) sum += tr.prob;
        for (auto& tr : row) tr.prob /= sum;
        std::sort(row.begin(), row.end(),
                  [](const Transition& a, const Transition& b) { return a.dst < b.dst; });
    }
    return d;
}

} // namespace mclearn
