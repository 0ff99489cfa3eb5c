#include "mclearn/pst.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

#include "mclearn/errors.hpp"
#include "mclearn/format.hpp"

namespace mclearn {

int Pst::child(int node, int sym) const {
    for (const auto& [s, c] : nodes_[static_cast<std::size_t>(node)].kids)
        if (s == sym) return c;
    return -1;
}

int Pst::depth(int node) const {
    int d = 0;
    for (int cur = node; cur != 0; cur = nodes_[static_cast<std::size_t>(cur)].parent) ++d;
    return d;
}

int Pst::insert(const Trace& ctx) {
    int cur = 0;
    for (auto it = ctx.rbegin(); it != ctx.rend(); ++it) {
        int nxt = child(cur, *it);
        if (nxt < 0) {
            nxt = static_cast<int>(nodes_.size());
            nodes_.push_back({cur, *it, {}});
            auto& kids = nodes_[static_cast<std::size_t>(cur)].kids;
            kids.emplace_back(*it, nxt);
            std::sort(kids.begin(), kids.end());
        }
        cur = nxt;
    }
    return cur;
}

int Pst::find(const Trace& ctx) const {
    int cur = 0;
    for (auto it = ctx.rbegin(); it != ctx.rend(); ++it) {
        cur = child(cur, *it);
        if (cur < 0) return -1;
    }
    return cur;
}

int Pst::deepest_suffix(const Trace& history) const {
    int cur = 0;
    for (auto it = history.rbegin(); it != history.rend(); ++it) {
        int nxt = child(cur, *it);
        if (nxt < 0) break;
        cur = nxt;
    }
    return cur;
}

Trace Pst::context_of(int node) const {
    Trace out;
    for (int cur = node; cur != 0; cur = nodes_[static_cast<std::size_t>(cur)].parent)
        out.push_back(nodes_[static_cast<std::size_t>(cur)].sym);
    // Walking up visits older symbols later, which is exactly
    // oldest-first order once appended.
    return out;
}

std::vector<Trace> Pst::contexts() const {
    std::vector<Trace> out;
    out.reserve(nodes_.size());
    for (int i = 0; i < node_count(); ++i) out.push_back(context_of(i));
    std::sort(out.begin(), out.end(), [](const Trace& a, const Trace& b) {
        if (a.size() != b.size()) return a.size() < b.size();
        return a < b;
    });
    return out;
}

std::vector<int> Pst::leaf_nodes() const {
    std::vector<int> out;
    for (int i = 0; i < node_count(); ++i)
        if (is_leaf(i)) out.push_back(i);
    return out;
}

int Pst::max_depth() const {
    int d = 0;
    for (int i = 0; i < node_count(); ++i) d = std::max(d, depth(i));
    return d;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// fre(pi) * KL-style gain of predicting with pi instead of its longest
// suffix already in the tree.  0 ln 0 := 0; a symbol pi can produce but the
// suffix cannot makes the gain infinite.
double context_gain(const SuffixStats& stats, const Trace& pi, const Trace& shorter) {
    auto p = stats.next_dist(pi);
    auto q = stats.next_dist(shorter);
    double kl = 0.0;
    for (std::size_t e = 0; e < p.size(); ++e) {
        if (p[e] == 0.0) continue;
        if (q[e] == 0.0) return kInf;
        kl += p[e] * std::log(p[e] / q[e]);
    }
    if (kl == kInf) return kInf;
    return stats.fre(pi) * kl;
}

} // namespace

Pst learn_pst(const Trace& alpha, const Alphabet& alphabet, double eps, int max_depth) {
    if (!(eps > 0.0)) throw UsageError("pst epsilon must be positive");
    if (max_depth < 1) throw UsageError("pst max depth must be at least 1");
    if (alpha.size() < 3)
        throw UsageError("execution too short to learn from (need at least 3 symbols)");
    // Keep fre defined: |alpha| - |pi| - 1 >= 1.
    int depth_cap = std::min<long long>(max_depth, static_cast<long long>(alpha.size()) - 2);
    SuffixStats stats(alpha, alphabet, depth_cap + 1);

    Pst t;
    std::deque<Trace> work;
    for (int sym = 0; sym < alphabet.size(); ++sym) {
        Trace ctx{sym};
        if (stats.count(ctx) > 0 && stats.fre(ctx) > eps) work.push_back(std::move(ctx));
    }
    while (!work.empty()) {
        Trace pi = std::move(work.front());
        work.pop_front();
        if (!t.contains(pi)) {
            Trace shorter = t.context_of(t.deepest_suffix(pi));
            if (context_gain(stats, pi, shorter) >= eps) t.insert(pi);
        }
        if (static_cast<int>(pi.size()) < depth_cap && stats.fre(pi) > eps) {
            for (int sym = 0; sym < alphabet.size(); ++sym) {
                // Extend into the past: <sym> . pi.
                Trace ext;
                ext.reserve(pi.size() + 1);
                ext.push_back(sym);
                ext.insert(ext.end(), pi.begin(), pi.end());
                if (stats.count(ext) > 0) work.push_back(std::move(ext));
            }
        }
    }
    return t;
}

namespace {

// Completed tree plus the original/auxiliary distinction needed for the
// prediction rule.
struct Completed {
    Pst tree;
    std::vector<char> original; // per node id of `tree`
};

// Deepest suffix of `history` whose node is marked original; empty when only
// the root qualifies.
Trace deepest_original(const Completed& ct, const Trace& history) {
    Trace best;
    Trace probe;
    for (auto it = history.rbegin(); it != history.rend(); ++it) {
        probe.insert(probe.begin(), *it);
        int node = ct.tree.find(probe);
        if (node < 0) break;
        if (ct.original[static_cast<std::size_t>(node)]) best = probe;
    }
    return best;
}

Completed complete_tree(const Pst& t, const SuffixStats& stats) {
    Completed ct;
    // Copy t node-by-node (ids may differ; contexts are what matters).
    for (const auto& ctx : t.contexts()) ct.tree.insert(ctx);
    ct.original.assign(static_cast<std::size_t>(ct.tree.node_count()), 1);

    auto mark_insert = [&ct](const Trace& ctx) {
        int before = ct.tree.node_count();
        int node = ct.tree.insert(ctx);
        // Nodes created along the way (original contexts were already
        // closed, so these are all auxiliary).
        for (int i = before; i < ct.tree.node_count(); ++i) ct.original.push_back(0);
        return node;
    };

    // A lone root cannot label states; expand it into the occurring
    // single-symbol contexts first.
    if (ct.tree.node_count() == 1) {
        for (int sym = 0; sym < stats.alphabet().size(); ++sym) {
            Trace ctx{sym};
            if (stats.count(ctx) > 0) mark_insert(ctx);
        }
    }

    // Fixpoint: every positive-probability step out of a leaf must resolve
    // to a leaf.  Auxiliary targets refine the suffix chain one symbol at a
    // time; an internal full-step context means the source leaf itself is
    // too coarse and gets split by its occurring one-older extensions.
    for (bool changed = true; changed;) {
        changed = false;
        const int snapshot = ct.tree.node_count();
        for (int u = 1; u < snapshot && !changed; ++u) {
            if (!ct.tree.is_leaf(u)) continue;
            Trace ctx = ct.tree.context_of(u);
            Trace pred = deepest_original(ct, ctx);
            auto dist = stats.next_dist(pred);
            for (int sym = 0; sym < stats.alphabet().size() && !changed; ++sym) {
                if (dist[static_cast<std::size_t>(sym)] <= 0.0) continue;
                Trace v = ctx;
                v.push_back(sym);
                int tau = ct.tree.deepest_suffix(v);
                if (ct.tree.is_leaf(tau)) continue;
                int tau_depth = ct.tree.depth(tau);
                if (tau_depth == static_cast<int>(v.size())) {
                    // v itself is internal: split u by its occurring pasts.
                    for (int e = 0; e < stats.alphabet().size(); ++e) {
                        Trace child;
                        child.reserve(ctx.size() + 1);
                        child.push_back(e);
                        child.insert(child.end(), ctx.begin(), ctx.end());
                        if (stats.count(child) > 0) mark_insert(child);
                    }
                } else {
                    // Refine the target by one more symbol of v's suffix.
                    Trace refined(v.end() - (tau_depth + 1), v.end());
                    mark_insert(refined);
                }
                changed = true;
            }
        }
    }
    return ct;
}

} // namespace

Dtmc pst_to_dtmc(const Pst& t, const SuffixStats& stats) {
    if (stats.max_depth() < t.max_depth() + 1)
        throw UsageError("suffix statistics too shallow for this tree");
    Completed ct = complete_tree(t, stats);

    // States are the leaves, ordered by context (length then lex).
    std::vector<Trace> state_ctx;
    for (int u = 0; u < ct.tree.node_count(); ++u)
        if (u != 0 && ct.tree.is_leaf(u)) state_ctx.push_back(ct.tree.context_of(u));
    std::sort(state_ctx.begin(), state_ctx.end(), [](const Trace& a, const Trace& b) {
        if (a.size() != b.size()) return a.size() < b.size();
        return a < b;
    });
    const int n = static_cast<int>(state_ctx.size());
    if (n == 0) throw UsageError("pst decodes to no states");

    Dtmc d;
    d.alphabet = stats.alphabet();
    d.labels.reserve(static_cast<std::size_t>(n));
    for (const auto& ctx : state_ctx) d.labels.push_back(ctx.back()); // most recent symbol

    // Initial mass proportional to context occurrences.
    d.init.assign(static_cast<std::size_t>(n), 0.0);
    double init_mass = 0.0;
    for (int s = 0; s < n; ++s) {
        double c = static_cast<double>(stats.count(state_ctx[static_cast<std::size_t>(s)]));
        d.init[static_cast<std::size_t>(s)] = c;
        init_mass += c;
    }
    for (double& v : d.init) v /= init_mass;

    // Map a full successor context to its state: longest leaf suffix.
    auto state_of_history = [&ct, &state_ctx](const Trace& h) {
        int node = ct.tree.deepest_suffix(h);
        Trace ctx = ct.tree.context_of(node);
        auto it = std::lower_bound(state_ctx.begin(), state_ctx.end(), ctx,
                                   [](const Trace& a, const Trace& b) {
                                       if (a.size() != b.size()) return a.size() < b.size();
                                       return a < b;
                                   });
        if (it == state_ctx.end() || *it != ctx)
            throw std::logic_error("pst completion failed to produce a target state");
        return static_cast<int>(it - state_ctx.begin());
    };

    d.rows.assign(static_cast<std::size_t>(n), {});
    for (int s = 0; s < n; ++s) {
        const Trace& ctx = state_ctx[static_cast<std::size_t>(s)];
        Trace pred = deepest_original(ct, ctx);
        auto dist = stats.next_dist(pred);
        double mass = 0.0;
        for (double p : dist) mass += p;
        auto& row = d.rows[static_cast<std::size_t>(s)];
        if (mass <= 0.0) {
            row.push_back({s, 1.0}); // context only ever seen at the very end
            continue;
        }
        std::vector<double> acc(static_cast<std::size_t>(n), 0.0);
        for (int sym = 0; sym < stats.alphabet().size(); ++sym) {
            double p = dist[static_cast<std::size_t>(sym)];
            if (p <= 0.0) continue;
            Trace v = ctx;
            v.push_back(sym);
            acc[static_cast<std::size_t>(state_of_history(v))] += p / mass;
        }
        for (int dst = 0; dst < n; ++dst)
            if (acc[static_cast<std::size_t>(dst)] > 0.0)
                row.push_back({dst, acc[static_cast<std::size_t>(dst)]});
    }
    return d;
}

Dtmc pst_to_dtmc(const Pst& t, const Trace& alpha, const Alphabet& alphabet) {
    SuffixStats stats(alpha, alphabet, std::max(t.max_depth(), 1) + 1);
    return pst_to_dtmc(t, stats);
}

std::string pst_dump(const Pst& t, const SuffixStats& stats) {
    std::ostringstream os;
    for (const auto& ctx : t.contexts()) {
        if (ctx.empty()) {
            os << "<empty>";
        } else {
            for (std::size_t i = 0; i < ctx.size(); ++i) {
                if (i) os << ' ';
                os << stats.alphabet().name(ctx[i]);
            }
        }
        os << " |";
        auto dist = stats.next_dist(ctx);
        for (int sym = 0; sym < stats.alphabet().size(); ++sym)
            if (dist[static_cast<std::size_t>(sym)] > 0.0)
                os << ' ' << stats.alphabet().name(sym) << ':'
                   << fmt_double(dist[static_cast<std::size_t>(sym)]);
        os << '\n';
    }
    return os.str();
}

} // namespace mclearn
