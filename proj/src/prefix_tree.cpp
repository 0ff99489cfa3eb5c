#include "mclearn/prefix_tree.hpp"

#include <algorithm>

#include "mclearn/errors.hpp"

namespace mclearn {

PrefixTree build_prefix_tree(const TraceSet& pi) {
    if (pi.traces.empty()) throw UsageError("prefix tree needs at least one trace");
    PrefixTree t;
    t.alphabet = pi.alphabet;
    t.nodes.push_back({});
    for (const auto& trace : pi.traces) {
        int cur = 0;
        t.nodes[0].count += 1;
        for (int sym : trace) {
            int nxt = t.child(cur, sym);
            if (nxt < 0) {
                nxt = t.node_count();
                t.nodes.push_back({cur, sym, 0, {}});
                auto& kids = t.nodes[static_cast<std::size_t>(cur)].kids;
                kids.emplace_back(sym, nxt);
                std::sort(kids.begin(), kids.end());
            }
            t.nodes[static_cast<std::size_t>(nxt)].count += 1;
            cur = nxt;
        }
    }
    return t;
}

NextDist node_next_dist(const PrefixTree& t, int node) {
    const auto& nd = t.nodes[static_cast<std::size_t>(node)];
    if (nd.count <= 0) throw UsageError("next-symbol distribution at node with L = 0");
    NextDist out;
    long long continued = 0;
    for (const auto& [sym, child] : nd.kids) {
        long long c = t.count(child);
        continued += c;
        out.probs.emplace_back(sym, static_cast<double>(c) / static_cast<double>(nd.count));
    }
    // Integer subtraction first so a fully-continued node gets stop mass
    // exactly 0.0 (and rationals like 1/3 stay as exact as doubles allow).
    out.stop = static_cast<double>(nd.count - continued) / static_cast<double>(nd.count);
    return out;
}

double multi_step_prob(const PrefixTree& t, int node, const Trace& word) {
    double p = 1.0;
    int cur = node;
    for (int sym : word) {
        const auto& nd = t.nodes[static_cast<std::size_t>(cur)];
        if (nd.count <= 0) throw UsageError("multi-step probability through node with L = 0");
        int nxt = t.child(cur, sym);
        if (nxt < 0) return 0.0;
        p *= static_cast<double>(t.count(nxt)) / static_cast<double>(nd.count);
        cur = nxt;
    }
    return p;
}

} // namespace mclearn
