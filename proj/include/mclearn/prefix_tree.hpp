#pragma once

#include <utility>
#include <vector>

#include "mclearn/alphabet.hpp"

namespace mclearn {

// Prefix tree of a multiset of traces.  Node set = all distinct prefixes of
// the traces (including the empty prefix at the root); L(pi) counts how many
// traces have pi as a prefix.
struct PrefixTree {
    struct Node {
        int parent = -1;
        int sym = -1;      // symbol on the edge from the parent; -1 at the root
        long long count = 0; // L(pi)
        std::vector<std::pair<int, int>> kids; // (symbol, node), sorted by symbol
    };

    Alphabet alphabet;
    std::vector<Node> nodes; // nodes[0] is the root

    int node_count() const { return static_cast<int>(nodes.size()); }

    long long count(int node) const { return nodes[static_cast<std::size_t>(node)].count; }

    // Child reached on `sym`, or -1.
    int child(int node, int sym) const {
        for (const auto& [s, c] : nodes[static_cast<std::size_t>(node)].kids)
            if (s == sym) return c;
        return -1;
    }

    // Node for a prefix, or -1 when the prefix does not occur.
    int find(const Trace& prefix) const {
        int cur = 0;
        for (int sym : prefix) {
            cur = child(cur, sym);
            if (cur < 0) return -1;
        }
        return cur;
    }

    // Prefix spelled by the path from the root to `node`.
    Trace string_of(int node) const {
        Trace out;
        for (int cur = node; cur != 0; cur = nodes[static_cast<std::size_t>(cur)].parent)
            out.push_back(nodes[static_cast<std::size_t>(cur)].sym);
        return Trace(out.rbegin(), out.rend());
    }

    // Number of traces ending exactly at this node: L(pi) minus the mass that
    // continues to children.
    long long ends_here(int node) const {
        long long n = nodes[static_cast<std::size_t>(node)].count;
        for (const auto& [s, c] : nodes[static_cast<std::size_t>(node)].kids)
            n -= nodes[static_cast<std::size_t>(c)].count;
        return n;
    }
};

PrefixTree build_prefix_tree(const TraceSet& pi);

// Empirical next-symbol distribution at a node: Pr(pi, <e>) = L(pi.<e>)/L(pi)
// per occurring child, plus the leftover stop mass Pr(pi, <>) = 1 - sum.
struct NextDist {
    std::vector<std::pair<int, double>> probs; // (symbol, probability), sorted by symbol
    double stop = 1.0;
};

NextDist node_next_dist(const PrefixTree& t, int node);

// Eq. 1 product: probability of continuing from `node` along `word`,
// multiplying stepwise next-symbol probabilities.  Empty word -> 1; a word
// leaving the realized tree -> 0.
double multi_step_prob(const PrefixTree& t, int node, const Trace& word);

} // namespace mclearn
