#pragma once

#include <utility>
#include <vector>

#include "mclearn/alphabet.hpp"

namespace mclearn {

// Substring statistics of a single long execution, for context-based
// (suffix-tree) learning.  Contexts are written most-recent-symbol-last:
// after observing ...x,y,z the depth-2 context is <y,z>.
//
// Internally a trie keyed most-recent-symbol-first, so a node's ancestors are
// exactly the (proper) suffixes of its context.  Counts are overlapping
// substring occurrences; the root's count is defined as |alpha| so the root's
// next-symbol distribution is the exact unigram distribution.
class SuffixStats {
public:
    SuffixStats(const Trace& alpha, const Alphabet& alphabet, int max_depth);

    const Alphabet& alphabet() const { return alphabet_; }
    long long alpha_len() const { return alpha_len_; }
    int max_depth() const { return max_depth_; }

    // #(ctx, alpha); 0 when the context never occurs or is deeper than the
    // depth this object was built for.
    long long count(const Trace& ctx) const;

    // Relative frequency #(ctx)/(|alpha| - |ctx| - 1).  The denominator is an
    // error when it is not positive.
    double fre(const Trace& ctx) const;

    // #(ctx . <sym>, alpha): occurrences of sym right after ctx.
    long long next_count(const Trace& ctx, int sym) const;

    // Conditional next-symbol distribution Pr_ctx(e) = #(ctx.<e>)/#(ctx),
    // dense over the alphabet.  May sum to less than 1 when ctx's last
    // occurrence sits at the very end of alpha.  Error when #(ctx) = 0.
    std::vector<double> next_dist(const Trace& ctx) const;

    // All occurring contexts with 1 <= length <= depth_limit, ordered by
    // length then lexicographically; the candidate universe of the
    // single-execution GA.
    std::vector<Trace> contexts_up_to(int depth_limit) const;

private:
    struct Node {
        int parent = -1;
        int sym = -1; // symbol on the edge from the parent (one step older)
        long long count = 0;
        std::vector<std::pair<int, int>> kids; // (symbol, node), sorted
    };

    int child(int node, int sym) const {
        for (const auto& [s, c] : nodes_[static_cast<std::size_t>(node)].kids)
            if (s == sym) return c;
        return -1;
    }

    // Trie walk for a context (most recent symbol first); -1 when absent.
    int locate(const Trace& ctx) const;

    Alphabet alphabet_;
    long long alpha_len_;
    int max_depth_;
    std::vector<Node> nodes_;
};

} // namespace mclearn
