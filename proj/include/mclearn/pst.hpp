#pragma once

#include <string>
#include <vector>

#include "mclearn/dtmc.hpp"
#include "mclearn/suffix_stats.hpp"

namespace mclearn {

// Suffix-closed set of contexts, stored as a trie keyed most-recent-symbol
// first; a node's ancestors are exactly the proper suffixes of its context,
// so the set is suffix-closed by construction.
class Pst {
public:
    Pst() { nodes_.push_back({}); }

    int node_count() const { return static_cast<int>(nodes_.size()); }
    int root() const { return 0; }
    int parent(int node) const { return nodes_[static_cast<std::size_t>(node)].parent; }
    bool is_leaf(int node) const { return nodes_[static_cast<std::size_t>(node)].kids.empty(); }
    int depth(int node) const;

    // Inserts a context (ancestors come into existence on the way); returns
    // its node id.
    int insert(const Trace& ctx);

    bool contains(const Trace& ctx) const { return find(ctx) >= 0; }
    int find(const Trace& ctx) const; // -1 when absent

    // Node of the longest suffix of `history` present in the tree (possibly
    // the root).
    int deepest_suffix(const Trace& history) const;

    // Context of a node, most recent symbol last.
    Trace context_of(int node) const;

    // All contexts including the empty one, ordered by length then lex.
    std::vector<Trace> contexts() const;

    std::vector<int> leaf_nodes() const;
    int max_depth() const;

private:
    struct Node {
        int parent = -1;
        int sym = -1; // the symbol this child prepends (one step older)
        std::vector<std::pair<int, int>> kids; // (symbol, node), sorted
    };
    int child(int node, int sym) const;
    std::vector<Node> nodes_;
};

// Context-growing learner for one long execution: a breadth-first worklist
// of candidate contexts, admitted when the KL-style gain
//   fre(pi) * sum_e Pr_pi(e) ln(Pr_pi(e)/Pr_pi'(e))   (pi' = longest suffix in T)
// reaches eps, and extended into the past while fre(pi) > eps, up to
// max_depth.  The execution must have at least 3 symbols.
Pst learn_pst(const Trace& alpha, const Alphabet& alphabet, double eps,
              int max_depth = 8);

// PST -> DTMC.  States are the leaves of the completed tree; each state's
// outgoing distribution comes from the deepest *original* tree context that
// is a suffix of it (the PST prediction rule), renormalized over the emitted
// mass; the initial distribution is proportional to context occurrence
// counts.  Completion inserts the auxiliary contexts needed so every
// positive-probability step has a unique leaf target.
Dtmc pst_to_dtmc(const Pst& t, const Trace& alpha, const Alphabet& alphabet);

// Variant reusing precomputed statistics (depth must cover max_depth(t)+1).
Dtmc pst_to_dtmc(const Pst& t, const SuffixStats& stats);

// Debug dump: one context per line ("<empty>" for the root), then the
// context's empirical next-symbol probabilities.
std::string pst_dump(const Pst& t, const SuffixStats& stats);

} // namespace mclearn
