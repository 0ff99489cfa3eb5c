#pragma once

#include <string>
#include <vector>

#include "mclearn/dtmc.hpp"
#include "mclearn/prefix_tree.hpp"

namespace mclearn {

// Mutable merge arena for the state-merging learner.  Starts as a copy of a
// prefix tree (same node ids); merges redirect edges and fold counts.
struct MergeState {
    struct Edge {
        int sym = -1;
        int node = -1;
        long long cnt = 0; // pooled continuation count on this symbol
    };
    struct Node {
        int parent = -1;
        int sym = -1;       // last symbol of every string pooled here; -1 at root
        long long count = 0; // pooled L
        bool alive = true;
        std::vector<Edge> out; // sorted by sym, syms unique
    };

    Alphabet alphabet;
    std::vector<Node> nodes;

    static MergeState from_tree(const PrefixTree& t);

    long long emitted(int node) const { // mass that continues past the node
        long long s = 0;
        for (const auto& e : nodes[static_cast<std::size_t>(node)].out) s += e.cnt;
        return s;
    }
};

// Hoeffding-style tolerance of Eq-style compatibility:
// sqrt(6 eps ln(l1)/l1) + sqrt(6 eps ln(l2)/l2).
double compatibility_bound(long long l1, long long l2, double eps);

// Compatibility of two nodes: same last symbol, and every realized
// continuation (including the terminate-here mass) has probability
// difference strictly below the bound, with exact equality always passing.
// Errors when either node has count 0.
bool compatible(const MergeState& m, int n1, int n2, double eps);

// Merges n2 into n1: redirects n2's parent edge to n1, then folds n2's
// subtree into n1 (counts added, missing branches attached).  n2 must head a
// pure subtree: merging a node into its own descendant is an error.
void merge(MergeState& m, int n1, int n2);

// AALERGIA state merging: red-blue fringe over the prefix tree, pooled
// counts normalized into a DTMC at the end.
Dtmc learn_aalergia(const TraceSet& pi, double eps);

struct SweepRow {
    double eps = 0.0;
    double bic = 0.0;
    int states = 0;
    double loglik = 0.0;
};

struct EpsilonSearch {
    double lo = 1.0 / 1024.0; // 2^-10
    double hi = 1024.0;       // 2^10
    double tol = 1e-3;        // stop when the eps interval is this small
    int max_evals = 30;
    double mu = 0.5;
};

struct EpsilonChoice {
    double eps = 0.0;   // argmax of BIC among evaluated points
    double bic = 0.0;
    Dtmc model;         // the model learned at that eps
    std::vector<SweepRow> log; // every evaluation, in evaluation order
};

// Golden-section search on ln(eps) for the BIC-maximizing tolerance.  A
// range narrower than tol is evaluated once at its midpoint.
EpsilonChoice select_epsilon_bic(const TraceSet& pi, const EpsilonSearch& cfg = {});

// CSV: header epsilon,bic,states,loglik then one row per evaluation.
std::string sweep_csv(const std::vector<SweepRow>& rows);

} // namespace mclearn
