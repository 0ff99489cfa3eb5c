#include <cmath>
#include <string>

#include "doctest.h"
#include "test_support.hpp"

#include "mclearn/aalergia.hpp"
#include "mclearn/errors.hpp"
#include "mclearn/metrics.hpp"
#include "mclearn/prefix_tree.hpp"
#include "mclearn/traces.hpp"

using namespace mclearn;
using namespace testsup;

namespace {

void add(TraceSet& ts, const std::vector<std::string>& syms, int copies) {
    Trace t;
    for (const auto& s : syms) t.push_back(ts.alphabet.intern(s));
    for (int i = 0; i < copies; ++i) ts.traces.push_back(t);
}

} // namespace

TEST_CASE("compatibility_bound: frozen Hoeffding-style value") {
    double b = compatibility_bound(100, 100, 0.5);
    CHECK(std::abs(b - 0.7433844377699678) <= 1e-12);
    // grows with eps, shrinks with count
    CHECK(compatibility_bound(100, 100, 1.0) > b);
    CHECK(compatibility_bound(1000, 1000, 0.5) < b);
}

TEST_CASE("compatible: label mismatch fails, identity passes") {
    TraceSet ts;
    add(ts, {"p", "a"}, 1);
    add(ts, {"q", "a"}, 1);
    MergeState m = MergeState::from_tree(build_prefix_tree(ts));
    int p = 1; // nodes follow insertion order: root, p, pa, q, qa
    int q = 3;
    CHECK_FALSE(compatible(m, p, q, 100.0)); // p vs q labels
    CHECK(compatible(m, p, p, 1e-9));
}

TEST_CASE("compatible: identical low-count subtrees pass at any eps") {
    // L = 1 makes the bound tiny, but exactly equal distributions always pass
    TraceSet ts;
    add(ts, {"p", "a", "b"}, 1);
    add(ts, {"q", "p", "a", "b"}, 1);
    PrefixTree t = build_prefix_tree(ts);
    MergeState m = MergeState::from_tree(t);
    int n1 = t.find({ts.alphabet.find("p")});
    int n2 = t.find({ts.alphabet.find("q"), ts.alphabet.find("p")});
    CHECK(compatibility_bound(1, 1, 0.001) < 0.2);
    CHECK(compatible(m, n1, n2, 0.001));
}

TEST_CASE("compatible: the 0.9-vs-0.1 textbook case") {
    TraceSet ts;
    add(ts, {"p", "a"}, 90);
    add(ts, {"p", "b"}, 10);
    add(ts, {"q", "p", "a"}, 10);
    add(ts, {"q", "p", "b"}, 90);
    PrefixTree t = build_prefix_tree(ts);
    MergeState m = MergeState::from_tree(t);
    int n1 = t.find({ts.alphabet.find("p")});
    int n2 = t.find({ts.alphabet.find("q"), ts.alphabet.find("p")});
    // diff 0.8 vs bound 0.743: incompatible at eps = 0.5
    CHECK_FALSE(compatible(m, n1, n2, 0.5));
    // bound 0.814 at eps = 0.6: compatible
    CHECK(compatible(m, n1, n2, 0.6));
}

TEST_CASE("compatible: termination mass participates in the test") {
    // children differ by ~0.11 each but the stop masses differ by 0.31
    TraceSet ts;
    add(ts, {"p", "a"}, 34);
    add(ts, {"p", "b"}, 33);
    add(ts, {"p", "c"}, 33);
    add(ts, {"q", "p", "a"}, 23);
    add(ts, {"q", "p", "b"}, 23);
    add(ts, {"q", "p", "c"}, 23);
    add(ts, {"q", "p"}, 31);
    PrefixTree t = build_prefix_tree(ts);
    MergeState m = MergeState::from_tree(t);
    int n1 = t.find({ts.alphabet.find("p")});
    int n2 = t.find({ts.alphabet.find("q"), ts.alphabet.find("p")});

    // bound 0.1995: every child difference passes, the stop difference fails
    CHECK(compatibility_bound(100, 100, 0.036) > 0.11);
    CHECK(compatibility_bound(100, 100, 0.036) < 0.31);
    CHECK_FALSE(compatible(m, n1, n2, 0.036));

    // bound 0.327 clears the stop difference too
    CHECK(compatibility_bound(100, 100, 0.0926) > 0.31);
    CHECK(compatible(m, n1, n2, 0.0926));
}

TEST_CASE("compatible: zero-count node is a usage error") {
    TraceSet ts;
    add(ts, {"p", "a"}, 2);
    MergeState m = MergeState::from_tree(build_prefix_tree(ts));
    m.nodes[2].count = 0;
    CHECK_THROWS_AS(compatible(m, 1, 2, 0.5), UsageError);
}

TEST_CASE("merge: self-loop fold onto an ancestor") {
    TraceSet ts;
    add(ts, {"a", "a"}, 2);
    add(ts, {"a"}, 1);
    PrefixTree t = build_prefix_tree(ts);
    MergeState m = MergeState::from_tree(t);
    int a = t.find({ts.alphabet.find("a")});
    int aa = t.find({ts.alphabet.find("a"), ts.alphabet.find("a")});

    merge(m, a, aa);
    CHECK_FALSE(m.nodes[static_cast<std::size_t>(aa)].alive);
    CHECK(m.nodes[static_cast<std::size_t>(a)].count == 5); // 3 + 2 pooled
    REQUIRE(m.nodes[static_cast<std::size_t>(a)].out.size() == 1);
    CHECK(m.nodes[static_cast<std::size_t>(a)].out[0].node == a); // redirected onto itself
    CHECK(m.nodes[static_cast<std::size_t>(a)].out[0].cnt == 2);
}

TEST_CASE("merge: folding a node into its own descendant is rejected") {
    TraceSet ts;
    add(ts, {"a", "a"}, 2);
    PrefixTree t = build_prefix_tree(ts);
    MergeState m = MergeState::from_tree(t);
    int a = t.find({ts.alphabet.find("a")});
    int aa = t.find({ts.alphabet.find("a"), ts.alphabet.find("a")});
    CHECK_THROWS_AS(merge(m, aa, a), UsageError);
    CHECK_THROWS_AS(merge(m, a, a), UsageError);
}

TEST_CASE("learn_aalergia: branching chain keeps its exact fractions") {
    TraceSet ts;
    add(ts, {"a", "b"}, 3);
    add(ts, {"a", "c"}, 1);
    Dtmc d = learn_aalergia(ts, 0.5);
    REQUIRE(d.n() == 3);
    CHECK(validate_dtmc(d).ok);
    int sa = -1, sb = -1, sc = -1;
    for (int s = 0; s < d.n(); ++s) {
        std::string l = d.alphabet.name(d.labels[static_cast<std::size_t>(s)]);
        if (l == "a") sa = s;
        if (l == "b") sb = s;
        if (l == "c") sc = s;
    }
    REQUIRE(sa >= 0);
    REQUIRE(sb >= 0);
    REQUIRE(sc >= 0);
    CHECK(d.init[static_cast<std::size_t>(sa)] == 1.0);
    CHECK(d.prob(sa, sb) == 0.75);
    CHECK(d.prob(sa, sc) == 0.25);
    CHECK(d.prob(sb, sb) == 1.0); // leaf becomes an absorbing state
    CHECK(d.prob(sc, sc) == 1.0);
}

TEST_CASE("learn_aalergia: eps drives the collapse of a unary chain") {
    TraceSet ts;
    add(ts, {"a", "a", "a", "a"}, 10);
    Dtmc coarse = learn_aalergia(ts, 4.0);
    REQUIRE(coarse.n() == 1);
    CHECK(coarse.prob(0, 0) == 1.0);
    CHECK(coarse.init[0] == 1.0);

    Dtmc fine = learn_aalergia(ts, 0.01);
    CHECK(fine.n() == 4);
}

TEST_CASE("learn_aalergia: deterministic and sane on sampled data") {
    Dtmc gen = make_dtmc({"a", "b", "c"}, {1.0, 0.0, 0.0},
                         {{0.0, 0.7, 0.3}, {0.4, 0.0, 0.6}, {0.5, 0.5, 0.0}});
    SampleParams p;
    p.count = 500;
    p.fixed_len = 10;
    p.seed = 11;
    TraceSet ts = sample_traces(gen, p);

    Dtmc m1 = learn_aalergia(ts, 4.0);
    Dtmc m2 = learn_aalergia(ts, 4.0);
    CHECK(save_dtmc(m1) == save_dtmc(m2));
    CHECK(validate_dtmc(m1).ok);
    CHECK(m1.n() == 3);
    CHECK(std::isfinite(log_likelihood(m1, ts)));
}

TEST_CASE("select_epsilon_bic: the choice is the argmax of its own log") {
    TraceSet ts;
    add(ts, {"a", "a", "a", "a"}, 10);
    add(ts, {"a", "a"}, 5);
    EpsilonSearch cfg;
    EpsilonChoice choice = select_epsilon_bic(ts, cfg);
    REQUIRE(!choice.log.empty());
    CHECK(static_cast<int>(choice.log.size()) <= cfg.max_evals);
    double best = -1e300;
    for (const auto& row : choice.log) {
        CHECK(row.eps >= cfg.lo);
        CHECK(row.eps <= cfg.hi);
        if (row.bic > best) best = row.bic;
    }
    CHECK(choice.bic == best);
    CHECK(choice.bic == doctest::Approx(bic_score(choice.model, ts, cfg.mu)).epsilon(1e-12));
}

TEST_CASE("select_epsilon_bic: finds the plateau of a unimodal step curve") {
    // one merge threshold only: below it the tree (4 states), above it a
    // single self-loop state; both have log-likelihood 0, so BIC steps up
    // once and stays there
    TraceSet ts;
    add(ts, {"a", "a", "a", "a"}, 10);
    EpsilonChoice choice = select_epsilon_bic(ts);
    CHECK(choice.model.n() == 1);
    double expect = -0.5 * 1.0 * std::log(40.0);
    CHECK(choice.bic == doctest::Approx(expect).epsilon(1e-12));

    // dense-grid oracle over the same range
    double best = -1e300;
    for (int i = 0; i <= 200; ++i) {
        double eps = std::exp(std::log(1.0 / 1024.0) +
                              (std::log(1024.0) - std::log(1.0 / 1024.0)) * i / 200.0);
        best = std::max(best, bic_score(learn_aalergia(ts, eps), ts, 0.5));
    }
    CHECK(choice.bic == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("select_epsilon_bic: collapsed range evaluates the midpoint once") {
    TraceSet ts;
    add(ts, {"a", "b"}, 4);
    EpsilonSearch cfg;
    cfg.lo = 2.0;
    cfg.hi = 2.0;
    EpsilonChoice choice = select_epsilon_bic(ts, cfg);
    REQUIRE(choice.log.size() == 1);
    CHECK(choice.eps == 2.0);
}

TEST_CASE("sweep_csv: schema") {
    std::vector<SweepRow> rows = {{0.5, -10.25, 3, -8.0}};
    std::string csv = sweep_csv(rows);
    CHECK(csv == "epsilon,bic,states,loglik\n0.5,-10.25,3,-8\n");
}
