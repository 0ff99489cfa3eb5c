#include "mclearn/aalergia.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <sstream>

#include "mclearn/errors.hpp"
#include "mclearn/format.hpp"
#include "mclearn/metrics.hpp"

namespace mclearn {

MergeState MergeState::from_tree(const PrefixTree& t) {
    MergeState m;
    m.alphabet = t.alphabet;
    m.nodes.resize(t.nodes.size());
    for (std::size_t i = 0; i < t.nodes.size(); ++i) {
        const auto& src = t.nodes[i];
        auto& dst = m.nodes[i];
        dst.parent = src.parent;
        dst.sym = src.sym;
        dst.count = src.count;
        for (const auto& [sym, kid] : src.kids)
            dst.out.push_back({sym, kid, t.nodes[static_cast<std::size_t>(kid)].count});
    }
    return m;
}

double compatibility_bound(long long l1, long long l2, double eps) {
    auto side = [eps](long long l) {
        return std::sqrt(6.0 * eps * std::log(static_cast<double>(l)) /
                         static_cast<double>(l));
    };
    return side(l1) + side(l2);
}

namespace {

// Simultaneous walk over the union of realized continuations of (u1, u2),
// carrying path probabilities (p1, p2).  Every visited path also checks its
// terminate-here mass, matching the Pr(pi, <>) convention.  Recursion always
// descends a real tree on at least one side, so it terminates even when the
// other side has merge-created cycles.
bool walk_compatible(const MergeState& m, int u1, int u2, double p1, double p2,
                     double bound) {
    const auto& a = m.nodes[static_cast<std::size_t>(u1)];
    const auto& b = m.nodes[static_cast<std::size_t>(u2)];

    double stop1 = p1 * static_cast<double>(a.count - m.emitted(u1)) /
                   static_cast<double>(a.count);
    double stop2 = p2 * static_cast<double>(b.count - m.emitted(u2)) /
                   static_cast<double>(b.count);
    double d = std::abs(stop1 - stop2);
    if (d != 0.0 && d >= bound) return false;

    std::size_t i = 0, j = 0;
    while (i < a.out.size() || j < b.out.size()) {
        int sa = i < a.out.size() ? a.out[i].sym : std::numeric_limits<int>::max();
        int sb = j < b.out.size() ? b.out[j].sym : std::numeric_limits<int>::max();
        int sym = std::min(sa, sb);
        double q1 = 0.0, q2 = 0.0;
        int c1 = -1, c2 = -1;
        if (sa == sym) {
            q1 = p1 * static_cast<double>(a.out[i].cnt) / static_cast<double>(a.count);
            c1 = a.out[i].node;
            ++i;
        }
        if (sb == sym) {
            q2 = p2 * static_cast<double>(b.out[j].cnt) / static_cast<double>(b.count);
            c2 = b.out[j].node;
            ++j;
        }
        d = std::abs(q1 - q2);
        if (d != 0.0 && d >= bound) return false;
        // Once either side's path probability is 0, all deeper paths on the
        // other side stay below the bound just checked; prune.
        if (q1 > 0.0 && q2 > 0.0 &&
            !walk_compatible(m, c1, c2, q1, q2, bound))
            return false;
    }
    return true;
}

bool is_ancestor(const MergeState& m, int anc, int node) {
    for (int cur = node; cur >= 0; cur = m.nodes[static_cast<std::size_t>(cur)].parent)
        if (cur == anc) return true;
    return false;
}

// Folds node s (head of a pure subtree) into t: counts pool, shared branches
// recurse, missing branches attach.  When `newly_attached` is given, every
// (target, child) attachment is reported so the learner can extend its blue
// fringe.
void fold(MergeState& m, int t, int s,
          std::vector<std::pair<int, int>>* newly_attached) {
    auto& src = m.nodes[static_cast<std::size_t>(s)];
    m.nodes[static_cast<std::size_t>(t)].count += src.count;
    src.alive = false;
    for (const auto& e : src.out) {
        auto& tn = m.nodes[static_cast<std::size_t>(t)];
        auto it = std::find_if(tn.out.begin(), tn.out.end(),
                               [&e](const MergeState::Edge& te) { return te.sym == e.sym; });
        if (it != tn.out.end()) {
            it->cnt += e.cnt;
            fold(m, it->node, e.node, newly_attached);
        } else {
            tn.out.push_back(e);
            std::sort(tn.out.begin(), tn.out.end(),
                      [](const MergeState::Edge& x, const MergeState::Edge& y) {
                          return x.sym < y.sym;
                      });
            m.nodes[static_cast<std::size_t>(e.node)].parent = t;
            if (newly_attached) newly_attached->emplace_back(t, e.node);
        }
    }
    src.out.clear();
}

void merge_impl(MergeState& m, int n1, int n2,
                std::vector<std::pair<int, int>>* newly_attached) {
    if (n1 == n2) throw UsageError("cannot merge a node with itself");
    auto& a = m.nodes[static_cast<std::size_t>(n1)];
    auto& b = m.nodes[static_cast<std::size_t>(n2)];
    if (!a.alive || !b.alive) throw UsageError("merge on a dead node");
    if (b.parent < 0) throw UsageError("cannot merge the root away");
    if (is_ancestor(m, n2, n1))
        throw UsageError("cannot merge a node into its own descendant");

    auto& parent = m.nodes[static_cast<std::size_t>(b.parent)];
    for (auto& e : parent.out)
        if (e.node == n2) e.node = n1;
    fold(m, n1, n2, newly_attached);
}

} // namespace

bool compatible(const MergeState& m, int n1, int n2, double eps) {
    const auto& a = m.nodes[static_cast<std::size_t>(n1)];
    const auto& b = m.nodes[static_cast<std::size_t>(n2)];
    if (a.count <= 0 || b.count <= 0)
        throw UsageError("compatibility test on a node with count 0");
    if (n1 == n2) return true;
    if (a.sym != b.sym) return false;
    double bound = compatibility_bound(a.count, b.count, eps);
    return walk_compatible(m, n1, n2, 1.0, 1.0, bound);
}

void merge(MergeState& m, int n1, int n2) { merge_impl(m, n1, n2, nullptr); }

Dtmc learn_aalergia(const TraceSet& pi, double eps) {
    if (!(eps > 0.0)) throw UsageError("aalergia epsilon must be positive");
    PrefixTree tree = build_prefix_tree(pi);
    MergeState m = MergeState::from_tree(tree);

    std::vector<int> red{0};
    std::vector<char> is_red(m.nodes.size(), 0);
    is_red[0] = 1;
    std::deque<int> blue;
    for (const auto& e : m.nodes[0].out) blue.push_back(e.node);

    std::vector<std::pair<int, int>> attached;
    while (!blue.empty()) {
        int b = blue.front();
        blue.pop_front();
        if (!m.nodes[static_cast<std::size_t>(b)].alive || is_red[static_cast<std::size_t>(b)])
            continue;
        int target = -1;
        for (std::size_t ri = 1; ri < red.size(); ++ri) {
            int r = red[ri];
            if (m.nodes[static_cast<std::size_t>(r)].sym !=
                m.nodes[static_cast<std::size_t>(b)].sym)
                continue;
            if (compatible(m, r, b, eps)) {
                target = r;
                break;
            }
        }
        if (target >= 0) {
            attached.clear();
            merge_impl(m, target, b, &attached);
            // Subtrees attached directly under a red node join the fringe;
            // ones attached deeper surface when their ancestors promote.
            for (const auto& [t, c] : attached)
                if (is_red[static_cast<std::size_t>(t)]) blue.push_back(c);
        } else {
            red.push_back(b);
            is_red[static_cast<std::size_t>(b)] = 1;
            for (const auto& e : m.nodes[static_cast<std::size_t>(b)].out)
                blue.push_back(e.node);
        }
    }

    // Promotion order defines state ids; the root is not a state (it has no
    // last symbol) and contributes the initial distribution instead.
    Dtmc d;
    d.alphabet = pi.alphabet;
    std::vector<int> state_of(m.nodes.size(), -1);
    for (std::size_t ri = 1; ri < red.size(); ++ri) {
        state_of[static_cast<std::size_t>(red[ri])] = static_cast<int>(ri - 1);
        d.labels.push_back(m.nodes[static_cast<std::size_t>(red[ri])].sym);
    }
    const int n = static_cast<int>(red.size()) - 1;
    if (n == 0) throw UsageError("no states learned (empty trace set?)");

    d.init.assign(static_cast<std::size_t>(n), 0.0);
    long long root_mass = m.emitted(0);
    for (const auto& e : m.nodes[0].out)
        d.init[static_cast<std::size_t>(state_of[static_cast<std::size_t>(e.node)])] +=
            static_cast<double>(e.cnt) / static_cast<double>(root_mass);

    d.rows.assign(static_cast<std::size_t>(n), {});
    for (std::size_t ri = 1; ri < red.size(); ++ri) {
        int r = red[ri];
        int s = static_cast<int>(ri - 1);
        long long mass = m.emitted(r);
        auto& row = d.rows[static_cast<std::size_t>(s)];
        if (mass == 0) {
            // Pooled strings all terminate here; keep the row stochastic.
            row.push_back({s, 1.0});
            continue;
        }
        std::map<int, double> acc;
        for (const auto& e : m.nodes[static_cast<std::size_t>(r)].out)
            acc[state_of[static_cast<std::size_t>(e.node)]] +=
                static_cast<double>(e.cnt) / static_cast<double>(mass);
        for (const auto& [dst, p] : acc) row.push_back({dst, p});
    }
    return d;
}

EpsilonChoice select_epsilon_bic(const TraceSet& pi, const EpsilonSearch& cfg) {
    if (!(cfg.lo > 0.0) || !(cfg.hi >= cfg.lo))
        throw UsageError("epsilon search range must satisfy 0 < lo <= hi");
    EpsilonChoice choice;
    choice.bic = -std::numeric_limits<double>::infinity();

    auto evaluate = [&pi, &cfg, &choice](double eps) {
        Dtmc model = learn_aalergia(pi, eps);
        double ll = log_likelihood(model, pi);
        double bic = ll - cfg.mu * static_cast<double>(model.n()) *
                              std::log(static_cast<double>(pi.total_letters()));
        choice.log.push_back({eps, bic, model.n(), ll});
        if (bic > choice.bic) {
            choice.bic = bic;
            choice.eps = eps;
            choice.model = std::move(model);
        }
        return bic;
    };

    if (cfg.hi - cfg.lo < cfg.tol) {
        evaluate((cfg.lo + cfg.hi) / 2.0);
        return choice;
    }

    // Golden section on ln(eps): epsilon is a scale parameter and the default
    // range spans six orders of magnitude.
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = std::log(cfg.lo), b = std::log(cfg.hi);
    double c = b - phi * (b - a);
    double e = a + phi * (b - a);
    double fc = evaluate(std::exp(c));
    double fe = evaluate(std::exp(e));
    int evals = 2;
    while (evals < cfg.max_evals && std::exp(b) - std::exp(a) >= cfg.tol) {
        if (fc >= fe) {
            b = e;
            e = c;
            fe = fc;
            c = b - phi * (b - a);
            fc = evaluate(std::exp(c));
        } else {
            a = c;
            c = e;
            fc = fe;
            e = a + phi * (b - a);
            fe = evaluate(std::exp(e));
        }
        ++evals;
    }
    return choice;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream os;
    os << "epsilon,bic,states,loglik\n";
    for (const auto& r : rows)
        os << fmt_double(r.eps) << ',' << fmt_double(r.bic) << ',' << r.states << ','
           << fmt_double(r.loglik) << '\n';
    return os.str();
}

} // namespace mclearn
