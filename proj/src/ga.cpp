#include "mclearn/ga.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

#include "mclearn/errors.hpp"
#include "mclearn/format.hpp"

namespace mclearn {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

GaGroups make_groups(const PrefixTree& t, int z) {
    const int k = t.alphabet.size();
    std::vector<int> caps(static_cast<std::size_t>(k), 0);
    GaGroups g;
    for (int node = 1; node < t.node_count(); ++node) {
        int sym = t.nodes[static_cast<std::size_t>(node)].sym;
        ++caps[static_cast<std::size_t>(sym)];
        g.gene_sym.push_back(sym);
    }
    long long total_cap = 0;
    int nonempty = 0;
    for (int c : caps) {
        total_cap += c;
        if (c > 0) ++nonempty;
    }
    if (z < nonempty)
        throw UsageError("state budget smaller than the number of occurring symbols");
    if (z > total_cap) z = static_cast<int>(total_cap); // cannot use more states than nodes
    g.z = z;

    std::vector<int> alloc(static_cast<std::size_t>(k), 0);
    for (int s = 0; s < k; ++s)
        if (caps[static_cast<std::size_t>(s)] > 0) alloc[static_cast<std::size_t>(s)] = 1;
    int rem = z - nonempty;
    while (rem > 0) {
        bool moved = false;
        for (int s = 0; s < k && rem > 0; ++s) {
            if (alloc[static_cast<std::size_t>(s)] < caps[static_cast<std::size_t>(s)]) {
                ++alloc[static_cast<std::size_t>(s)];
                --rem;
                moved = true;
            }
        }
        if (!moved) break;
    }

    g.lo.assign(static_cast<std::size_t>(k), 1);
    g.hi.assign(static_cast<std::size_t>(k), 0);
    int next = 1;
    for (int s = 0; s < k; ++s) {
        if (alloc[static_cast<std::size_t>(s)] == 0) continue; // lo > hi marks absent
        g.lo[static_cast<std::size_t>(s)] = next;
        g.hi[static_cast<std::size_t>(s)] = next + alloc[static_cast<std::size_t>(s)] - 1;
        next = g.hi[static_cast<std::size_t>(s)] + 1;
    }
    return g;
}

bool chromosome_valid(const GaGroups& g, const ChromosomeM& c) {
    if (static_cast<int>(c.genes.size()) != g.gene_count()) return false;
    for (std::size_t i = 0; i < c.genes.size(); ++i) {
        int sym = g.gene_sym[i];
        if (c.genes[i] < g.lo[static_cast<std::size_t>(sym)] ||
            c.genes[i] > g.hi[static_cast<std::size_t>(sym)])
            return false;
    }
    return true;
}

std::vector<ChromosomeM> init_population(const PrefixTree& t, const GaGroups& g,
                                         const GaParams& params) {
    if (params.population < 2) throw UsageError("population must be at least 2");
    std::vector<ChromosomeM> pop;
    pop.reserve(static_cast<std::size_t>(params.population));
    const int x = g.gene_count();
    for (int i = 0; i < params.population; ++i) {
        ChromosomeM c;
        c.genes.resize(static_cast<std::size_t>(x));
        if (i == 0 && g.z == t.alphabet.size()) {
            // Fully merged: each group collapsed onto its single id.
            for (int j = 0; j < x; ++j)
                c.genes[static_cast<std::size_t>(j)] =
                    g.lo[static_cast<std::size_t>(g.gene_sym[static_cast<std::size_t>(j)])];
        } else {
            Rng rng = Rng::derive(params.seed, {stream::kGaInit,
                                               static_cast<std::uint64_t>(g.z),
                                               static_cast<std::uint64_t>(i)});
            for (int j = 0; j < x; ++j) {
                int sym = g.gene_sym[static_cast<std::size_t>(j)];
                c.genes[static_cast<std::size_t>(j)] =
                    rng.next_int(g.lo[static_cast<std::size_t>(sym)],
                                 g.hi[static_cast<std::size_t>(sym)]);
            }
        }
        pop.push_back(std::move(c));
    }
    return pop;
}

Dtmc decode(const PrefixTree& t, const ChromosomeM& c) {
    if (static_cast<int>(c.genes.size()) != t.node_count() - 1)
        throw UsageError("chromosome length does not match the tree");

    // Which ids are actually used, in ascending order.
    std::map<int, int> state_of; // gene value -> dense state id
    for (int v : c.genes) state_of[v] = 0;
    int n = 0;
    for (auto& [v, idx] : state_of) idx = n++;

    Dtmc d;
    d.alphabet = t.alphabet;
    d.labels.assign(static_cast<std::size_t>(n), -1);
    for (int node = 1; node < t.node_count(); ++node) {
        int s = state_of.at(c.genes[static_cast<std::size_t>(node - 1)]);
        int sym = t.nodes[static_cast<std::size_t>(node)].sym;
        if (d.labels[static_cast<std::size_t>(s)] == -1) {
            d.labels[static_cast<std::size_t>(s)] = sym;
        } else if (d.labels[static_cast<std::size_t>(s)] != sym) {
            throw UsageError("invalid chromosome: one state mixes two symbols");
        }
    }

    // Pooled counts: initial mass from depth-1 nodes, transition mass from
    // every edge.
    d.init.assign(static_cast<std::size_t>(n), 0.0);
    for (const auto& [sym, kid] : t.nodes[0].kids) {
        (void)sym;
        d.init[static_cast<std::size_t>(state_of.at(
            c.genes[static_cast<std::size_t>(kid - 1)]))] +=
            static_cast<double>(t.count(kid)) / static_cast<double>(t.count(0));
    }

    std::vector<std::map<int, long long>> num(static_cast<std::size_t>(n));
    std::vector<long long> row_mass(static_cast<std::size_t>(n), 0);
    for (int node = 1; node < t.node_count(); ++node) {
        int s = state_of.at(c.genes[static_cast<std::size_t>(node - 1)]);
        for (const auto& [sym, kid] : t.nodes[static_cast<std::size_t>(node)].kids) {
            (void)sym;
            int s2 = state_of.at(c.genes[static_cast<std::size_t>(kid - 1)]);
            num[static_cast<std::size_t>(s)][s2] += t.count(kid);
            row_mass[static_cast<std::size_t>(s)] += t.count(kid);
        }
    }
    d.rows.assign(static_cast<std::size_t>(n), {});
    for (int s = 0; s < n; ++s) {
        auto& row = d.rows[static_cast<std::size_t>(s)];
        if (row_mass[static_cast<std::size_t>(s)] == 0) {
            row.push_back({s, 1.0}); // pooled strings all stop here
            continue;
        }
        for (const auto& [dst, cnt] : num[static_cast<std::size_t>(s)])
            row.push_back({dst, static_cast<double>(cnt) /
                                    static_cast<double>(row_mass[static_cast<std::size_t>(s)])});
    }
    return d;
}

double fitness(const PrefixTree& t, const ChromosomeM& c, double mu) {
    Dtmc d = decode(t, c);
    const int n = d.n();

    // Letters = sum of counts over non-root nodes (each trace increments one
    // node per letter).
    long long letters = 0;
    for (int node = 1; node < t.node_count(); ++node) letters += t.count(node);

    // One forward pass over the tree; traces sharing a prefix share the work.
    // frontier[node][s] = Pr(emitting the node's prefix and sitting in s).
    std::vector<std::vector<double>> frontier(
        static_cast<std::size_t>(t.node_count()));
    double loglik = 0.0;
    for (int node = 1; node < t.node_count(); ++node) {
        const auto& nd = t.nodes[static_cast<std::size_t>(node)];
        auto& f = frontier[static_cast<std::size_t>(node)];
        f.assign(static_cast<std::size_t>(n), 0.0);
        if (nd.parent == 0) {
            for (int s = 0; s < n; ++s)
                if (d.labels[static_cast<std::size_t>(s)] == nd.sym)
                    f[static_cast<std::size_t>(s)] = d.init[static_cast<std::size_t>(s)];
        } else {
            const auto& fp = frontier[static_cast<std::size_t>(nd.parent)];
            for (int s = 0; s < n; ++s) {
                double mass = fp[static_cast<std::size_t>(s)];
                if (mass == 0.0) continue;
                for (const auto& tr : d.rows[static_cast<std::size_t>(s)])
                    if (d.labels[static_cast<std::size_t>(tr.dst)] == nd.sym)
                        f[static_cast<std::size_t>(tr.dst)] += mass * tr.prob;
            }
        }
        long long ends = t.ends_here(node);
        if (ends > 0) {
            double p = 0.0;
            for (double v : f) p += v;
            if (p <= 0.0) return kNegInf;
            loglik += static_cast<double>(ends) * std::log(p);
        }
        // Free the parent's frontier once all its children are done: not
        // tracked here for simplicity; trees at learning scale fit in memory.
    }
    return loglik - mu * static_cast<double>(n) * std::log(static_cast<double>(letters));
}

std::vector<ChromosomeM> select(const std::vector<ChromosomeM>& pop,
                                const std::vector<double>& fits,
                                const GaParams& params, Rng& rng) {
    const int n = static_cast<int>(pop.size());
    std::vector<ChromosomeM> pool;
    pool.reserve(static_cast<std::size_t>(n));

    if (params.select == SelectStrategy::Tournament) {
        for (int k = 0; k < n; ++k) {
            int i = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
            int j = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
            // Ties go to the first contestant drawn.
            int fitter = fits[static_cast<std::size_t>(j)] > fits[static_cast<std::size_t>(i)] ? j : i;
            int other = fitter == i ? j : i;
            int winner = rng.next_double() < params.tournament_p ? fitter : other;
            pool.push_back(pop[static_cast<std::size_t>(winner)]);
        }
        return pool;
    }

    // Roulette: shift so the worst finite fitness gets weight 1; -inf gets 0.
    double min_finite = std::numeric_limits<double>::infinity();
    for (double f : fits)
        if (!std::isinf(f)) min_finite = std::min(min_finite, f);
    std::vector<double> w(fits.size());
    double total = 0.0;
    for (std::size_t i = 0; i < fits.size(); ++i) {
        w[i] = std::isinf(fits[i]) ? 0.0 : fits[i] - (min_finite - 1.0);
        total += w[i];
    }
    if (total <= 0.0) {
        // Nothing has finite fitness; fall back to uniform weights.
        std::fill(w.begin(), w.end(), 1.0);
        total = static_cast<double>(w.size());
    }
    for (int k = 0; k < n; ++k) {
        double u = rng.next_double() * total;
        double cum = 0.0;
        int pick = n - 1;
        for (int i = 0; i < n; ++i) {
            if (w[static_cast<std::size_t>(i)] <= 0.0) continue;
            cum += w[static_cast<std::size_t>(i)];
            pick = i;
            if (u < cum) break;
        }
        pool.push_back(pop[static_cast<std::size_t>(pick)]);
    }
    return pool;
}

std::pair<ChromosomeM, ChromosomeM> crossover(const ChromosomeM& father,
                                              const ChromosomeM& mother,
                                              CrossoverKind kind, Rng& rng) {
    const std::size_t x = father.genes.size();
    if (mother.genes.size() != x) throw UsageError("crossover on mismatched chromosomes");
    ChromosomeM c1 = father, c2 = mother;
    switch (kind) {
    case CrossoverKind::OnePoint: {
        std::size_t k = rng.next_below(x); // 0..x-1; k = 0 swaps everything
        for (std::size_t i = k; i < x; ++i) std::swap(c1.genes[i], c2.genes[i]);
        break;
    }
    case CrossoverKind::TwoPoint: {
        std::size_t k1 = rng.next_below(x + 1);
        std::size_t k2 = rng.next_below(x + 1);
        if (k1 > k2) std::swap(k1, k2);
        for (std::size_t i = k1; i < k2; ++i) std::swap(c1.genes[i], c2.genes[i]);
        break;
    }
    case CrossoverKind::Uniform:
        // Deterministic alternation: child 1 takes odd (1-indexed) genes from
        // the father and even ones from the mother; child 2 mirrors.
        for (std::size_t i = 1; i < x; i += 2) std::swap(c1.genes[i], c2.genes[i]);
        break;
    }
    return {std::move(c1), std::move(c2)};
}

void mutate(ChromosomeM& c, const GaGroups& g, double rate, Rng& rng) {
    for (std::size_t i = 0; i < c.genes.size(); ++i) {
        if (rng.next_double() >= rate) continue;
        int sym = g.gene_sym[i];
        c.genes[i] = rng.next_int(g.lo[static_cast<std::size_t>(sym)],
                                  g.hi[static_cast<std::size_t>(sym)]);
    }
}

std::string progress_csv(const std::vector<GaProgressRow>& rows) {
    std::ostringstream os;
    os << "z,generation,best_fitness,best_states\n";
    for (const auto& r : rows)
        os << r.z << ',' << r.generation << ',' << fmt_double(r.best_fitness) << ','
           << r.best_states << '\n';
    return os.str();
}

namespace {

void evaluate_population(const PrefixTree& t, const std::vector<ChromosomeM>& pop,
                         double mu, int threads, std::vector<double>& fits) {
    fits.assign(pop.size(), 0.0);
    if (threads <= 1) {
        for (std::size_t i = 0; i < pop.size(); ++i) fits[i] = fitness(t, pop[i], mu);
        return;
    }
    // Fitness is a pure function; each worker fills disjoint slots, so the
    // result cannot depend on the thread count.
    std::vector<std::thread> workers;
    int tn = std::min<int>(threads, static_cast<int>(pop.size()));
    workers.reserve(static_cast<std::size_t>(tn));
    for (int w = 0; w < tn; ++w) {
        workers.emplace_back([&, w]() {
            for (std::size_t i = static_cast<std::size_t>(w); i < pop.size();
                 i += static_cast<std::size_t>(tn))
                fits[i] = fitness(t, pop[i], mu);
        });
    }
    for (auto& th : workers) th.join();
}

} // namespace

GaResult learn_ga(const TraceSet& pi, const GaParams& params, const GaObserver& observer) {
    if (params.population < 2) throw UsageError("population must be at least 2");
    if (params.generation_threshold < 1) throw UsageError("generation threshold must be >= 1");
    if (params.mutation_rate < 0.0 || params.mutation_rate > 1.0)
        throw UsageError("mutation rate must lie in [0,1]");
    if (params.select == SelectStrategy::Tournament &&
        (params.tournament_p <= 0.0 || params.tournament_p > 1.0))
        throw UsageError("tournament win probability must lie in (0,1]");

    PrefixTree tree = build_prefix_tree(pi);
    const int x = tree.node_count() - 1;
    const double rate = params.mutation_rate > 0.0 ? params.mutation_rate
                                                   : 1.0 / static_cast<double>(x);

    GaResult res;
    res.best_fitness = kNegInf;

    int z = tree.alphabet.size();
    for (;;) {
        GaGroups groups = make_groups(tree, z);
        z = groups.z; // capped when the budget exceeds the node count
        auto pop = init_population(tree, groups, params);
        std::vector<double> fits;
        bool improved_this_round = false;

        for (int gen = 0; gen < params.generation_threshold; ++gen) {
            evaluate_population(tree, pop, params.mu, params.threads, fits);
            for (std::size_t i = 0; i < pop.size(); ++i) {
                if (fits[i] > res.best_fitness) {
                    res.best_fitness = fits[i];
                    res.best = pop[i];
                    res.best_z = z;
                    improved_this_round = true;
                }
            }
            int best_states = res.best.genes.empty()
                                  ? 0
                                  : decode(tree, res.best).n();
            res.progress.push_back({z, gen, res.best_fitness, best_states});
            if (observer)
                observer({z, gen, &pop, &fits, res.best_fitness, best_states});

            // Variation: pair the mating pool in order, cross, mutate.
            Rng sel_rng = Rng::derive(params.seed, {stream::kGaSelect,
                                                   static_cast<std::uint64_t>(z),
                                                   static_cast<std::uint64_t>(gen)});
            auto pool = select(pop, fits, params, sel_rng);
            std::vector<ChromosomeM> children;
            children.reserve(pool.size());
            for (std::size_t p = 0; p + 1 < pool.size(); p += 2) {
                Rng xr = Rng::derive(params.seed, {stream::kGaCross,
                                                  static_cast<std::uint64_t>(z),
                                                  static_cast<std::uint64_t>(gen),
                                                  static_cast<std::uint64_t>(p / 2)});
                auto [c1, c2] = crossover(pool[p], pool[p + 1], params.crossover, xr);
                children.push_back(std::move(c1));
                children.push_back(std::move(c2));
            }
            if (children.size() < pool.size()) // odd population: carry the last over
                children.push_back(pool.back());
            for (std::size_t i = 0; i < children.size(); ++i) {
                Rng mr = Rng::derive(params.seed, {stream::kGaMutate,
                                                  static_cast<std::uint64_t>(z),
                                                  static_cast<std::uint64_t>(gen),
                                                  static_cast<std::uint64_t>(i)});
                mutate(children[i], groups, rate, mr);
            }
            pop = std::move(children);
        }

        if (!improved_this_round) break;
        long long total_cap = x;
        if (z >= total_cap) break; // every node already has its own id
        ++z;
    }

    res.model = decode(tree, res.best);
    return res;
}

} // namespace mclearn
