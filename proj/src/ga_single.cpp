#include "mclearn/ga_single.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <thread>

#include "mclearn/errors.hpp"

namespace mclearn {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

CandidateSet CandidateSet::build(const SuffixStats& stats, int depth_limit) {
    CandidateSet cs;
    cs.contexts = stats.contexts_up_to(depth_limit);
    std::map<Trace, int> index;
    for (int i = 0; i < cs.size(); ++i) index[cs.contexts[static_cast<std::size_t>(i)]] = i;

    cs.suffix_of.assign(cs.contexts.size(), -1);
    cs.ext.assign(cs.contexts.size(), {});
    for (int i = 0; i < cs.size(); ++i) {
        const Trace& ctx = cs.contexts[static_cast<std::size_t>(i)];
        if (ctx.size() < 2) continue;
        Trace sfx(ctx.begin() + 1, ctx.end()); // drop the oldest symbol
        auto it = index.find(sfx);
        // Suffixes of an occurring substring occur, so this always resolves.
        cs.suffix_of[static_cast<std::size_t>(i)] = it->second;
        cs.ext[static_cast<std::size_t>(it->second)].push_back(i);
    }
    return cs;
}

int CandidateSet::find(const Trace& ctx) const {
    auto cmp = [](const Trace& a, const Trace& b) {
        if (a.size() != b.size()) return a.size() < b.size();
        return a < b;
    };
    auto it = std::lower_bound(contexts.begin(), contexts.end(), ctx, cmp);
    if (it == contexts.end() || *it != ctx) return -1;
    return static_cast<int>(it - contexts.begin());
}

bool chromosome_valid_single(const CandidateSet& cs, const ChromosomeS& c) {
    if (static_cast<int>(c.genes.size()) != cs.size()) return false;
    for (int i = 0; i < cs.size(); ++i) {
        if (!c.genes[static_cast<std::size_t>(i)]) continue;
        for (int s = cs.suffix_of[static_cast<std::size_t>(i)]; s >= 0;
             s = cs.suffix_of[static_cast<std::size_t>(s)])
            if (c.genes[static_cast<std::size_t>(s)]) return false;
    }
    return true;
}

void repair_single(const CandidateSet& cs, ChromosomeS& c) {
    // Longest contexts win: candidates are sorted by length, so a reverse
    // scan visits longer ones first.
    for (int i = cs.size() - 1; i >= 0; --i) {
        if (!c.genes[static_cast<std::size_t>(i)]) continue;
        for (int s = cs.suffix_of[static_cast<std::size_t>(i)]; s >= 0;
             s = cs.suffix_of[static_cast<std::size_t>(s)])
            c.genes[static_cast<std::size_t>(s)] = 0;
    }
}

Pst decode_single(const CandidateSet& cs, const ChromosomeS& c) {
    if (static_cast<int>(c.genes.size()) != cs.size())
        throw UsageError("chromosome length does not match the candidate set");
    Pst t;
    for (int i = 0; i < cs.size(); ++i)
        if (c.genes[static_cast<std::size_t>(i)])
            t.insert(cs.contexts[static_cast<std::size_t>(i)]);
    return t;
}

void mutate_single(const CandidateSet& cs, ChromosomeS& c, double rate, Rng& rng) {
    for (int i = 0; i < cs.size(); ++i) {
        if (rng.next_double() >= rate) continue;
        auto& g = c.genes[static_cast<std::size_t>(i)];
        g = g ? 0 : 1;
        if (!g) continue;
        // The fresh selection wins both directions: clear selected proper
        // suffixes and selected superstrings.
        for (int s = cs.suffix_of[static_cast<std::size_t>(i)]; s >= 0;
             s = cs.suffix_of[static_cast<std::size_t>(s)])
            c.genes[static_cast<std::size_t>(s)] = 0;
        std::vector<int> stack(cs.ext[static_cast<std::size_t>(i)]);
        while (!stack.empty()) {
            int j = stack.back();
            stack.pop_back();
            c.genes[static_cast<std::size_t>(j)] = 0;
            for (int k : cs.ext[static_cast<std::size_t>(j)]) stack.push_back(k);
        }
    }
}

std::pair<ChromosomeS, ChromosomeS> crossover_single(const CandidateSet& cs,
                                                     const ChromosomeS& father,
                                                     const ChromosomeS& mother,
                                                     CrossoverKind kind, Rng& rng) {
    const std::size_t x = father.genes.size();
    if (mother.genes.size() != x) throw UsageError("crossover on mismatched chromosomes");
    ChromosomeS c1 = father, c2 = mother;
    switch (kind) {
    case CrossoverKind::OnePoint: {
        std::size_t k = rng.next_below(x);
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
        for (std::size_t i = 1; i < x; i += 2) std::swap(c1.genes[i], c2.genes[i]);
        break;
    }
    repair_single(cs, c1);
    repair_single(cs, c2);
    return {std::move(c1), std::move(c2)};
}

double fitness_single(const Trace& alpha, const SuffixStats& stats,
                      const CandidateSet& cs, const ChromosomeS& c, double mu) {
    Pst t = decode_single(cs, c);
    Dtmc d = pst_to_dtmc(t, stats);
    double ll = log_string_probability(d, alpha);
    if (std::isinf(ll)) return kNegInf;
    return ll - mu * static_cast<double>(d.n()) *
                    std::log(static_cast<double>(alpha.size()));
}

GaSingleResult learn_ga_single(const Trace& alpha, const Alphabet& alphabet,
                               const GaSingleParams& params,
                               const GaSingleObserver& observer) {
    const GaParams& gp = params.ga;
    if (gp.population < 2) throw UsageError("population must be at least 2");
    if (gp.generation_threshold < 1) throw UsageError("generation threshold must be >= 1");
    if (alpha.size() < 3)
        throw UsageError("execution too short to learn from (need at least 3 symbols)");

    int depth_cap = std::min<long long>(params.max_depth,
                                        static_cast<long long>(alpha.size()) - 2);
    if (depth_cap < 1) depth_cap = 1;
    SuffixStats stats(alpha, alphabet, depth_cap + 1);
    CandidateSet cs = CandidateSet::build(stats, depth_cap);
    const int x = cs.size();
    if (x == 0) throw UsageError("no candidate contexts (empty execution?)");
    const double rate = gp.mutation_rate > 0.0 ? gp.mutation_rate
                                               : 1.0 / static_cast<double>(x);

    // Seeds: root-only (all false) and fully first-order (all length-1
    // contexts selected; an antichain, hence valid).
    std::vector<ChromosomeS> pop;
    pop.reserve(static_cast<std::size_t>(gp.population));
    for (int i = 0; i < gp.population; ++i) {
        ChromosomeS c;
        c.genes.assign(static_cast<std::size_t>(x), 0);
        if (i == 1) {
            for (int j = 0; j < x; ++j)
                if (cs.contexts[static_cast<std::size_t>(j)].size() == 1)
                    c.genes[static_cast<std::size_t>(j)] = 1;
        } else if (i >= 2) {
            Rng rng = Rng::derive(gp.seed, {stream::kGaInit, 0,
                                            static_cast<std::uint64_t>(i)});
            for (int j = 0; j < x; ++j)
                c.genes[static_cast<std::size_t>(j)] =
                    rng.next_double() < 0.5 ? 1 : 0;
            repair_single(cs, c);
        }
        pop.push_back(std::move(c));
    }

    GaSingleResult res;
    res.best_fitness = kNegInf;
    std::vector<double> fits;

    auto evaluate = [&](const std::vector<ChromosomeS>& p) {
        fits.assign(p.size(), 0.0);
        int tn = std::min<int>(std::max(gp.threads, 1), static_cast<int>(p.size()));
        if (tn <= 1) {
            for (std::size_t i = 0; i < p.size(); ++i)
                fits[i] = fitness_single(alpha, stats, cs, p[i], gp.mu);
            return;
        }
        std::vector<std::thread> workers;
        workers.reserve(static_cast<std::size_t>(tn));
        for (int w = 0; w < tn; ++w)
            workers.emplace_back([&, w]() {
                for (std::size_t i = static_cast<std::size_t>(w); i < p.size();
                     i += static_cast<std::size_t>(tn))
                    fits[i] = fitness_single(alpha, stats, cs, p[i], gp.mu);
            });
        for (auto& th : workers) th.join();
    };

    for (int gen = 0; gen < gp.generation_threshold; ++gen) {
        evaluate(pop);
        for (std::size_t i = 0; i < pop.size(); ++i) {
            if (fits[i] > res.best_fitness) {
                res.best_fitness = fits[i];
                res.best = pop[i];
            }
        }
        int best_states = pst_to_dtmc(decode_single(cs, res.best), stats).n();
        res.progress.push_back({0, gen, res.best_fitness, best_states});
        if (observer) observer({gen, &pop, &fits, res.best_fitness, best_states});

        Rng sel_rng = Rng::derive(gp.seed, {stream::kGaSelect, 0,
                                            static_cast<std::uint64_t>(gen)});
        // Reuse the integer-GA selection by boxing fitness only; roulette
        // and tournament need nothing chromosome-specific.
        std::vector<int> pool_idx;
        pool_idx.reserve(pop.size());
        const int n = static_cast<int>(pop.size());
        if (gp.select == SelectStrategy::Tournament) {
            for (int k = 0; k < n; ++k) {
                int i = static_cast<int>(sel_rng.next_below(static_cast<std::uint64_t>(n)));
                int j = static_cast<int>(sel_rng.next_below(static_cast<std::uint64_t>(n)));
                int fitter = fits[static_cast<std::size_t>(j)] > fits[static_cast<std::size_t>(i)] ? j : i;
                int other = fitter == i ? j : i;
                pool_idx.push_back(sel_rng.next_double() < gp.tournament_p ? fitter : other);
            }
        } else {
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
                std::fill(w.begin(), w.end(), 1.0);
                total = static_cast<double>(w.size());
            }
            for (int k = 0; k < n; ++k) {
                double u = sel_rng.next_double() * total;
                double cum = 0.0;
                int pick = n - 1;
                for (int i = 0; i < n; ++i) {
                    if (w[static_cast<std::size_t>(i)] <= 0.0) continue;
                    cum += w[static_cast<std::size_t>(i)];
                    pick = i;
                    if (u < cum) break;
                }
                pool_idx.push_back(pick);
            }
        }

        std::vector<ChromosomeS> children;
        children.reserve(pop.size());
        for (std::size_t p = 0; p + 1 < pool_idx.size(); p += 2) {
            Rng xr = Rng::derive(gp.seed, {stream::kGaCross, 0,
                                           static_cast<std::uint64_t>(gen),
                                           static_cast<std::uint64_t>(p / 2)});
            auto [c1, c2] = crossover_single(cs, pop[static_cast<std::size_t>(pool_idx[p])],
                                             pop[static_cast<std::size_t>(pool_idx[p + 1])],
                                             gp.crossover, xr);
            children.push_back(std::move(c1));
            children.push_back(std::move(c2));
        }
        if (children.size() < pool_idx.size())
            children.push_back(pop[static_cast<std::size_t>(pool_idx.back())]);
        for (std::size_t i = 0; i < children.size(); ++i) {
            Rng mr = Rng::derive(gp.seed, {stream::kGaMutate, 0,
                                           static_cast<std::uint64_t>(gen),
                                           static_cast<std::uint64_t>(i)});
            mutate_single(cs, children[i], rate, mr);
        }
        pop = std::move(children);
    }

    res.tree = decode_single(cs, res.best);
    res.model = pst_to_dtmc(res.tree, stats);
    return res;
}

} // namespace mclearn
