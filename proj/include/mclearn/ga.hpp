#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mclearn/dtmc.hpp"
#include "mclearn/prefix_tree.hpp"
#include "mclearn/rng.hpp"

namespace mclearn {

enum class SelectStrategy { Tournament, Roulette };
enum class CrossoverKind { OnePoint, TwoPoint, Uniform };

struct GaParams {
    int population = 64;
    int generation_threshold = 50; // generations per z-round
    SelectStrategy select = SelectStrategy::Tournament;
    double tournament_p = 0.75;    // probability the fitter contestant wins
    CrossoverKind crossover = CrossoverKind::TwoPoint;
    double mutation_rate = 0.0;    // 0 -> default 1/X
    double mu = 0.5;               // BIC size penalty weight
    int threads = 1;               // fitness evaluation only
    std::uint64_t seed = 0;
};

// A candidate state assignment: gene i holds the state id (1-based, <= z) of
// prefix-tree node i+1.  Validity means every gene lies in the id range
// reserved for its node's group (nodes sharing a last symbol).
struct ChromosomeM {
    std::vector<int> genes;
};

// Per-(tree, z) group bookkeeping: disjoint state-id ranges per symbol.
// Every occurring symbol gets at least one id; the rest are dealt round-robin
// in symbol order, capped by group size.
struct GaGroups {
    int z = 0;                 // effective state budget (after capping)
    std::vector<int> lo, hi;   // per symbol id; lo > hi for absent symbols
    std::vector<int> gene_sym; // group (symbol) of each gene

    int gene_count() const { return static_cast<int>(gene_sym.size()); }
};

GaGroups make_groups(const PrefixTree& t, int z);

bool chromosome_valid(const GaGroups& g, const ChromosomeM& c);

// Population of `params.population` valid chromosomes.  At z = |alphabet|
// the first one is the fully-merged assignment (every group collapsed to one
// state); the rest are uniform over the valid ranges.
std::vector<ChromosomeM> init_population(const PrefixTree& t, const GaGroups& g,
                                         const GaParams& params);

// Eq. 3: pool counts of same-state nodes into transition/initial weights,
// renormalize rows, drop unused ids, map all-leaf states to self-loops.
Dtmc decode(const PrefixTree& t, const ChromosomeM& c);

// BIC fitness ln Pr_M(Pi) - mu |M| ln(letters), evaluated by a single walk
// over the tree (traces grouped by shared prefixes); -inf when the decoded
// model cannot produce some trace.
double fitness(const PrefixTree& t, const ChromosomeM& c, double mu);

// Mating pool of the same size as the population (with repetition).
std::vector<ChromosomeM> select(const std::vector<ChromosomeM>& pop,
                                const std::vector<double>& fits,
                                const GaParams& params, Rng& rng);

std::pair<ChromosomeM, ChromosomeM> crossover(const ChromosomeM& father,
                                              const ChromosomeM& mother,
                                              CrossoverKind kind, Rng& rng);

// Per-gene redraw within the gene's group range with probability `rate`.
void mutate(ChromosomeM& c, const GaGroups& g, double rate, Rng& rng);

struct GaProgressRow {
    int z = 0;
    int generation = 0;
    double best_fitness = 0.0;
    int best_states = 0;
};

std::string progress_csv(const std::vector<GaProgressRow>& rows);

// Per-generation snapshot for observers (tests, progress reporting).
struct GaEvent {
    int z = 0;
    int generation = 0;
    const std::vector<ChromosomeM>* population = nullptr;
    const std::vector<double>* fitness = nullptr;
    double best_fitness = 0.0;
    int best_states = 0;
};

using GaObserver = std::function<void(const GaEvent&)>;

struct GaResult {
    Dtmc model;
    ChromosomeM best;
    int best_z = 0;
    double best_fitness = 0.0;
    std::vector<GaProgressRow> progress;
};

// Algorithm: z starts at |alphabet|; each z-round runs generation_threshold
// generations of select/crossover/mutate with the best-so-far tracked before
// variation; a round that never improves the best ends the search, otherwise
// z grows by one (until every group is at its size cap).
GaResult learn_ga(const TraceSet& pi, const GaParams& params,
                  const GaObserver& observer = {});

} // namespace mclearn
