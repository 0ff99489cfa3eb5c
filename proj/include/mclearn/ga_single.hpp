#pragma once

#include <cstdint>
#include <vector>

#include "mclearn/dtmc.hpp"
#include "mclearn/ga.hpp"
#include "mclearn/pst.hpp"
#include "mclearn/suffix_stats.hpp"

namespace mclearn {

// Candidate universe for the single-execution GA: every context occurring in
// alpha with length 1..max_depth, ordered by length then lexicographically.
// suffix_of[i] links each candidate to its one-shorter suffix (drop the
// oldest symbol); ext[i] lists the candidates one symbol longer whose suffix
// is i.  Walking suffix_of reaches every proper suffix; walking ext reaches
// every superstring (contexts that end with candidate i).
struct CandidateSet {
    std::vector<Trace> contexts;
    std::vector<int> suffix_of;        // -1 for length-1 contexts
    std::vector<std::vector<int>> ext;

    static CandidateSet build(const SuffixStats& stats, int depth_limit);

    int size() const { return static_cast<int>(contexts.size()); }
    int find(const Trace& ctx) const; // -1 when not a candidate
};

// Boolean selection over the candidate set.  Valid when the selected
// contexts form an antichain under the proper-suffix relation (no selected
// context is a proper suffix of another selected one).
struct ChromosomeS {
    std::vector<std::uint8_t> genes;
};

bool chromosome_valid_single(const CandidateSet& cs, const ChromosomeS& c);

// Longest-context-wins conflict repair: scanning from the longest contexts
// down, a selected context clears all its selected proper suffixes.
void repair_single(const CandidateSet& cs, ChromosomeS& c);

// The suffix closure of the selected contexts, as a tree.
Pst decode_single(const CandidateSet& cs, const ChromosomeS& c);

// Per-gene flip with probability `rate`; a gene flipped to true wins its
// conflicts both ways (selected proper suffixes and selected superstrings
// are cleared), so the output is always valid.
void mutate_single(const CandidateSet& cs, ChromosomeS& c, double rate, Rng& rng);

std::pair<ChromosomeS, ChromosomeS> crossover_single(const CandidateSet& cs,
                                                     const ChromosomeS& father,
                                                     const ChromosomeS& mother,
                                                     CrossoverKind kind, Rng& rng);

// BIC fitness of the decoded tree's DTMC against alpha itself:
// ln Pr_M(alpha) - mu |M| ln |alpha|.  `stats` and `cs` must have been built
// from this alpha.
double fitness_single(const Trace& alpha, const SuffixStats& stats,
                      const CandidateSet& cs, const ChromosomeS& c, double mu);

struct GaSingleParams {
    GaParams ga;        // population, threshold, selection, crossover, seed...
    int max_depth = 8;  // candidate context depth cap
};

struct GaSingleResult {
    Dtmc model;
    Pst tree;
    ChromosomeS best;
    double best_fitness = 0.0;
    std::vector<GaProgressRow> progress; // z column fixed at 0
};

struct GaSingleEvent {
    int generation = 0;
    const std::vector<ChromosomeS>* population = nullptr;
    const std::vector<double>* fitness = nullptr;
    double best_fitness = 0.0;
    int best_states = 0;
};

using GaSingleObserver = std::function<void(const GaSingleEvent&)>;

// Single-round GA (no state-budget loop): the population is seeded with the
// root-only and the all-depth-1 chromosomes plus random valid ones, then
// evolved for generation_threshold generations; the best evaluated
// chromosome decides the model.
GaSingleResult learn_ga_single(const Trace& alpha, const Alphabet& alphabet,
                               const GaSingleParams& params,
                               const GaSingleObserver& observer = {});

} // namespace mclearn
