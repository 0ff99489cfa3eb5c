#pragma once

#include <string>
#include <vector>

#include "mclearn/dtmc.hpp"

namespace mclearn {

// Probability-query properties over label sequences:
//   P=? [ F "a" ]          eventually a
//   P=? [ F<=5 {a,b} ]     eventually (a or b), within 5 steps
//   P=? [ G<=10 "ok" ]     ok holds for the first 11 observations
//   P=? [ "a" U<=3 "b" ]   a holds until b, reached within 3 steps
// A predicate is a single quoted symbol or a brace set of symbols.
struct Predicate {
    std::vector<std::string> symbols; // disjunction over state labels
};

enum class PropKind { Eventually, Globally, Until };

struct Property {
    PropKind kind = PropKind::Eventually;
    Predicate left;   // only for Until
    Predicate right;  // target of F / U, invariant of G
    bool bounded = false;
    long long bound = 0; // step bound k when bounded

    std::string text; // original query, kept for reporting
};

Property parse_property(const std::string& text);

// Exact probability of the property holding, from the initial distribution.
// Bounded operators use k-step backward iteration; unbounded ones use a
// zero-states precomputation plus value iteration (tol 1e-12).  Predicates
// that name a symbol outside the model's alphabet are an error.
double check_property(const Dtmc& d, const Property& p);

} // namespace mclearn
