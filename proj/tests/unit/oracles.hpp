#pragma once

// Deliberately naive reference implementations used as independent oracles.
// Everything here is plain tree recursion over the public accessors: no
// memoization, no sharing tricks, no reuse of the library's algorithms.
// Only usable on small formulas.

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "epscalc/strategy.hpp"
#include "epscalc/syntax.hpp"

namespace oracle {

// Free individual variable names, by the textbook recursion.
std::set<std::string> free_ind_vars(const eps::Formula& f);
std::set<std::string> free_ind_vars(const eps::Term& t);

// Capture-avoiding substitution that renames EVERY binder it passes to a
// globally fresh name (__o<k>) before descending. Always safe, never clever.
eps::Formula subst(const eps::Formula& f, const std::map<std::string, eps::Term>& s);

// An alpha-variant of f: every bound variable renamed to a fresh __a<k> name.
eps::Formula alpha_variant(const eps::Formula& f);

// Plain tree counts, no memo; explodes on large formulas by design.
struct TreeCounts {
    std::uint64_t quantifiers = 0;
    std::uint64_t epsilons = 0;
    std::uint64_t eps_depth = 0;
    std::uint64_t nodes = 0;
};
TreeCounts tree_counts(const eps::Formula& f);

// Every position in f (pre-order), and the subset addressing quantifiers.
std::vector<eps::Position> all_positions(const eps::Formula& f);
std::vector<eps::Position> quantifier_positions(const eps::Formula& f);

// The rewrite rule applied at the root of Q x. A, via the naive subst above:
// A with every free x replaced by eps x. neg^Q A.
eps::Formula contract_root(const eps::Formula& quant_formula);

// Exhaustive reachable alpha-classes and edge count, via depth-first search
// keyed on canonical printing. Returns {class_count, edge_count, nf_classes}.
struct GraphCounts {
    std::size_t classes = 0;
    std::size_t edges = 0;
    std::size_t normal_forms = 0;
};
GraphCounts reachable_classes(const eps::Formula& f, std::size_t class_bound);

}  // namespace oracle
