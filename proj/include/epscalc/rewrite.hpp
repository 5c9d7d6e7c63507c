#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "epscalc/errors.hpp"
#include "epscalc/subst.hpp"
#include "epscalc/syntax.hpp"

namespace eps {

struct RewriteError : Error {
    using Error::Error;
};

// Step0 contracts a vacuous quantifier (binder not free in the body),
// Step1 a non-vacuous one. The partition drives the termination argument:
// Step0 preserves the epsilon count, Step1 increases it.
enum class RuleKind { Step0, Step1 };

const char* to_string(RuleKind k);

struct Redex {
    Position pos;
    Quantifier q;
    IndVar binder;
    Formula body;
    RuleKind kind;   // Step0 iff binder has no free occurrence in body
    bool innermost;  // body contains no quantifier (epsilon bodies included)
};

bool same_redex(const Redex& a, const Redex& b);

// All quantifier occurrences of f, pre-order (left-to-right, outside-in),
// descending into epsilon bodies.
std::vector<Redex> find_redexes(const Formula& f);

// The redex whose quantifier node sits at pos, or nullopt if pos does not
// address a quantifier.
std::optional<Redex> redex_at(const Formula& f, const Position& pos);

// The k-th redex in the find_redexes ordering (0-based pre-order), located
// without materializing the whole list; quantifier counts steer the descent.
// Throws RewriteError if k is out of range or the count saturates.
Redex redex_by_index(const Formula& f, std::uint64_t k);

bool is_normal_form(const Formula& f);

// Contracts Q x. A at the redex position to A{x -> eps x. neg^Q A}.
// The Redex overload revalidates against f and throws RewriteError if stale.
Formula contract(const Formula& f, const Position& pos);
Formula contract(const Formula& f, const Redex& r);

// Contracts pairwise-disjoint redexes simultaneously; the empty list is the
// reflexive case. Throws RewriteError on overlapping or stale positions.
Formula parallel_step(const Formula& f, const std::vector<Position>& positions);
Formula parallel_step(const Formula& f, const std::vector<Redex>& redexes);

// The first redex in pre-order, which is the leftmost-outermost one; with
// innermost_only, the first innermost-flagged redex in pre-order, which is
// the leftmost-innermost one. Searches lazily, pruning quantifier-free
// subtrees, so it stays cheap on large shared formulas.
std::optional<Redex> pick_leftmost(const Formula& f, bool innermost_only);

// All outermost redexes (no redex strictly above them); pairwise disjoint.
std::vector<Redex> outermost_redexes(const Formula& f);

// Free occurrences of v in f, in pre-order; shadowed occurrences excluded.
std::vector<Position> free_occurrence_positions(const Formula& f, const IndVar& v);
std::uint64_t free_occurrence_count(const Formula& f, const IndVar& v);

// ---------- peak analysis ----------

// Witnesses for the local-divergence lemma on a nested peak
//   F0 = Q1 x1. G1[Q2 x2. G2]
// where the step to F1 contracts the inner redex (strictly inside the body)
// and the step to F2 contracts the root. F2 contains one residual of the
// inner redex per free occurrence of x1 in the body (inside the inserted
// epsilon terms) plus the original occurrence at the hole; F3 contracts the
// inserted residuals in parallel, F4 the remaining hole residual, and the
// same F4 is reached from F1 in one root step.
struct NestedPeak {
    Formula f0;
    Position inner_pos;           // position of the inner redex in f0
    RuleKind inner_kind;          // kind of the step f0 -> f1
    RuleKind outer_kind;          // kind of the step f0 -> f2
    Formula f1;                   // inner redex contracted
    Formula f2;                   // root redex contracted
    std::vector<Redex> copies;    // residuals contracted by the parallel step
    Formula f3;                   // parallel_step(f2, copies)
    Position hole_pos;            // residual position of the inner redex in f3
    RuleKind hole_kind;           // kind of the step f3 -> f4
    Formula f4;                   // contract(f3, hole_pos)
    RuleKind join_kind;           // kind of the step f1 -> f4 (root contraction)
    bool commutes;                // contract(f1, root) alpha-equal to f4
};

// Requires f0 to be a quantifier at the root and inner_pos to address a
// redex strictly inside its body; throws RewriteError otherwise.
NestedPeak resolve_nested_peak(const Formula& f0, const Position& inner_pos);

// Witnesses for the vacuous-peak corollary: when the step to f2 contracts a
// vacuous redex strictly above the redex of the step to f1, the peak joins
// with one step on each side: f1 -> g <- f2.
struct VacuousPeak {
    Formula f1;
    Formula f2;
    Formula g_from_f1;  // contract(f1, outer position)
    Formula g_from_f2;  // contract(f2, shifted inner position)
    bool joins;         // the two are structurally equal
};

// Requires the redex at outer_pos to be vacuous and outer_pos to be a proper
// prefix of inner_pos; throws RewriteError otherwise.
VacuousPeak resolve_vacuous_peak(const Formula& f, const Position& outer_pos,
                                 const Position& inner_pos);

}  // namespace eps
