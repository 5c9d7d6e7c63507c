#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "epscalc/errors.hpp"

namespace eps {

struct ArsError : Error {
    using Error::Error;
};

// Raised by checkers when (a, a') violate the theorem's preconditions:
// "not-in-domain" (a has no outgoing step), "not-reachable", or
// "not-a-normal-form" for a'.
struct ArsValidationError : ArsError {
    using ArsError::ArsError;
};

using ArsEdge = std::pair<int, int>;

// A finite abstract reduction system with the two edge sets of the
// generalized Klop theorem. Nodes are 0..carrier_size-1.
struct FiniteARS {
    int carrier_size = 0;
    std::set<ArsEdge> r0;
    std::set<ArsEdge> r1;

    void validate() const;  // throws ArsError on out-of-range edges
};

// Least set containing a and closed under r0 and r1 (reachability via the
// reflexive-transitive closure of r0 | r1). Throws ArsError for unknown a.
std::set<int> reachable_set(const FiniteARS& sys, int a);

// Well-foundedness of rel on the finite domain: every nonempty subset has a
// rel-minimal element, which for finite relations is acyclicity of rel
// restricted to domain.
bool is_well_founded(const std::set<ArsEdge>& rel, const std::set<int>& domain);

struct ArsPeak {
    int center = 0;
    int left = 0;   // center ->4 left
    int right = 0;  // center ->1 right (cond3) or center ->0 right (cond4)
};

// Evaluation of the four hypotheses and the conclusion of the generalized
// Klop theorem over A = reachable_set(sys, a), with ->2 = ->0* o ->1,
// ->3 = ->0 | ->1, ->4 = ->3 domain-restricted to A:
//   cond1: the reverse of ->0 range-restricted to A is well-founded.
//   cond2: the lengths of ->2-derivations from a whose endpoint ->0*-reaches
//          a' are bounded; bound2 reports the exact maximum.
//   cond3: every peak b1 <-4 c ->1 b2 satisfies b1 ->4* d <-4* b2.
//   cond4: every peak b1 <-4 c ->0 b2 satisfies b1 ->4* d <-4= b2.
//   conclusion_well_founded: the reverse of ->4 is well-founded.
// If all four conditions hold, the theorem forces the conclusion.
struct TheoremReport {
    bool cond1 = false;
    bool cond2 = false;
    std::uint64_t bound2 = 0;  // meaningful when cond2 holds
    bool cond3 = false;
    bool cond4 = false;
    bool conclusion_well_founded = false;

    // Diagnostics: a cycle witnessing a failed cond1/cond2/conclusion, or an
    // unjoinable peak witnessing a failed cond3/cond4.
    std::optional<std::vector<int>> cycle;
    std::optional<ArsPeak> bad_peak;

    bool conditions_hold() const { return cond1 && cond2 && cond3 && cond4; }
};

// Validates that a is in DOM(->3), that a_prime is reachable from a, and
// that a_prime is a ->3-normal form (ArsValidationError otherwise), then
// evaluates the report by exhaustive enumeration.
TheoremReport check_klop_theorem(const FiniteARS& sys, int a, int a_prime);

// A system found by the necessity search: it satisfies exactly the
// conditions flagged true for the recorded (a, a_prime) pair, yet its <-4
// is not well-founded, demonstrating that the missing hypotheses matter.
struct NecessityWitness {
    FiniteARS sys;
    int a = 0;
    int a_prime = 0;
    std::array<bool, 4> conditions{};
};

// Searches systems up to max_nodes nodes (exhaustively for <= 3, seeded
// random sampling above) for witnesses that proper subsets of the four
// hypotheses do not imply the conclusion. Returns at most one witness per
// proper subset. Throws std::invalid_argument for max_nodes > 6 (search
// budget) and ArsError if a system satisfying all four conditions with a
// false conclusion is ever encountered (that would falsify the theorem).
std::vector<NecessityWitness> search_hypothesis_necessity(std::size_t max_nodes);

}  // namespace eps
