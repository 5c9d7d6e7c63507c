#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "epscalc/ars.hpp"
#include "epscalc/errors.hpp"
#include "epscalc/rewrite.hpp"
#include "epscalc/syntax.hpp"

namespace eps {

// Raised when a normalization exceeds its step or node fuse. The rewrite
// system is terminating, so hitting a fuse on a faithful run signals either
// a fuse set below the (possibly exponential) derivation length or a bug.
struct FuseExceeded : Error {
    using Error::Error;
};

// Raised when a reduction-graph exploration exceeds its node budget.
struct BoundExceeded : Error {
    using Error::Error;
};

// splitmix64 (Steele et al.); fixed algorithm so seeded runs are identical
// across platforms.
struct SplitMix64 {
    std::uint64_t state = 0;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform value in [0, bound) by rejection sampling; bound > 0.
    std::uint64_t below(std::uint64_t bound);

    // Uniform double in [0, 1) with 53 random bits.
    double next_double();
};

struct Strategy {
    enum class Tag { LeftmostInnermost, LeftmostOutermost, Random, ParallelOutermost };

    Tag tag = Tag::LeftmostInnermost;
    std::uint64_t seed = 0;  // used by Random only

    static Strategy innermost() { return {Tag::LeftmostInnermost, 0}; }
    static Strategy outermost() { return {Tag::LeftmostOutermost, 0}; }
    static Strategy random(std::uint64_t seed) { return {Tag::Random, seed}; }
    static Strategy parallel_outermost() { return {Tag::ParallelOutermost, 0}; }
};

const char* to_string(Strategy::Tag tag);

// One derivation step: a single contraction for the sequential strategies, a
// simultaneous contraction of the listed (pairwise disjoint) redexes for
// ParallelOutermost.
struct StepRecord {
    std::vector<Redex> redexes;
    Formula after;
};

struct DerivationTrace {
    Formula start;
    std::vector<StepRecord> steps;  // empty when step recording is disabled
    Formula final;
    std::uint64_t step_count = 0;
    std::uint64_t max_eps_depth = 0;
    std::uint64_t max_eps_count = 0;
};

struct NormalizeOptions {
    std::uint64_t max_steps = 10000;
    std::uint64_t max_nodes = 1000000;  // tree-node fuse on every intermediate formula
    bool record_steps = true;
};

// Rewrites to the unique normal form under the given strategy. Throws
// FuseExceeded when a fuse trips.
DerivationTrace normalize(const Formula& f, const Strategy& s,
                          const NormalizeOptions& opts = {});

// Like normalize but stops quietly at the fuses: reached tells whether
// `final` is a normal form. Used to certify lower bounds on derivation
// lengths that are too long to run to the end.
struct PartialRun {
    Formula start;
    std::vector<StepRecord> steps;
    Formula final;
    std::uint64_t step_count = 0;
    std::uint64_t max_eps_depth = 0;
    std::uint64_t max_eps_count = 0;
    bool reached_normal_form = false;
};

PartialRun run_steps(const Formula& f, const Strategy& s, const NormalizeOptions& opts = {});

// ---------- reduction graphs ----------

// The complete reduction graph of f modulo alpha-equivalence: nodes are
// canonical-form classes (first-seen representative kept), edges are single
// contractions labeled with the acting redex. Throws BoundExceeded when
// more than node_bound distinct classes appear.
struct ReductionGraph {
    struct Edge {
        std::size_t from = 0;
        std::size_t to = 0;
        RuleKind kind = RuleKind::Step0;
        Redex redex;  // redex in the representative formula of `from`
    };

    std::vector<Formula> nodes;  // representative formulas; index 0 = start
    std::vector<std::string> keys;  // canonical structural keys, parallel to nodes
    std::vector<Edge> edges;
    std::vector<std::vector<std::size_t>> out_edges;  // node -> edge indices
    std::vector<std::size_t> normal_forms;  // nodes with no outgoing edge
    bool acyclic = false;
    std::uint64_t shortest_path = 0;   // min steps start -> a normal form
    std::uint64_t longest_path = 0;    // max steps start -> a normal form
    std::uint64_t maximal_path_count = 0;  // number of maximal paths, saturating
};

ReductionGraph all_derivations_graph(const Formula& f, std::uint64_t node_bound);

// The graph as a finite abstract reduction system: nodes become carrier ids
// (same indices), vacuous contractions populate r0 and proper ones r1 — the
// step partition the well-foundedness checker expects. Printable/parsable
// via print_ars / parse_ars.
FiniteARS to_finite_ars(const ReductionGraph& graph);

// Reconstructs every maximal derivation of the graph as a concrete trace,
// re-contracting along each path. Throws BoundExceeded when the graph has
// more than max_traces maximal paths.
std::vector<DerivationTrace> all_derivations(const ReductionGraph& graph,
                                             std::uint64_t max_traces);
std::vector<DerivationTrace> all_derivations(const Formula& f, std::uint64_t node_bound,
                                             std::uint64_t max_traces);

// ---------- derivation-length statistics ----------

using FormulaGenerator = std::function<Formula(std::size_t)>;

// The duplicating blow-up family: exists x1. ... exists xn. R(x1,...,xn).
// Non-right-linearity of the rule duplicates the remaining quantifiers at
// every outermost step, so outermost derivations explode while innermost
// ones take exactly n steps.
Formula nested_exists_family(std::size_t n);

struct LengthStatsRow {
    std::size_t n = 0;
    Strategy::Tag strategy = Strategy::Tag::LeftmostInnermost;
    std::uint64_t steps = 0;
    std::uint64_t eps_depth = 0;  // of the final formula of the run
    bool completed = false;  // false: fuse stopped the run, steps is a lower bound
};

// Runs LeftmostInnermost and LeftmostOutermost on family(n) for each
// n <= max_n. Rows whose run hit the step fuse report the steps taken so
// far with completed = false (the true length strictly exceeds it).
std::vector<LengthStatsRow> derivation_length_stats(const FormulaGenerator& family,
                                                    std::size_t max_n,
                                                    const NormalizeOptions& opts = {});

}  // namespace eps
