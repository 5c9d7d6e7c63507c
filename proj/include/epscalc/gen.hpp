#pragma once

#include <cstdint>
#include <vector>

#include "epscalc/strategy.hpp"
#include "epscalc/syntax.hpp"

namespace eps {

// Random formula generator: the reproducible fuzz corpus for the property
// suites. All randomness comes from one SplitMix64 stream per formula, so
// (seed, options) determine every formula bit-for-bit.
struct GenOptions {
    std::size_t size = 12;          // approximate connective/binder budget
    double quant_prob = 0.4;        // chance of a quantifier at a formula node
    double vacuous_prob = 0.2;      // chance a binder ignores its body variables
    std::size_t max_quantifiers = 8;   // hard cap on total quantifiers
    // Nesting cap. Outermost-strategy derivation lengths grow doubly
    // exponentially in the nesting depth of non-vacuous quantifiers, so the
    // default keeps chains short enough that every strategy normalizes a
    // corpus formula in well under a thousand steps.
    std::size_t max_quant_depth = 3;
    std::size_t max_arity = 3;      // predicate/function arity bound
    double eps_prob = 0.15;         // chance of an eps binder at a term node
};

Formula gen_formula(std::uint64_t seed, const GenOptions& opts = {});

// The corpus: formulas gen_formula(seed + i, opts) for i in [0, count).
std::vector<Formula> gen_corpus(std::uint64_t seed, std::size_t count,
                                const GenOptions& opts = {});

}  // namespace eps
