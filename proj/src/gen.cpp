#include "epscalc/gen.hpp"

#include <algorithm>
#include <set>
#include <string>
#include <utility>

#include "epscalc/subst.hpp"

namespace eps {

namespace {

// Fixed symbol menu with one arity per symbol, so every corpus re-parses
// under the shared arity table of parse_corpus.
struct SymbolMenu {
    std::vector<std::pair<std::string, std::size_t>> preds, fns, fmls;

    explicit SymbolMenu(std::size_t max_arity) {
        auto clamp = [&](std::size_t a) { return std::min(a, max_arity); };
        preds = {{"p", clamp(1)}, {"q", clamp(2)}, {"r", clamp(3)}, {"s", 0}};
        fns = {{"f", clamp(1)}, {"g", clamp(2)}, {"c", 0}};
        fmls = {{"A", 0}, {"B", clamp(1)}};
    }
};

struct Gen {
    SplitMix64 rng;
    const GenOptions& opts;
    SymbolMenu menu;
    std::size_t quant_left;
    std::vector<std::string> scope;

    Gen(std::uint64_t seed, const GenOptions& options)
        : rng(seed), opts(options), menu(options.max_arity),
          quant_left(options.max_quantifiers) {}

    bool chance(double p) { return rng.next_double() < p; }

    std::string binder_candidate() {
        static const char* pool[] = {"x", "y", "z", "u", "v", "w", "x1", "y1"};
        return pool[rng.below(8)];
    }

    Term scope_var() {
        if (scope.empty()) return mk_var(chance(0.5) ? "a" : "b");
        return mk_var(scope[rng.below(scope.size())]);
    }

    Term gen_term(std::size_t size, std::size_t depth) {
        if (size >= 3 && depth < opts.max_quant_depth && chance(opts.eps_prob)) {
            std::string binder = binder_candidate();
            scope.push_back(binder);
            Formula body = gen_formula(size - 1, depth + 1);
            scope.pop_back();
            if (!free_in(IndVar{binder}, body)) {
                body = mk_and(std::move(body), mk_pred("p", {mk_var(binder)}));
            }
            return mk_eps(IndVar{binder}, std::move(body));
        }
        if (size >= 2 && chance(0.35)) {
            const auto& [symbol, arity] = menu.fns[rng.below(menu.fns.size())];
            std::vector<Term> args;
            args.reserve(arity);
            for (std::size_t i = 0; i < arity; ++i) args.push_back(gen_term(1, depth));
            return mk_fn(symbol, std::move(args));
        }
        return scope_var();
    }

    std::vector<Term> gen_args(std::size_t arity, std::size_t depth) {
        std::vector<Term> args;
        args.reserve(arity);
        for (std::size_t i = 0; i < arity; ++i) {
            args.push_back(gen_term(1 + rng.below(3), depth));
        }
        return args;
    }

    Formula gen_atom(std::size_t depth) {
        if (chance(0.12)) {
            const auto& [name, arity] = menu.fmls[rng.below(menu.fmls.size())];
            return mk_fml(name, gen_args(arity, depth));
        }
        const auto& [symbol, arity] = menu.preds[rng.below(menu.preds.size())];
        return mk_pred(symbol, gen_args(arity, depth));
    }

    Formula gen_formula(std::size_t size, std::size_t depth) {
        if (size >= 2 && quant_left > 0 && depth < opts.max_quant_depth &&
            chance(opts.quant_prob)) {
            --quant_left;
            Quantifier q = chance(0.5) ? Quantifier::Exists : Quantifier::Forall;
            if (chance(opts.vacuous_prob)) {
                // Vacuous: pick the binder after the body, avoiding its free
                // variables.
                Formula body = gen_formula(size - 1, depth + 1);
                std::vector<std::string> forbidden;
                for (const auto& v : free_vars(body).ind) forbidden.push_back(v.name);
                std::string binder = binder_candidate();
                if (std::find(forbidden.begin(), forbidden.end(), binder) !=
                    forbidden.end()) {
                    binder = fresh_name(binder, forbidden);
                }
                return mk_quant(q, IndVar{std::move(binder)}, std::move(body));
            }
            std::string binder = binder_candidate();
            scope.push_back(binder);
            Formula body = gen_formula(size - 1, depth + 1);
            scope.pop_back();
            if (!free_in(IndVar{binder}, body)) {
                body = mk_and(std::move(body), mk_pred("p", {mk_var(binder)}));
            }
            return mk_quant(q, IndVar{std::move(binder)}, std::move(body));
        }
        if (size >= 3 && chance(0.5)) {
            static const Connective conns[] = {Connective::And, Connective::Or,
                                               Connective::Implies, Connective::Equiv};
            Connective c = conns[rng.below(4)];
            std::size_t left = 1 + rng.below(size - 2);
            Formula lhs = gen_formula(left, depth);
            Formula rhs = gen_formula(size - 1 - left, depth);
            return mk_bin(c, std::move(lhs), std::move(rhs));
        }
        if (size >= 2 && chance(0.25)) return mk_not(gen_formula(size - 1, depth));
        return gen_atom(depth);
    }
};

}  // namespace

Formula gen_formula(std::uint64_t seed, const GenOptions& opts) {
    Gen gen(seed, opts);
    return gen.gen_formula(std::max<std::size_t>(opts.size, 1), 0);
}

std::vector<Formula> gen_corpus(std::uint64_t seed, std::size_t count,
                                const GenOptions& opts) {
    std::vector<Formula> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(gen_formula(seed + i, opts));
    return out;
}

}  // namespace eps
