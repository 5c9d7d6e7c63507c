#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "epscalc/errors.hpp"
#include "epscalc/syntax.hpp"

namespace eps {

// A formula-variable abstraction: lambda params. body, applied by
// simultaneous first-order replacement of the (distinct) parameters.
struct FmlAbstraction {
    std::vector<IndVar> params;
    Formula body;
};

// A simultaneous substitution mapping individual variables to terms and
// formula variables (name/arity pairs) to abstractions. Both maps are kept
// sorted so iteration and comparison are deterministic.
class Substitution {
public:
    Substitution() = default;

    static Substitution singleton(IndVar v, Term t);
    static Substitution singleton_fml(FmlVar v, FmlAbstraction a);

    // Adding an entry replaces any previous binding of the same key.
    // Throws ArityError if the abstraction's parameter count mismatches the
    // formula variable's arity or the parameters are not pairwise distinct.
    void set(IndVar v, Term t);
    void set(FmlVar v, FmlAbstraction a);

    void erase(const IndVar& v);
    void erase(const FmlVar& v);

    const Term* lookup(const IndVar& v) const;
    const FmlAbstraction* lookup(const FmlVar& v) const;

    bool empty() const { return ind_.empty() && fml_.empty(); }
    std::size_t size() const { return ind_.size() + fml_.size(); }

    const std::map<std::string, Term>& ind_entries() const { return ind_; }
    const std::map<std::pair<std::string, std::size_t>, FmlAbstraction>& fml_entries() const {
        return fml_;
    }

private:
    std::map<std::string, Term> ind_;
    std::map<std::pair<std::string, std::size_t>, FmlAbstraction> fml_;
};

// Capture-avoiding simultaneous substitution. At each binder Qx / eps x the
// substitution is restricted to the variables other than x; the binder is
// renamed (deterministically, to the lowest fresh stem+index name) only when
// some term to be inserted under it actually contains x free. Shared
// subgraphs are rewritten once per distinct (node, active substitution).
Formula apply_subst(const Formula& f, const Substitution& s);
Term apply_subst(const Term& t, const Substitution& s);

// Picks a fresh variable name not in `forbidden`, formed from the stem of
// `base` (trailing digits stripped) plus the smallest positive index that
// clears every numeric suffix already used on that stem in `forbidden`.
std::string fresh_name(const std::string& base, const std::vector<std::string>& forbidden);

}  // namespace eps
