#pragma once

#include <compare>
#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "epscalc/errors.hpp"

// Abstract syntax for a first-order language with Hilbert's epsilon operator.
//
// Terms and formulas are immutable values backed by shared nodes, so copies
// are cheap and substitution results share structure with their inputs.
// Equality of interest is alpha-equivalence; see alpha_eq / canonicalize.

namespace eps {

// Individual variable. One flat namespace; identity is the name.
struct IndVar {
    std::string name;

    friend bool operator==(const IndVar&, const IndVar&) = default;
    friend auto operator<=>(const IndVar&, const IndVar&) = default;
};

// Formula variable. Name and arity together are the identity, so A/0 and A/1
// are distinct variables.
struct FmlVar {
    std::string name;
    std::size_t arity = 0;

    friend bool operator==(const FmlVar&, const FmlVar&) = default;
    friend auto operator<=>(const FmlVar&, const FmlVar&) = default;
};

enum class Quantifier { Exists, Forall };
enum class Connective { And, Or, Implies, Equiv };

const char* to_string(Quantifier q);
const char* to_string(Connective c);

class Formula;
class Term;

struct TermNode;
struct FormulaNode;

// Sizes and a free-variable fingerprint, computed once when a node is built,
// so the queries below are O(1) even on heavily shared substitution results.
// Counts are per tree occurrence (shared subterms count every time they
// appear) and saturate at uint64 max instead of wrapping; normal forms of
// quantifier chains overflow 64 bits from about n = 7 on.
struct Measure {
    std::uint64_t quantifiers = 0;
    std::uint64_t epsilons = 0;
    std::uint64_t eps_depth = 0;   // max eps nodes on any root-to-leaf path
    std::uint64_t tree_nodes = 0;  // formula and term nodes, occurrences
    // Superset fingerprint of the free individual variables: a set bit per
    // name hash. Binders do not clear bits (clearing could break the superset
    // guarantee under hash collisions), so a clear bit proves absence while a
    // set bit proves nothing.
    std::uint64_t fv_bloom = 0;
};

enum class TermKind { Var, FnApp, Eps };
enum class FormulaKind { FmlApp, PredApp, Not, Bin, Quant };

struct VarT;
struct FnAppT;
struct EpsT;
struct FmlAppF;
struct PredAppF;
struct NotF;
struct BinF;
struct QuantF;

class Term {
  public:
    explicit Term(std::shared_ptr<const TermNode> node);

    TermKind kind() const;
    const VarT& var() const;
    const FnAppT& fn_app() const;
    const EpsT& eps() const;

    const TermNode& node() const { return *node_; }
    const Measure& measure() const;
    // Stable identity of the underlying shared node; used as a cache key.
    const void* id() const { return node_.get(); }

  private:
    std::shared_ptr<const TermNode> node_;
};

class Formula {
  public:
    explicit Formula(std::shared_ptr<const FormulaNode> node);

    FormulaKind kind() const;
    const FmlAppF& fml_app() const;
    const PredAppF& pred_app() const;
    const NotF& not_() const;
    const BinF& bin() const;
    const QuantF& quant() const;

    const FormulaNode& node() const { return *node_; }
    const Measure& measure() const;
    const void* id() const { return node_.get(); }

  private:
    std::shared_ptr<const FormulaNode> node_;
};

struct VarT {
    IndVar var;
};
struct FnAppT {
    std::string symbol;
    std::vector<Term> args;
};
struct EpsT {
    IndVar binder;
    Formula body;
};
struct TermNode {
    std::variant<VarT, FnAppT, EpsT> v;
    Measure m;
};

struct FmlAppF {
    FmlVar head;
    std::vector<Term> args;  // size == head.arity
};
struct PredAppF {
    std::string symbol;
    std::vector<Term> args;
};
struct NotF {
    Formula arg;
};
struct BinF {
    Connective conn;
    Formula lhs;
    Formula rhs;
};
struct QuantF {
    Quantifier q;
    IndVar binder;
    Formula body;
};
struct FormulaNode {
    std::variant<FmlAppF, PredAppF, NotF, BinF, QuantF> v;
    Measure m;
};

inline const Measure& Term::measure() const { return node_->m; }
inline const Measure& Formula::measure() const { return node_->m; }

// ---------- constructors ----------

Term mk_var(IndVar v);
Term mk_var(std::string name);
Term mk_fn(std::string symbol, std::vector<Term> args);
Term mk_eps(IndVar binder, Formula body);

Formula mk_fml(FmlVar head, std::vector<Term> args);  // ArityError on size mismatch
Formula mk_fml(std::string name, std::vector<Term> args = {});
Formula mk_pred(std::string symbol, std::vector<Term> args = {});
Formula mk_not(Formula f);
Formula mk_bin(Connective c, Formula lhs, Formula rhs);
Formula mk_and(Formula lhs, Formula rhs);
Formula mk_or(Formula lhs, Formula rhs);
Formula mk_implies(Formula lhs, Formula rhs);
Formula mk_equiv(Formula lhs, Formula rhs);
Formula mk_quant(Quantifier q, IndVar binder, Formula body);
Formula mk_exists(std::string binder, Formula body);
Formula mk_forall(std::string binder, Formula body);

// neg^Q: identity for Exists, negation for Forall. This is the polarity
// adjustment used when a quantifier is eliminated in favour of an eps term.
Formula neg_by_quantifier(Quantifier q, Formula f);

// ---------- positions ----------

// Path of child indices from the root. A quantifier or eps body is child 0,
// negation's argument is child 0, binary connectives have children 0 and 1,
// application arguments are children 0..n-1.
struct Position {
    std::vector<int> path;

    static Position root() { return Position{}; }
    Position child(int i) const;
    std::size_t depth() const { return path.size(); }

    bool is_prefix_of(const Position& other) const;         // reflexive
    bool is_proper_prefix_of(const Position& other) const;  // strict
    bool disjoint_with(const Position& other) const;        // neither contains the other

    std::string to_string() const;  // "[]", "[0]", "[0,1]"

    friend bool operator==(const Position&, const Position&) = default;
    friend auto operator<=>(const Position&, const Position&) = default;
};

// A subtree handle: positions can land on a formula or on a term.
using Node = std::variant<Formula, Term>;

// Throws PositionError if the path does not exist.
Node subterm_at(const Formula& f, const Position& pos);

// Grafts `replacement` at `pos`, rebuilding the spine. No capture avoidance:
// free variables of the replacement are bound by whatever binders enclose the
// position. Throws PositionError on a bad path or on a formula/term category
// mismatch.
Formula replace_at(const Formula& f, const Position& pos, const Node& replacement);

// ---------- structural operations ----------

struct FreeVars {
    std::set<IndVar> ind;
    std::set<FmlVar> fml;
};

FreeVars free_vars(const Formula& f);
FreeVars free_vars(const Term& t);

bool free_in(const IndVar& v, const Formula& f);
bool free_in(const IndVar& v, const Term& t);

// Structural (not alpha) equality. Pointer-equal nodes compare equal fast.
bool struct_eq(const Formula& a, const Formula& b);
bool struct_eq(const Term& a, const Term& b);

// Renames every bound variable to "#k", k assigned in pre-order traversal
// order. The '#' namespace is unreachable from the parser, so canonical names
// never collide with user names and free variables pass through unchanged.
// Idempotent; canonicalize(f) and canonicalize(g) are structurally equal
// exactly when f and g are alpha-equivalent.
Formula canonicalize(const Formula& f);
Term canonicalize(const Term& t);

bool alpha_eq(const Formula& a, const Formula& b);
bool alpha_eq(const Term& a, const Term& b);

// Deterministic structural serialization. struct_key(canonicalize(f)) is an
// alpha-invariant key suitable for hashing reduction-graph nodes.
std::string struct_key(const Formula& f);

// O(1) reads of the construction-time measures; see Measure for the counting
// conventions (tree occurrences, saturating arithmetic).
std::uint64_t count_quantifiers(const Formula& f);
std::uint64_t count_quantifiers(const Term& t);
std::uint64_t count_epsilons(const Formula& f);
std::uint64_t count_epsilons(const Term& t);
std::uint64_t node_count(const Formula& f);
std::uint64_t node_count(const Term& t);

// Maximum number of eps nodes on any root-to-leaf path.
std::uint64_t eps_nesting_depth(const Formula& f);
std::uint64_t eps_nesting_depth(const Term& t);

bool has_quantifier(const Formula& f);
bool has_quantifier(const Term& t);

}  // namespace eps
