#include "epscalc/syntax.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <unordered_map>
#include <utility>

namespace eps {

namespace {

constexpr std::uint64_t kSat = std::numeric_limits<std::uint64_t>::max();

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) {
    return a > kSat - b ? kSat : a + b;
}

// ---------- construction-time measures ----------

std::uint64_t fv_bit(const std::string& name) {
    return std::uint64_t{1} << (std::hash<std::string>{}(name) & 63);
}

// Accumulates child measures; finish() adds this node's own contribution.
struct MeasureAcc {
    Measure m{0, 0, 0, 1, 0};  // tree_nodes starts at 1 for the node itself

    void child(const Measure& c) {
        m.quantifiers = sat_add(m.quantifiers, c.quantifiers);
        m.epsilons = sat_add(m.epsilons, c.epsilons);
        m.eps_depth = std::max(m.eps_depth, c.eps_depth);
        m.tree_nodes = sat_add(m.tree_nodes, c.tree_nodes);
        m.fv_bloom |= c.fv_bloom;
    }

    void children(const std::vector<Term>& args) {
        for (const Term& a : args) child(a.measure());
    }
};

}  // namespace

const char* to_string(Quantifier q) {
    return q == Quantifier::Exists ? "exists" : "forall";
}

const char* to_string(Connective c) {
    switch (c) {
        case Connective::And: return "&";
        case Connective::Or: return "|";
        case Connective::Implies: return "->";
        case Connective::Equiv: return "<->";
    }
    return "?";
}

Term::Term(std::shared_ptr<const TermNode> node) : node_(std::move(node)) {}
Formula::Formula(std::shared_ptr<const FormulaNode> node) : node_(std::move(node)) {}

TermKind Term::kind() const {
    return static_cast<TermKind>(node_->v.index());
}
FormulaKind Formula::kind() const {
    return static_cast<FormulaKind>(node_->v.index());
}

const VarT& Term::var() const { return std::get<VarT>(node_->v); }
const FnAppT& Term::fn_app() const { return std::get<FnAppT>(node_->v); }
const EpsT& Term::eps() const { return std::get<EpsT>(node_->v); }

const FmlAppF& Formula::fml_app() const { return std::get<FmlAppF>(node_->v); }
const PredAppF& Formula::pred_app() const { return std::get<PredAppF>(node_->v); }
const NotF& Formula::not_() const { return std::get<NotF>(node_->v); }
const BinF& Formula::bin() const { return std::get<BinF>(node_->v); }
const QuantF& Formula::quant() const { return std::get<QuantF>(node_->v); }

// ---------- constructors ----------

Term mk_var(IndVar v) {
    Measure m{0, 0, 0, 1, fv_bit(v.name)};
    return Term(std::make_shared<const TermNode>(TermNode{VarT{std::move(v)}, m}));
}
Term mk_var(std::string name) {
    return mk_var(IndVar{std::move(name)});
}
Term mk_fn(std::string symbol, std::vector<Term> args) {
    MeasureAcc acc;
    acc.children(args);
    return Term(std::make_shared<const TermNode>(
        TermNode{FnAppT{std::move(symbol), std::move(args)}, acc.m}));
}
Term mk_eps(IndVar binder, Formula body) {
    MeasureAcc acc;
    acc.child(body.measure());
    acc.m.epsilons = sat_add(acc.m.epsilons, 1);
    acc.m.eps_depth = sat_add(acc.m.eps_depth, 1);
    return Term(std::make_shared<const TermNode>(
        TermNode{EpsT{std::move(binder), std::move(body)}, acc.m}));
}

Formula mk_fml(FmlVar head, std::vector<Term> args) {
    if (head.arity != args.size()) {
        throw ArityError("formula variable " + head.name + "/" + std::to_string(head.arity) +
                         " applied to " + std::to_string(args.size()) + " arguments");
    }
    MeasureAcc acc;
    acc.children(args);
    return Formula(std::make_shared<const FormulaNode>(
        FormulaNode{FmlAppF{std::move(head), std::move(args)}, acc.m}));
}
Formula mk_fml(std::string name, std::vector<Term> args) {
    FmlVar head{std::move(name), args.size()};
    return mk_fml(std::move(head), std::move(args));
}
Formula mk_pred(std::string symbol, std::vector<Term> args) {
    MeasureAcc acc;
    acc.children(args);
    return Formula(std::make_shared<const FormulaNode>(
        FormulaNode{PredAppF{std::move(symbol), std::move(args)}, acc.m}));
}
Formula mk_not(Formula f) {
    MeasureAcc acc;
    acc.child(f.measure());
    return Formula(std::make_shared<const FormulaNode>(FormulaNode{NotF{std::move(f)}, acc.m}));
}
Formula mk_bin(Connective c, Formula lhs, Formula rhs) {
    MeasureAcc acc;
    acc.child(lhs.measure());
    acc.child(rhs.measure());
    return Formula(std::make_shared<const FormulaNode>(
        FormulaNode{BinF{c, std::move(lhs), std::move(rhs)}, acc.m}));
}
Formula mk_and(Formula lhs, Formula rhs) { return mk_bin(Connective::And, std::move(lhs), std::move(rhs)); }
Formula mk_or(Formula lhs, Formula rhs) { return mk_bin(Connective::Or, std::move(lhs), std::move(rhs)); }
Formula mk_implies(Formula lhs, Formula rhs) { return mk_bin(Connective::Implies, std::move(lhs), std::move(rhs)); }
Formula mk_equiv(Formula lhs, Formula rhs) { return mk_bin(Connective::Equiv, std::move(lhs), std::move(rhs)); }
Formula mk_quant(Quantifier q, IndVar binder, Formula body) {
    MeasureAcc acc;
    acc.child(body.measure());
    acc.m.quantifiers = sat_add(acc.m.quantifiers, 1);
    return Formula(std::make_shared<const FormulaNode>(
        FormulaNode{QuantF{q, std::move(binder), std::move(body)}, acc.m}));
}
Formula mk_exists(std::string binder, Formula body) {
    return mk_quant(Quantifier::Exists, IndVar{std::move(binder)}, std::move(body));
}
Formula mk_forall(std::string binder, Formula body) {
    return mk_quant(Quantifier::Forall, IndVar{std::move(binder)}, std::move(body));
}

Formula neg_by_quantifier(Quantifier q, Formula f) {
    return q == Quantifier::Exists ? f : mk_not(std::move(f));
}

// ---------- positions ----------

Position Position::child(int i) const {
    Position p = *this;
    p.path.push_back(i);
    return p;
}

bool Position::is_prefix_of(const Position& other) const {
    if (path.size() > other.path.size()) return false;
    return std::equal(path.begin(), path.end(), other.path.begin());
}

bool Position::is_proper_prefix_of(const Position& other) const {
    return path.size() < other.path.size() && is_prefix_of(other);
}

bool Position::disjoint_with(const Position& other) const {
    return !is_prefix_of(other) && !other.is_prefix_of(*this);
}

std::string Position::to_string() const {
    std::string out = "[";
    for (std::size_t i = 0; i < path.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(path[i]);
    }
    out += ']';
    return out;
}

namespace {

[[noreturn]] void bad_position(const Position& pos, std::size_t depth, const char* why) {
    throw PositionError("invalid position " + pos.to_string() + " at depth " +
                        std::to_string(depth) + ": " + why);
}

Node child_of(const Node& n, int i, const Position& pos, std::size_t depth) {
    if (i < 0) bad_position(pos, depth, "negative index");
    const auto idx = static_cast<std::size_t>(i);
    if (std::holds_alternative<Formula>(n)) {
        const Formula& f = std::get<Formula>(n);
        switch (f.kind()) {
            case FormulaKind::FmlApp:
                if (idx < f.fml_app().args.size()) return f.fml_app().args[idx];
                break;
            case FormulaKind::PredApp:
                if (idx < f.pred_app().args.size()) return f.pred_app().args[idx];
                break;
            case FormulaKind::Not:
                if (idx == 0) return f.not_().arg;
                break;
            case FormulaKind::Bin:
                if (idx == 0) return f.bin().lhs;
                if (idx == 1) return f.bin().rhs;
                break;
            case FormulaKind::Quant:
                if (idx == 0) return f.quant().body;
                break;
        }
    } else {
        const Term& t = std::get<Term>(n);
        switch (t.kind()) {
            case TermKind::Var:
                break;
            case TermKind::FnApp:
                if (idx < t.fn_app().args.size()) return t.fn_app().args[idx];
                break;
            case TermKind::Eps:
                if (idx == 0) return t.eps().body;
                break;
        }
    }
    bad_position(pos, depth, "no child with this index");
}

Node rebuild_at(const Node& n, const Position& pos, std::size_t depth, const Node& replacement) {
    if (depth == pos.path.size()) {
        const bool want_formula = std::holds_alternative<Formula>(n);
        const bool have_formula = std::holds_alternative<Formula>(replacement);
        if (want_formula != have_formula) {
            bad_position(pos, depth, "replacement has the wrong syntactic category");
        }
        return replacement;
    }
    const int i = pos.path[depth];
    Node rebuilt_child = rebuild_at(child_of(n, i, pos, depth), pos, depth + 1, replacement);

    if (std::holds_alternative<Formula>(n)) {
        const Formula& f = std::get<Formula>(n);
        switch (f.kind()) {
            case FormulaKind::FmlApp: {
                auto args = f.fml_app().args;
                args[static_cast<std::size_t>(i)] = std::get<Term>(rebuilt_child);
                return mk_fml(f.fml_app().head, std::move(args));
            }
            case FormulaKind::PredApp: {
                auto args = f.pred_app().args;
                args[static_cast<std::size_t>(i)] = std::get<Term>(rebuilt_child);
                return mk_pred(f.pred_app().symbol, std::move(args));
            }
            case FormulaKind::Not:
                return mk_not(std::get<Formula>(rebuilt_child));
            case FormulaKind::Bin:
                return i == 0 ? mk_bin(f.bin().conn, std::get<Formula>(rebuilt_child), f.bin().rhs)
                              : mk_bin(f.bin().conn, f.bin().lhs, std::get<Formula>(rebuilt_child));
            case FormulaKind::Quant:
                return mk_quant(f.quant().q, f.quant().binder, std::get<Formula>(rebuilt_child));
        }
    } else {
        const Term& t = std::get<Term>(n);
        switch (t.kind()) {
            case TermKind::Var:
                break;
            case TermKind::FnApp: {
                auto args = t.fn_app().args;
                args[static_cast<std::size_t>(i)] = std::get<Term>(rebuilt_child);
                return mk_fn(t.fn_app().symbol, std::move(args));
            }
            case TermKind::Eps:
                return mk_eps(t.eps().binder, std::get<Formula>(rebuilt_child));
        }
    }
    bad_position(pos, depth, "no child with this index");
}

}  // namespace

Node subterm_at(const Formula& f, const Position& pos) {
    Node cur = f;
    for (std::size_t d = 0; d < pos.path.size(); ++d) {
        cur = child_of(cur, pos.path[d], pos, d);
    }
    return cur;
}

Formula replace_at(const Formula& f, const Position& pos, const Node& replacement) {
    return std::get<Formula>(rebuild_at(Node{f}, pos, 0, replacement));
}

// ---------- free variables ----------

namespace {

struct FvCache {
    std::unordered_map<const void*, std::shared_ptr<const FreeVars>> memo;
};

std::shared_ptr<const FreeVars> fv_term(const Term& t, FvCache& c);

std::shared_ptr<const FreeVars> fv_formula(const Formula& f, FvCache& c) {
    auto it = c.memo.find(f.id());
    if (it != c.memo.end()) return it->second;

    FreeVars out;
    auto merge = [&out](const FreeVars& fv) {
        out.ind.insert(fv.ind.begin(), fv.ind.end());
        out.fml.insert(fv.fml.begin(), fv.fml.end());
    };
    switch (f.kind()) {
        case FormulaKind::FmlApp:
            out.fml.insert(f.fml_app().head);
            for (const Term& a : f.fml_app().args) merge(*fv_term(a, c));
            break;
        case FormulaKind::PredApp:
            for (const Term& a : f.pred_app().args) merge(*fv_term(a, c));
            break;
        case FormulaKind::Not:
            merge(*fv_formula(f.not_().arg, c));
            break;
        case FormulaKind::Bin:
            merge(*fv_formula(f.bin().lhs, c));
            merge(*fv_formula(f.bin().rhs, c));
            break;
        case FormulaKind::Quant:
            merge(*fv_formula(f.quant().body, c));
            out.ind.erase(f.quant().binder);
            break;
    }
    auto sp = std::make_shared<const FreeVars>(std::move(out));
    c.memo.emplace(f.id(), sp);
    return sp;
}

std::shared_ptr<const FreeVars> fv_term(const Term& t, FvCache& c) {
    auto it = c.memo.find(t.id());
    if (it != c.memo.end()) return it->second;

    FreeVars out;
    switch (t.kind()) {
        case TermKind::Var:
            out.ind.insert(t.var().var);
            break;
        case TermKind::FnApp:
            for (const Term& a : t.fn_app().args) {
                const FreeVars& fv = *fv_term(a, c);
                out.ind.insert(fv.ind.begin(), fv.ind.end());
                out.fml.insert(fv.fml.begin(), fv.fml.end());
            }
            break;
        case TermKind::Eps: {
            const FreeVars& fv = *fv_formula(t.eps().body, c);
            out = fv;
            out.ind.erase(t.eps().binder);
            break;
        }
    }
    auto sp = std::make_shared<const FreeVars>(std::move(out));
    c.memo.emplace(t.id(), sp);
    return sp;
}

}  // namespace

FreeVars free_vars(const Formula& f) {
    FvCache c;
    return *fv_formula(f, c);
}
FreeVars free_vars(const Term& t) {
    FvCache c;
    return *fv_term(t, c);
}

namespace {

// Occurrence check without materializing variable sets. The fv_bloom
// fingerprint prunes subtrees that certainly lack the variable; the memo
// bounds the exact scan on shared structure.
struct FreeInCache {
    const IndVar& v;
    std::uint64_t bit;
    std::unordered_map<const void*, bool> memo;
};

bool fi_term(const Term& t, FreeInCache& c);

bool fi_formula(const Formula& f, FreeInCache& c) {
    if ((f.measure().fv_bloom & c.bit) == 0) return false;
    auto it = c.memo.find(f.id());
    if (it != c.memo.end()) return it->second;
    bool out = false;
    switch (f.kind()) {
        case FormulaKind::FmlApp:
            for (const Term& a : f.fml_app().args) {
                if (fi_term(a, c)) {
                    out = true;
                    break;
                }
            }
            break;
        case FormulaKind::PredApp:
            for (const Term& a : f.pred_app().args) {
                if (fi_term(a, c)) {
                    out = true;
                    break;
                }
            }
            break;
        case FormulaKind::Not:
            out = fi_formula(f.not_().arg, c);
            break;
        case FormulaKind::Bin:
            out = fi_formula(f.bin().lhs, c) || fi_formula(f.bin().rhs, c);
            break;
        case FormulaKind::Quant:
            out = !(f.quant().binder == c.v) && fi_formula(f.quant().body, c);
            break;
    }
    c.memo.emplace(f.id(), out);
    return out;
}

bool fi_term(const Term& t, FreeInCache& c) {
    if ((t.measure().fv_bloom & c.bit) == 0) return false;
    auto it = c.memo.find(t.id());
    if (it != c.memo.end()) return it->second;
    bool out = false;
    switch (t.kind()) {
        case TermKind::Var:
            out = t.var().var == c.v;
            break;
        case TermKind::FnApp:
            for (const Term& a : t.fn_app().args) {
                if (fi_term(a, c)) {
                    out = true;
                    break;
                }
            }
            break;
        case TermKind::Eps:
            out = !(t.eps().binder == c.v) && fi_formula(t.eps().body, c);
            break;
    }
    c.memo.emplace(t.id(), out);
    return out;
}

}  // namespace

bool free_in(const IndVar& v, const Formula& f) {
    FreeInCache c{v, fv_bit(v.name), {}};
    return fi_formula(f, c);
}
bool free_in(const IndVar& v, const Term& t) {
    FreeInCache c{v, fv_bit(v.name), {}};
    return fi_term(t, c);
}

// ---------- structural equality ----------

namespace {

bool eq_term(const Term& a, const Term& b);

bool eq_formula(const Formula& a, const Formula& b) {
    if (a.id() == b.id()) return true;
    if (a.kind() != b.kind()) return false;
    switch (a.kind()) {
        case FormulaKind::FmlApp: {
            const auto &x = a.fml_app(), &y = b.fml_app();
            if (x.head != y.head || x.args.size() != y.args.size()) return false;
            for (std::size_t i = 0; i < x.args.size(); ++i)
                if (!eq_term(x.args[i], y.args[i])) return false;
            return true;
        }
        case FormulaKind::PredApp: {
            const auto &x = a.pred_app(), &y = b.pred_app();
            if (x.symbol != y.symbol || x.args.size() != y.args.size()) return false;
            for (std::size_t i = 0; i < x.args.size(); ++i)
                if (!eq_term(x.args[i], y.args[i])) return false;
            return true;
        }
        case FormulaKind::Not:
            return eq_formula(a.not_().arg, b.not_().arg);
        case FormulaKind::Bin:
            return a.bin().conn == b.bin().conn && eq_formula(a.bin().lhs, b.bin().lhs) &&
                   eq_formula(a.bin().rhs, b.bin().rhs);
        case FormulaKind::Quant:
            return a.quant().q == b.quant().q && a.quant().binder == b.quant().binder &&
                   eq_formula(a.quant().body, b.quant().body);
    }
    return false;
}

bool eq_term(const Term& a, const Term& b) {
    if (a.id() == b.id()) return true;
    if (a.kind() != b.kind()) return false;
    switch (a.kind()) {
        case TermKind::Var:
            return a.var().var == b.var().var;
        case TermKind::FnApp: {
            const auto &x = a.fn_app(), &y = b.fn_app();
            if (x.symbol != y.symbol || x.args.size() != y.args.size()) return false;
            for (std::size_t i = 0; i < x.args.size(); ++i)
                if (!eq_term(x.args[i], y.args[i])) return false;
            return true;
        }
        case TermKind::Eps:
            return a.eps().binder == b.eps().binder && eq_formula(a.eps().body, b.eps().body);
    }
    return false;
}

}  // namespace

bool struct_eq(const Formula& a, const Formula& b) { return eq_formula(a, b); }
bool struct_eq(const Term& a, const Term& b) { return eq_term(a, b); }

// ---------- canonical renaming ----------

namespace {

// env maps in-scope bound names to their canonical replacements. The counter
// runs through the whole traversal, so alpha-equal formulas (same shape, same
// free names) produce structurally identical results.
struct CanonCtx {
    std::uint64_t counter = 0;
};

using CanonEnv = std::map<std::string, std::string>;

Term canon_term(const Term& t, const CanonEnv& env, CanonCtx& ctx);

Formula canon_formula(const Formula& f, const CanonEnv& env, CanonCtx& ctx) {
    switch (f.kind()) {
        case FormulaKind::FmlApp: {
            std::vector<Term> args;
            args.reserve(f.fml_app().args.size());
            for (const Term& a : f.fml_app().args) args.push_back(canon_term(a, env, ctx));
            return mk_fml(f.fml_app().head, std::move(args));
        }
        case FormulaKind::PredApp: {
            std::vector<Term> args;
            args.reserve(f.pred_app().args.size());
            for (const Term& a : f.pred_app().args) args.push_back(canon_term(a, env, ctx));
            return mk_pred(f.pred_app().symbol, std::move(args));
        }
        case FormulaKind::Not:
            return mk_not(canon_formula(f.not_().arg, env, ctx));
        case FormulaKind::Bin:
            return mk_bin(f.bin().conn, canon_formula(f.bin().lhs, env, ctx),
                          canon_formula(f.bin().rhs, env, ctx));
        case FormulaKind::Quant: {
            std::string cname = "#" + std::to_string(ctx.counter++);
            CanonEnv inner = env;
            inner[f.quant().binder.name] = cname;
            Formula body = canon_formula(f.quant().body, inner, ctx);
            return mk_quant(f.quant().q, IndVar{std::move(cname)}, std::move(body));
        }
    }
    throw Error("unreachable formula kind");
}

Term canon_term(const Term& t, const CanonEnv& env, CanonCtx& ctx) {
    switch (t.kind()) {
        case TermKind::Var: {
            auto it = env.find(t.var().var.name);
            return it == env.end() ? t : mk_var(it->second);
        }
        case TermKind::FnApp: {
            std::vector<Term> args;
            args.reserve(t.fn_app().args.size());
            for (const Term& a : t.fn_app().args) args.push_back(canon_term(a, env, ctx));
            return mk_fn(t.fn_app().symbol, std::move(args));
        }
        case TermKind::Eps: {
            std::string cname = "#" + std::to_string(ctx.counter++);
            CanonEnv inner = env;
            inner[t.eps().binder.name] = cname;
            Formula body = canon_formula(t.eps().body, inner, ctx);
            return mk_eps(IndVar{std::move(cname)}, std::move(body));
        }
    }
    throw Error("unreachable term kind");
}

}  // namespace

Formula canonicalize(const Formula& f) {
    CanonCtx ctx;
    return canon_formula(f, {}, ctx);
}
Term canonicalize(const Term& t) {
    CanonCtx ctx;
    return canon_term(t, {}, ctx);
}

bool alpha_eq(const Formula& a, const Formula& b) {
    if (a.id() == b.id()) return true;
    return struct_eq(canonicalize(a), canonicalize(b));
}
bool alpha_eq(const Term& a, const Term& b) {
    if (a.id() == b.id()) return true;
    return struct_eq(canonicalize(a), canonicalize(b));
}

// ---------- serialization key ----------

namespace {

void key_term(const Term& t, std::string& out);

void key_formula(const Formula& f, std::string& out) {
    switch (f.kind()) {
        case FormulaKind::FmlApp:
            out += 'A';
            out += f.fml_app().head.name;
            out += '/';
            out += std::to_string(f.fml_app().head.arity);
            out += '(';
            for (const Term& a : f.fml_app().args) {
                key_term(a, out);
                out += ',';
            }
            out += ')';
            break;
        case FormulaKind::PredApp:
            out += 'P';
            out += f.pred_app().symbol;
            out += '(';
            for (const Term& a : f.pred_app().args) {
                key_term(a, out);
                out += ',';
            }
            out += ')';
            break;
        case FormulaKind::Not:
            out += '!';
            key_formula(f.not_().arg, out);
            break;
        case FormulaKind::Bin:
            out += 'B';
            out += std::to_string(static_cast<int>(f.bin().conn));
            out += '(';
            key_formula(f.bin().lhs, out);
            out += ',';
            key_formula(f.bin().rhs, out);
            out += ')';
            break;
        case FormulaKind::Quant:
            out += f.quant().q == Quantifier::Exists ? 'E' : 'U';
            out += f.quant().binder.name;
            out += '.';
            key_formula(f.quant().body, out);
            break;
    }
}

void key_term(const Term& t, std::string& out) {
    switch (t.kind()) {
        case TermKind::Var:
            out += 'v';
            out += t.var().var.name;
            out += ';';
            break;
        case TermKind::FnApp:
            out += 'f';
            out += t.fn_app().symbol;
            out += '(';
            for (const Term& a : t.fn_app().args) {
                key_term(a, out);
                out += ',';
            }
            out += ')';
            break;
        case TermKind::Eps:
            out += 'e';
            out += t.eps().binder.name;
            out += '.';
            key_formula(t.eps().body, out);
            break;
    }
}

}  // namespace

std::string struct_key(const Formula& f) {
    std::string out;
    key_formula(f, out);
    return out;
}

// ---------- counting ----------

std::uint64_t count_quantifiers(const Formula& f) { return f.measure().quantifiers; }
std::uint64_t count_quantifiers(const Term& t) { return t.measure().quantifiers; }
std::uint64_t count_epsilons(const Formula& f) { return f.measure().epsilons; }
std::uint64_t count_epsilons(const Term& t) { return t.measure().epsilons; }
std::uint64_t node_count(const Formula& f) { return f.measure().tree_nodes; }
std::uint64_t node_count(const Term& t) { return t.measure().tree_nodes; }
std::uint64_t eps_nesting_depth(const Formula& f) { return f.measure().eps_depth; }
std::uint64_t eps_nesting_depth(const Term& t) { return t.measure().eps_depth; }
bool has_quantifier(const Formula& f) { return f.measure().quantifiers > 0; }
bool has_quantifier(const Term& t) { return t.measure().quantifiers > 0; }

}  // namespace eps
