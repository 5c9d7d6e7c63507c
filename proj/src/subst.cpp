#include "epscalc/subst.hpp"

#include <algorithm>
#include <limits>
#include <memory>
#include <set>
#include <unordered_map>

namespace eps {

// ---------- Substitution ----------

Substitution Substitution::singleton(IndVar v, Term t) {
    Substitution s;
    s.set(std::move(v), std::move(t));
    return s;
}

Substitution Substitution::singleton_fml(FmlVar v, FmlAbstraction a) {
    Substitution s;
    s.set(std::move(v), std::move(a));
    return s;
}

void Substitution::set(IndVar v, Term t) {
    ind_.insert_or_assign(std::move(v.name), std::move(t));
}

void Substitution::set(FmlVar v, FmlAbstraction a) {
    if (a.params.size() != v.arity) {
        throw ArityError("abstraction for " + v.name + "/" + std::to_string(v.arity) + " has " +
                         std::to_string(a.params.size()) + " parameters");
    }
    std::set<std::string> seen;
    for (const IndVar& p : a.params) {
        if (!seen.insert(p.name).second) {
            throw ArityError("abstraction for " + v.name + " repeats parameter " + p.name);
        }
    }
    fml_.insert_or_assign({std::move(v.name), v.arity}, std::move(a));
}

void Substitution::erase(const IndVar& v) { ind_.erase(v.name); }
void Substitution::erase(const FmlVar& v) { fml_.erase({v.name, v.arity}); }

const Term* Substitution::lookup(const IndVar& v) const {
    auto it = ind_.find(v.name);
    return it == ind_.end() ? nullptr : &it->second;
}

const FmlAbstraction* Substitution::lookup(const FmlVar& v) const {
    auto it = fml_.find({v.name, v.arity});
    return it == fml_.end() ? nullptr : &it->second;
}

// ---------- fresh names ----------

std::string fresh_name(const std::string& base, const std::vector<std::string>& forbidden) {
    std::size_t stem_len = base.size();
    while (stem_len > 0 && base[stem_len - 1] >= '0' && base[stem_len - 1] <= '9') --stem_len;
    std::string stem = base.substr(0, stem_len);
    if (stem.empty()) stem = "v";

    std::uint64_t max_used = 0;
    for (const std::string& name : forbidden) {
        if (name.size() <= stem.size() || name.compare(0, stem.size(), stem) != 0) continue;
        std::uint64_t suffix = 0;
        bool numeric = true;
        for (std::size_t i = stem.size(); i < name.size(); ++i) {
            char ch = name[i];
            if (ch < '0' || ch > '9') {
                numeric = false;
                break;
            }
            std::uint64_t digit = static_cast<std::uint64_t>(ch - '0');
            if (suffix > (std::numeric_limits<std::uint64_t>::max() - digit) / 10) {
                suffix = std::numeric_limits<std::uint64_t>::max();
            } else {
                suffix = suffix * 10 + digit;
            }
        }
        if (numeric) max_used = std::max(max_used, suffix);
    }
    return stem + std::to_string(max_used + 1);
}

// ---------- capture-avoiding application ----------

namespace {

struct FvCache {
    std::unordered_map<const void*, std::shared_ptr<const FreeVars>> memo;
};

std::shared_ptr<const FreeVars> fv_of(const Term& t, FvCache& c);

std::shared_ptr<const FreeVars> fv_of(const Formula& f, FvCache& c) {
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
            for (const Term& a : f.fml_app().args) merge(*fv_of(a, c));
            break;
        case FormulaKind::PredApp:
            for (const Term& a : f.pred_app().args) merge(*fv_of(a, c));
            break;
        case FormulaKind::Not:
            merge(*fv_of(f.not_().arg, c));
            break;
        case FormulaKind::Bin:
            merge(*fv_of(f.bin().lhs, c));
            merge(*fv_of(f.bin().rhs, c));
            break;
        case FormulaKind::Quant:
            merge(*fv_of(f.quant().body, c));
            out.ind.erase(f.quant().binder);
            break;
    }
    auto sp = std::make_shared<const FreeVars>(std::move(out));
    c.memo.emplace(f.id(), sp);
    return sp;
}

std::shared_ptr<const FreeVars> fv_of(const Term& t, FvCache& c) {
    auto it = c.memo.find(t.id());
    if (it != c.memo.end()) return it->second;

    FreeVars out;
    switch (t.kind()) {
        case TermKind::Var:
            out.ind.insert(t.var().var);
            break;
        case TermKind::FnApp:
            for (const Term& a : t.fn_app().args) {
                const FreeVars& fv = *fv_of(a, c);
                out.ind.insert(fv.ind.begin(), fv.ind.end());
                out.fml.insert(fv.fml.begin(), fv.fml.end());
            }
            break;
        case TermKind::Eps: {
            out = *fv_of(t.eps().body, c);
            out.ind.erase(t.eps().binder);
            break;
        }
    }
    auto sp = std::make_shared<const FreeVars>(std::move(out));
    c.memo.emplace(t.id(), sp);
    return sp;
}

// One rewriting pass shares a free-variable cache across every active
// substitution; result memo tables are per active substitution because the
// substitution narrows (and may grow a renaming) at binders.
struct Memo {
    std::unordered_map<const void*, Formula> formulas;
    std::unordered_map<const void*, Term> terms;
};

struct Ctx {
    FvCache fv;
};

bool touches(const Substitution& s, const FreeVars& fv) {
    for (const auto& [name, term] : s.ind_entries()) {
        (void)term;
        if (fv.ind.count(IndVar{name})) return true;
    }
    for (const auto& [key, abs] : s.fml_entries()) {
        (void)abs;
        if (fv.fml.count(FmlVar{key.first, key.second})) return true;
    }
    return false;
}

Term go(const Term& t, const Substitution& s, const std::shared_ptr<Memo>& memo, Ctx& ctx);
Formula go(const Formula& f, const Substitution& s, const std::shared_ptr<Memo>& memo, Ctx& ctx);

// Handles a binder shared by Quant formulas and Eps terms: narrows the
// substitution, decides whether the binder must be renamed to dodge capture,
// and rewrites the body under the adjusted substitution. Returns the body
// plus the (possibly renamed) binder through out-parameters.
struct BinderResult {
    IndVar binder;
    Formula body;
    bool unchanged;  // body identical and binder kept: caller may reuse the node
};

BinderResult go_binder(const IndVar& binder, const Formula& body, const Substitution& s,
                       const std::shared_ptr<Memo>& memo, Ctx& ctx) {
    const FreeVars& body_fv = *fv_of(body, ctx.fv);
    const bool binder_in_dom = s.lookup(binder) != nullptr;

    // Collect the entries (other than the binder's own) that will actually be
    // inserted somewhere under this binder; only their free variables can
    // collide with the binder.
    bool risk = false;
    std::vector<std::string> forbidden;
    for (const IndVar& v : body_fv.ind) forbidden.push_back(v.name);
    for (const auto& [name, term] : s.ind_entries()) {
        if (name == binder.name) continue;
        forbidden.push_back(name);
        if (!body_fv.ind.count(IndVar{name})) continue;
        const FreeVars& rhs = *fv_of(term, ctx.fv);
        if (rhs.ind.count(binder)) risk = true;
        for (const IndVar& v : rhs.ind) forbidden.push_back(v.name);
    }
    for (const auto& [key, abs] : s.fml_entries()) {
        if (!body_fv.fml.count(FmlVar{key.first, key.second})) continue;
        FreeVars rhs = *fv_of(abs.body, ctx.fv);
        for (const IndVar& p : abs.params) rhs.ind.erase(p);
        if (rhs.ind.count(binder)) risk = true;
        for (const IndVar& v : rhs.ind) forbidden.push_back(v.name);
    }

    if (!binder_in_dom && !risk) {
        // The substitution passes through this binder unchanged; keeping the
        // caller's memo preserves sharing across binder boundaries, which is
        // what keeps repeated elimination steps polynomial in the dag size.
        if (!touches(s, body_fv)) return {binder, body, true};
        Formula new_body = go(body, s, memo, ctx);
        bool unchanged = new_body.id() == body.id();
        return {binder, std::move(new_body), unchanged};
    }

    Substitution narrowed = s;
    narrowed.erase(binder);
    if (!touches(narrowed, body_fv)) return {binder, body, true};

    IndVar new_binder = binder;
    if (risk) {
        new_binder = IndVar{fresh_name(binder.name, forbidden)};
        narrowed.set(binder, mk_var(new_binder));
    }
    auto fresh_memo = std::make_shared<Memo>();
    Formula new_body = go(body, narrowed, fresh_memo, ctx);
    return {std::move(new_binder), std::move(new_body), false};
}

Formula go(const Formula& f, const Substitution& s, const std::shared_ptr<Memo>& memo, Ctx& ctx) {
    if (!touches(s, *fv_of(f, ctx.fv))) return f;
    auto it = memo->formulas.find(f.id());
    if (it != memo->formulas.end()) return it->second;

    Formula out = f;
    switch (f.kind()) {
        case FormulaKind::FmlApp: {
            const FmlAppF& app = f.fml_app();
            std::vector<Term> args;
            args.reserve(app.args.size());
            for (const Term& a : app.args) args.push_back(go(a, s, memo, ctx));
            if (const FmlAbstraction* abs = s.lookup(app.head)) {
                Substitution beta;
                for (std::size_t i = 0; i < abs->params.size(); ++i) {
                    beta.set(abs->params[i], args[i]);
                }
                out = apply_subst(abs->body, beta);
            } else {
                out = mk_fml(app.head, std::move(args));
            }
            break;
        }
        case FormulaKind::PredApp: {
            const PredAppF& app = f.pred_app();
            std::vector<Term> args;
            args.reserve(app.args.size());
            for (const Term& a : app.args) args.push_back(go(a, s, memo, ctx));
            out = mk_pred(app.symbol, std::move(args));
            break;
        }
        case FormulaKind::Not:
            out = mk_not(go(f.not_().arg, s, memo, ctx));
            break;
        case FormulaKind::Bin:
            out = mk_bin(f.bin().conn, go(f.bin().lhs, s, memo, ctx), go(f.bin().rhs, s, memo, ctx));
            break;
        case FormulaKind::Quant: {
            BinderResult r = go_binder(f.quant().binder, f.quant().body, s, memo, ctx);
            out = r.unchanged ? f : mk_quant(f.quant().q, std::move(r.binder), std::move(r.body));
            break;
        }
    }
    memo->formulas.emplace(f.id(), out);
    return out;
}

Term go(const Term& t, const Substitution& s, const std::shared_ptr<Memo>& memo, Ctx& ctx) {
    if (!touches(s, *fv_of(t, ctx.fv))) return t;
    auto it = memo->terms.find(t.id());
    if (it != memo->terms.end()) return it->second;

    Term out = t;
    switch (t.kind()) {
        case TermKind::Var:
            if (const Term* rhs = s.lookup(t.var().var)) out = *rhs;
            break;
        case TermKind::FnApp: {
            const FnAppT& app = t.fn_app();
            std::vector<Term> args;
            args.reserve(app.args.size());
            for (const Term& a : app.args) args.push_back(go(a, s, memo, ctx));
            out = mk_fn(app.symbol, std::move(args));
            break;
        }
        case TermKind::Eps: {
            BinderResult r = go_binder(t.eps().binder, t.eps().body, s, memo, ctx);
            out = r.unchanged ? t : mk_eps(std::move(r.binder), std::move(r.body));
            break;
        }
    }
    memo->terms.emplace(t.id(), out);
    return out;
}

}  // namespace

Formula apply_subst(const Formula& f, const Substitution& s) {
    if (s.empty()) return f;
    Ctx ctx;
    auto memo = std::make_shared<Memo>();
    return go(f, s, memo, ctx);
}

Term apply_subst(const Term& t, const Substitution& s) {
    if (s.empty()) return t;
    Ctx ctx;
    auto memo = std::make_shared<Memo>();
    return go(t, s, memo, ctx);
}

}  // namespace eps
