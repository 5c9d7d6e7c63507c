#include "epscalc/rewrite.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <unordered_map>

namespace eps {

const char* to_string(RuleKind k) {
    return k == RuleKind::Step0 ? "Step0" : "Step1";
}

bool same_redex(const Redex& a, const Redex& b) {
    return a.pos == b.pos && a.q == b.q && a.binder == b.binder && a.kind == b.kind &&
           a.innermost == b.innermost && struct_eq(a.body, b.body);
}

// ---------- redex discovery ----------

namespace {

Redex make_redex(const Position& pos, const QuantF& node) {
    RuleKind kind = free_in(node.binder, node.body) ? RuleKind::Step1 : RuleKind::Step0;
    return Redex{pos, node.q, node.binder, node.body, kind,
                 node.body.measure().quantifiers == 0};
}

void collect_term(const Term& t, Position& pos, std::vector<Redex>& out);


void collect_formula(const Formula& f, Position& pos, std::vector<Redex>& out) {
    switch (f.kind()) {
        case FormulaKind::FmlApp:
            for (std::size_t i = 0; i < f.fml_app().args.size(); ++i) {
                pos.path.push_back(static_cast<int>(i));
                collect_term(f.fml_app().args[i], pos, out);
                pos.path.pop_back();
            }
            break;
        case FormulaKind::PredApp:
            for (std::size_t i = 0; i < f.pred_app().args.size(); ++i) {
                pos.path.push_back(static_cast<int>(i));
                collect_term(f.pred_app().args[i], pos, out);
                pos.path.pop_back();
            }
            break;
        case FormulaKind::Not:
            pos.path.push_back(0);
            collect_formula(f.not_().arg, pos, out);
            pos.path.pop_back();
            break;
        case FormulaKind::Bin:
            pos.path.push_back(0);
            collect_formula(f.bin().lhs, pos, out);
            pos.path.back() = 1;
            collect_formula(f.bin().rhs, pos, out);
            pos.path.pop_back();
            break;
        case FormulaKind::Quant:
            out.push_back(make_redex(pos, f.quant()));
            pos.path.push_back(0);
            collect_formula(f.quant().body, pos, out);
            pos.path.pop_back();
            break;
    }
}

void collect_term(const Term& t, Position& pos, std::vector<Redex>& out) {
    switch (t.kind()) {
        case TermKind::Var:
            break;
        case TermKind::FnApp:
            for (std::size_t i = 0; i < t.fn_app().args.size(); ++i) {
                pos.path.push_back(static_cast<int>(i));
                collect_term(t.fn_app().args[i], pos, out);
                pos.path.pop_back();
            }
            break;
        case TermKind::Eps:
            pos.path.push_back(0);
            collect_formula(t.eps().body, pos, out);
            pos.path.pop_back();
            break;
    }
}

}  // namespace

std::vector<Redex> find_redexes(const Formula& f) {
    std::vector<Redex> out;
    Position pos;
    collect_formula(f, pos, out);
    return out;
}

std::optional<Redex> redex_at(const Formula& f, const Position& pos) {
    Node sub = subterm_at(f, pos);
    if (!std::holds_alternative<Formula>(sub)) return std::nullopt;
    const Formula& g = std::get<Formula>(sub);
    if (g.kind() != FormulaKind::Quant) return std::nullopt;
    return make_redex(pos, g.quant());
}

// ---------- indexed redex lookup ----------

namespace {

const QuantF* nav_term(const Term& t, std::uint64_t& k, Position& pos);

const QuantF* nav_formula(const Formula& f, std::uint64_t& k, Position& pos) {
    switch (f.kind()) {
        case FormulaKind::FmlApp: {
            const auto& args = f.fml_app().args;
            for (std::size_t i = 0; i < args.size(); ++i) {
                std::uint64_t c = args[i].measure().quantifiers;
                if (k < c) {
                    pos.path.push_back(static_cast<int>(i));
                    return nav_term(args[i], k, pos);
                }
                k -= c;
            }
            return nullptr;
        }
        case FormulaKind::PredApp: {
            const auto& args = f.pred_app().args;
            for (std::size_t i = 0; i < args.size(); ++i) {
                std::uint64_t c = args[i].measure().quantifiers;
                if (k < c) {
                    pos.path.push_back(static_cast<int>(i));
                    return nav_term(args[i], k, pos);
                }
                k -= c;
            }
            return nullptr;
        }
        case FormulaKind::Not:
            pos.path.push_back(0);
            return nav_formula(f.not_().arg, k, pos);
        case FormulaKind::Bin: {
            std::uint64_t cl = f.bin().lhs.measure().quantifiers;
            if (k < cl) {
                pos.path.push_back(0);
                return nav_formula(f.bin().lhs, k, pos);
            }
            k -= cl;
            pos.path.push_back(1);
            return nav_formula(f.bin().rhs, k, pos);
        }
        case FormulaKind::Quant:
            if (k == 0) return &f.quant();
            --k;
            pos.path.push_back(0);
            return nav_formula(f.quant().body, k, pos);
    }
    return nullptr;
}

const QuantF* nav_term(const Term& t, std::uint64_t& k, Position& pos) {
    switch (t.kind()) {
        case TermKind::Var:
            return nullptr;
        case TermKind::FnApp: {
            const auto& args = t.fn_app().args;
            for (std::size_t i = 0; i < args.size(); ++i) {
                std::uint64_t c = args[i].measure().quantifiers;
                if (k < c) {
                    pos.path.push_back(static_cast<int>(i));
                    return nav_term(args[i], k, pos);
                }
                k -= c;
            }
            return nullptr;
        }
        case TermKind::Eps:
            pos.path.push_back(0);
            return nav_formula(t.eps().body, k, pos);
    }
    return nullptr;
}

}  // namespace

Redex redex_by_index(const Formula& f, std::uint64_t k) {
    std::uint64_t total = f.measure().quantifiers;
    if (total == std::numeric_limits<std::uint64_t>::max()) {
        throw RewriteError("redex_by_index: quantifier count saturates");
    }
    if (k >= total) {
        throw RewriteError("redex_by_index: index out of range");
    }
    Position pos;
    const QuantF* node = nav_formula(f, k, pos);
    return make_redex(pos, *node);
}

bool is_normal_form(const Formula& f) {
    return !has_quantifier(f);
}

// ---------- strategy-facing redex selection ----------

namespace {

bool leftmost_term(const Term& t, bool innermost_only, Position& pos, std::optional<Redex>& out);

bool leftmost_formula(const Formula& f, bool innermost_only, Position& pos,
                      std::optional<Redex>& out) {
    if (f.measure().quantifiers == 0) return false;
    switch (f.kind()) {
        case FormulaKind::FmlApp:
            for (std::size_t i = 0; i < f.fml_app().args.size(); ++i) {
                pos.path.push_back(static_cast<int>(i));
                if (leftmost_term(f.fml_app().args[i], innermost_only, pos, out)) return true;
                pos.path.pop_back();
            }
            return false;
        case FormulaKind::PredApp:
            for (std::size_t i = 0; i < f.pred_app().args.size(); ++i) {
                pos.path.push_back(static_cast<int>(i));
                if (leftmost_term(f.pred_app().args[i], innermost_only, pos, out)) return true;
                pos.path.pop_back();
            }
            return false;
        case FormulaKind::Not:
            pos.path.push_back(0);
            if (leftmost_formula(f.not_().arg, innermost_only, pos, out)) return true;
            pos.path.pop_back();
            return false;
        case FormulaKind::Bin:
            pos.path.push_back(0);
            if (leftmost_formula(f.bin().lhs, innermost_only, pos, out)) return true;
            pos.path.back() = 1;
            if (leftmost_formula(f.bin().rhs, innermost_only, pos, out)) return true;
            pos.path.pop_back();
            return false;
        case FormulaKind::Quant:
            if (!innermost_only || f.quant().body.measure().quantifiers == 0) {
                out = make_redex(pos, f.quant());
                return true;
            }
            pos.path.push_back(0);
            if (leftmost_formula(f.quant().body, innermost_only, pos, out)) return true;
            pos.path.pop_back();
            return false;
    }
    return false;
}

bool leftmost_term(const Term& t, bool innermost_only, Position& pos, std::optional<Redex>& out) {
    if (t.measure().quantifiers == 0) return false;
    switch (t.kind()) {
        case TermKind::Var:
            return false;
        case TermKind::FnApp:
            for (std::size_t i = 0; i < t.fn_app().args.size(); ++i) {
                pos.path.push_back(static_cast<int>(i));
                if (leftmost_term(t.fn_app().args[i], innermost_only, pos, out)) return true;
                pos.path.pop_back();
            }
            return false;
        case TermKind::Eps:
            pos.path.push_back(0);
            if (leftmost_formula(t.eps().body, innermost_only, pos, out)) return true;
            pos.path.pop_back();
            return false;
    }
    return false;
}

void outer_term(const Term& t, Position& pos, std::vector<Redex>& out);

void outer_formula(const Formula& f, Position& pos, std::vector<Redex>& out) {
    if (f.measure().quantifiers == 0) return;
    switch (f.kind()) {
        case FormulaKind::FmlApp:
            for (std::size_t i = 0; i < f.fml_app().args.size(); ++i) {
                pos.path.push_back(static_cast<int>(i));
                outer_term(f.fml_app().args[i], pos, out);
                pos.path.pop_back();
            }
            break;
        case FormulaKind::PredApp:
            for (std::size_t i = 0; i < f.pred_app().args.size(); ++i) {
                pos.path.push_back(static_cast<int>(i));
                outer_term(f.pred_app().args[i], pos, out);
                pos.path.pop_back();
            }
            break;
        case FormulaKind::Not:
            pos.path.push_back(0);
            outer_formula(f.not_().arg, pos, out);
            pos.path.pop_back();
            break;
        case FormulaKind::Bin:
            pos.path.push_back(0);
            outer_formula(f.bin().lhs, pos, out);
            pos.path.back() = 1;
            outer_formula(f.bin().rhs, pos, out);
            pos.path.pop_back();
            break;
        case FormulaKind::Quant:
            out.push_back(make_redex(pos, f.quant()));
            break;  // everything below is dominated by this redex
    }
}

void outer_term(const Term& t, Position& pos, std::vector<Redex>& out) {
    if (t.measure().quantifiers == 0) return;
    switch (t.kind()) {
        case TermKind::Var:
            break;
        case TermKind::FnApp:
            for (std::size_t i = 0; i < t.fn_app().args.size(); ++i) {
                pos.path.push_back(static_cast<int>(i));
                outer_term(t.fn_app().args[i], pos, out);
                pos.path.pop_back();
            }
            break;
        case TermKind::Eps:
            pos.path.push_back(0);
            outer_formula(t.eps().body, pos, out);
            pos.path.pop_back();
            break;
    }
}

}  // namespace

std::optional<Redex> pick_leftmost(const Formula& f, bool innermost_only) {
    std::optional<Redex> out;
    Position pos;
    leftmost_formula(f, innermost_only, pos, out);
    return out;
}

std::vector<Redex> outermost_redexes(const Formula& f) {
    std::vector<Redex> out;
    Position pos;
    outer_formula(f, pos, out);
    return out;
}

// ---------- contraction ----------

Formula contract(const Formula& f, const Position& pos) {
    auto r = redex_at(f, pos);
    if (!r) throw RewriteError("no redex at position " + pos.to_string());
    Term eps_term = mk_eps(r->binder, neg_by_quantifier(r->q, r->body));
    Formula contractum = apply_subst(r->body, Substitution::singleton(r->binder, eps_term));
    return replace_at(f, pos, Node{contractum});
}

Formula contract(const Formula& f, const Redex& r) {
    auto current = redex_at(f, r.pos);
    if (!current || !same_redex(*current, r)) {
        throw RewriteError("stale redex at position " + r.pos.to_string());
    }
    return contract(f, r.pos);
}

Formula parallel_step(const Formula& f, const std::vector<Position>& positions) {
    for (std::size_t i = 0; i < positions.size(); ++i) {
        for (std::size_t j = i + 1; j < positions.size(); ++j) {
            if (!positions[i].disjoint_with(positions[j])) {
                throw RewriteError("overlapping positions " + positions[i].to_string() + " and " +
                                   positions[j].to_string());
            }
        }
        if (!redex_at(f, positions[i])) {
            throw RewriteError("no redex at position " + positions[i].to_string());
        }
    }
    // Disjoint subtrees never disturb each other, so sequential contraction
    // in any order realizes the simultaneous step.
    Formula out = f;
    for (const Position& p : positions) out = contract(out, p);
    return out;
}

Formula parallel_step(const Formula& f, const std::vector<Redex>& redexes) {
    for (const Redex& r : redexes) {
        auto current = redex_at(f, r.pos);
        if (!current || !same_redex(*current, r)) {
            throw RewriteError("stale redex at position " + r.pos.to_string());
        }
    }
    std::vector<Position> positions;
    positions.reserve(redexes.size());
    for (const Redex& r : redexes) positions.push_back(r.pos);
    return parallel_step(f, positions);
}

// ---------- free occurrences ----------

namespace {

void occ_term(const Term& t, const IndVar& v, Position& pos, std::vector<Position>& out);

void occ_formula(const Formula& f, const IndVar& v, Position& pos, std::vector<Position>& out) {
    switch (f.kind()) {
        case FormulaKind::FmlApp:
            for (std::size_t i = 0; i < f.fml_app().args.size(); ++i) {
                pos.path.push_back(static_cast<int>(i));
                occ_term(f.fml_app().args[i], v, pos, out);
                pos.path.pop_back();
            }
            break;
        case FormulaKind::PredApp:
            for (std::size_t i = 0; i < f.pred_app().args.size(); ++i) {
                pos.path.push_back(static_cast<int>(i));
                occ_term(f.pred_app().args[i], v, pos, out);
                pos.path.pop_back();
            }
            break;
        case FormulaKind::Not:
            pos.path.push_back(0);
            occ_formula(f.not_().arg, v, pos, out);
            pos.path.pop_back();
            break;
        case FormulaKind::Bin:
            pos.path.push_back(0);
            occ_formula(f.bin().lhs, v, pos, out);
            pos.path.back() = 1;
            occ_formula(f.bin().rhs, v, pos, out);
            pos.path.pop_back();
            break;
        case FormulaKind::Quant:
            if (f.quant().binder == v) return;  // shadowed below here
            pos.path.push_back(0);
            occ_formula(f.quant().body, v, pos, out);
            pos.path.pop_back();
            break;
    }
}

void occ_term(const Term& t, const IndVar& v, Position& pos, std::vector<Position>& out) {
    switch (t.kind()) {
        case TermKind::Var:
            if (t.var().var == v) out.push_back(pos);
            break;
        case TermKind::FnApp:
            for (std::size_t i = 0; i < t.fn_app().args.size(); ++i) {
                pos.path.push_back(static_cast<int>(i));
                occ_term(t.fn_app().args[i], v, pos, out);
                pos.path.pop_back();
            }
            break;
        case TermKind::Eps:
            if (t.eps().binder == v) return;
            pos.path.push_back(0);
            occ_formula(t.eps().body, v, pos, out);
            pos.path.pop_back();
            break;
    }
}

}  // namespace

std::vector<Position> free_occurrence_positions(const Formula& f, const IndVar& v) {
    std::vector<Position> out;
    Position pos;
    occ_formula(f, v, pos, out);
    return out;
}

std::uint64_t free_occurrence_count(const Formula& f, const IndVar& v) {
    return free_occurrence_positions(f, v).size();
}

// ---------- peak analysis ----------

NestedPeak resolve_nested_peak(const Formula& f0, const Position& inner_pos) {
    auto outer = redex_at(f0, Position{});
    if (!outer) throw RewriteError("nested peak requires a quantifier at the root");
    if (inner_pos.path.empty() || inner_pos.path[0] != 0) {
        throw RewriteError("inner redex must lie strictly inside the root body");
    }
    auto inner = redex_at(f0, inner_pos);
    if (!inner) throw RewriteError("no redex at position " + inner_pos.to_string());

    Formula f1 = contract(f0, inner_pos);
    Formula f2 = contract(f0, Position{});

    // Path of the inner redex relative to the body.
    Position p;
    p.path.assign(inner_pos.path.begin() + 1, inner_pos.path.end());

    // The root contraction substitutes e = eps x1. neg^Q1 body for every
    // free occurrence of x1; each inserted copy of e contains the body (and
    // with it the inner redex) behind the eps binder and, for a universal
    // quantifier, behind one negation.
    std::vector<int> eps_path;
    eps_path.push_back(0);
    if (outer->q == Quantifier::Forall) eps_path.push_back(0);

    std::vector<Position> copy_positions;
    for (const Position& occ : free_occurrence_positions(outer->body, outer->binder)) {
        Position cp = occ;
        cp.path.insert(cp.path.end(), eps_path.begin(), eps_path.end());
        cp.path.insert(cp.path.end(), p.path.begin(), p.path.end());
        copy_positions.push_back(std::move(cp));
    }

    std::vector<Redex> copies;
    copies.reserve(copy_positions.size());
    for (const Position& cp : copy_positions) {
        auto r = redex_at(f2, cp);
        if (!r) throw RewriteError("missing residual at position " + cp.to_string());
        copies.push_back(*r);
    }

    Formula f3 = parallel_step(f2, copy_positions);
    auto hole = redex_at(f3, p);
    if (!hole) throw RewriteError("missing residual at position " + p.to_string());
    Formula f4 = contract(f3, p);

    auto join = redex_at(f1, Position{});
    if (!join) throw RewriteError("root redex lost in inner contraction");
    bool commutes = alpha_eq(contract(f1, Position{}), f4);

    return NestedPeak{f0,
                      inner_pos,
                      inner->kind,
                      outer->kind,
                      std::move(f1),
                      std::move(f2),
                      std::move(copies),
                      std::move(f3),
                      std::move(p),
                      hole->kind,
                      std::move(f4),
                      join->kind,
                      commutes};
}

VacuousPeak resolve_vacuous_peak(const Formula& f, const Position& outer_pos,
                                 const Position& inner_pos) {
    auto outer = redex_at(f, outer_pos);
    if (!outer) throw RewriteError("no redex at position " + outer_pos.to_string());
    if (outer->kind != RuleKind::Step0) {
        throw RewriteError("outer redex at " + outer_pos.to_string() + " is not vacuous");
    }
    if (!outer_pos.is_proper_prefix_of(inner_pos)) {
        throw RewriteError("outer position must lie strictly above the inner one");
    }
    if (!redex_at(f, inner_pos)) {
        throw RewriteError("no redex at position " + inner_pos.to_string());
    }

    Formula f1 = contract(f, inner_pos);
    Formula f2 = contract(f, outer_pos);

    // Contracting the vacuous outer redex just drops its quantifier node, so
    // positions below it lose the body step of the path.
    Position shifted = outer_pos;
    shifted.path.insert(shifted.path.end(), inner_pos.path.begin() + outer_pos.path.size() + 1,
                        inner_pos.path.end());

    Formula g_from_f1 = contract(f1, outer_pos);
    Formula g_from_f2 = contract(f2, shifted);
    bool joins = struct_eq(g_from_f1, g_from_f2);
    return VacuousPeak{std::move(f1), std::move(f2), std::move(g_from_f1),
                       std::move(g_from_f2), joins};
}

}  // namespace eps
