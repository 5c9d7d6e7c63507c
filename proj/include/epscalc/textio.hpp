#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "epscalc/ars.hpp"
#include "epscalc/errors.hpp"
#include "epscalc/syntax.hpp"

namespace eps {

struct SourceSpan {
    std::size_t start = 0;
    std::size_t end = 0;
};

struct ParseError : Error {
    SourceSpan span;

    ParseError(const std::string& msg, SourceSpan s) : Error(msg), span(s) {}
};

// Concrete syntax (binders extend over one unary production; -> is
// right-associative, <-> left-associative; precedence ~ > & > | > -> > <->):
//
//   formula := equiv
//   equiv   := impl ('<->' impl)*
//   impl    := disj ('->' impl)?
//   disj    := conj ('|' conj)*
//   conj    := unary ('&' unary)*
//   unary   := '~' unary | 'exists' var '.' unary | 'forall' var '.' unary | atom
//   atom    := ident ['(' [term (',' term)*] ')'] | '(' formula ')'
//   term    := ident ['(' [term (',' term)*] ')'] | 'eps' var '.' unary
//
// Identifiers start with a letter or '_' and continue with letters, digits,
// '_' or '\''. An uppercase first letter makes a formula variable; lowercase
// identifiers are predicate symbols in formula position and function symbols
// (with parentheses) or individual variables (without) in term position.
// Unicode aliases are accepted on input only. Symbol arities are inferred at
// first use and checked for consistency within one parse call.
Formula parse_formula(const std::string& text);

// One formula per nonblank line; '#' starts a comment. All lines share one
// arity table.
std::vector<Formula> parse_corpus(const std::string& text);

// Minimal-parenthesis ASCII rendering; parse_formula(print_formula(f)) is
// alpha-equal (in fact structurally equal) to f.
std::string print_formula(const Formula& f);
std::string print_term(const Term& t);

// FiniteARS text format: first line the carrier size N, then one line per
// edge: `0 u v` or `1 u v` with 0 <= u,v < N.
FiniteARS parse_ars(const std::string& text);
std::string print_ars(const FiniteARS& sys);

}  // namespace eps
