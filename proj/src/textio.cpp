#include "epscalc/textio.hpp"

#include <cctype>
#include <map>
#include <optional>
#include <sstream>
#include <utility>

namespace eps {

namespace {

enum class Tok {
    Ident,
    Exists,
    Forall,
    Eps,
    Not,
    And,
    Or,
    Implies,
    Equiv,
    LParen,
    RParen,
    Comma,
    Dot,
    End,
};

struct Token {
    Tok kind = Tok::End;
    std::string text;
    SourceSpan span;
};

bool ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
bool ident_cont(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
}

// Tokenizes text; spans are byte offsets shifted by `base` so corpus lines
// report positions within the whole input.
std::vector<Token> lex(const std::string& text, std::size_t base) {
    std::vector<Token> out;
    std::size_t i = 0;
    const std::size_t n = text.size();
    auto push = [&](Tok kind, std::size_t start, std::size_t end, std::string s = {}) {
        out.push_back(Token{kind, std::move(s), SourceSpan{base + start, base + end}});
    };
    auto lookahead = [&](std::size_t at, const char* bytes, std::size_t len) {
        return text.compare(at, len, bytes, len) == 0;
    };
    while (i < n) {
        char c = text[i];
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            ++i;
            continue;
        }
        if (c == '#') {
            while (i < n && text[i] != '\n') ++i;
            continue;
        }
        if (ident_start(c)) {
            std::size_t start = i;
            while (i < n && ident_cont(text[i])) ++i;
            std::string word = text.substr(start, i - start);
            Tok kind = Tok::Ident;
            if (word == "exists") kind = Tok::Exists;
            else if (word == "forall") kind = Tok::Forall;
            else if (word == "eps") kind = Tok::Eps;
            push(kind, start, i, std::move(word));
            continue;
        }
        switch (c) {
            case '(': push(Tok::LParen, i, i + 1); ++i; continue;
            case ')': push(Tok::RParen, i, i + 1); ++i; continue;
            case ',': push(Tok::Comma, i, i + 1); ++i; continue;
            case '.': push(Tok::Dot, i, i + 1); ++i; continue;
            case '~': push(Tok::Not, i, i + 1); ++i; continue;
            case '&': push(Tok::And, i, i + 1); ++i; continue;
            case '|': push(Tok::Or, i, i + 1); ++i; continue;
            default: break;
        }
        if (c == '-' && lookahead(i, "->", 2)) {
            push(Tok::Implies, i, i + 2);
            i += 2;
            continue;
        }
        if (c == '<' && lookahead(i, "<->", 3)) {
            push(Tok::Equiv, i, i + 3);
            i += 3;
            continue;
        }
        // UTF-8 aliases, input only.
        struct Alias {
            const char* bytes;
            std::size_t len;
            Tok kind;
        };
        static const Alias aliases[] = {
            {"\xc2\xac", 2, Tok::Not},        // ¬
            {"\xce\xb5", 2, Tok::Eps},        // ε
            {"\xe2\x88\x83", 3, Tok::Exists},  // ∃
            {"\xe2\x88\x80", 3, Tok::Forall},  // ∀
            {"\xe2\x88\xa7", 3, Tok::And},     // ∧
            {"\xe2\x88\xa8", 3, Tok::Or},      // ∨
            {"\xe2\x86\x92", 3, Tok::Implies},  // →
            {"\xe2\x86\x94", 3, Tok::Equiv},    // ↔
        };
        bool matched = false;
        for (const auto& alias : aliases) {
            if (lookahead(i, alias.bytes, alias.len)) {
                push(alias.kind, i, i + alias.len);
                i += alias.len;
                matched = true;
                break;
            }
        }
        if (matched) continue;
        throw ParseError("unexpected character '" + std::string(1, c) + "'",
                         SourceSpan{base + i, base + i + 1});
    }
    push(Tok::End, n, n);
    return out;
}

const char* describe(Tok t) {
    switch (t) {
        case Tok::Ident: return "identifier";
        case Tok::Exists: return "'exists'";
        case Tok::Forall: return "'forall'";
        case Tok::Eps: return "'eps'";
        case Tok::Not: return "'~'";
        case Tok::And: return "'&'";
        case Tok::Or: return "'|'";
        case Tok::Implies: return "'->'";
        case Tok::Equiv: return "'<->'";
        case Tok::LParen: return "'('";
        case Tok::RParen: return "')'";
        case Tok::Comma: return "','";
        case Tok::Dot: return "'.'";
        case Tok::End: return "end of input";
    }
    return "token";
}

bool uppercase_initial(const std::string& name) {
    return !name.empty() && std::isupper(static_cast<unsigned char>(name[0]));
}

// Arity bookkeeping shared across one parse call (or one corpus).
struct ArityTables {
    std::map<std::string, std::size_t> pred, fn, fml;

    void check(std::map<std::string, std::size_t>& table, const char* what,
               const std::string& name, std::size_t arity, SourceSpan span) {
        auto [it, inserted] = table.emplace(name, arity);
        if (!inserted && it->second != arity) {
            throw ParseError(std::string(what) + " '" + name + "' used with arity " +
                                 std::to_string(arity) + " after arity " +
                                 std::to_string(it->second),
                             span);
        }
    }
};

class Parser {
  public:
    Parser(std::vector<Token> tokens, ArityTables& tables)
        : tokens_(std::move(tokens)), tables_(tables) {}

    Formula parse() {
        Formula f = formula();
        if (peek().kind != Tok::End) {
            throw ParseError(std::string("unexpected ") + describe(peek().kind) +
                                 " after the formula",
                             peek().span);
        }
        return f;
    }

  private:
    std::vector<Token> tokens_;
    ArityTables& tables_;
    std::size_t pos_ = 0;

    const Token& peek() const { return tokens_[pos_]; }
    Token advance() { return tokens_[pos_++]; }
    bool accept(Tok kind) {
        if (peek().kind == kind) {
            ++pos_;
            return true;
        }
        return false;
    }
    Token expect(Tok kind, const char* context) {
        if (peek().kind != kind) {
            throw ParseError(std::string("expected ") + describe(kind) + " " + context +
                                 ", found " + describe(peek().kind),
                             peek().span);
        }
        return advance();
    }

    std::string binder_name() {
        Token t = expect(Tok::Ident, "after the binder keyword");
        if (uppercase_initial(t.text)) {
            throw ParseError("binder '" + t.text +
                                 "' must be an individual variable (lowercase initial)",
                             t.span);
        }
        return t.text;
    }

    // ['(' [term (',' term)*] ')']; returns nullopt when no '(' follows.
    std::optional<std::vector<Term>> arg_list() {
        if (!accept(Tok::LParen)) return std::nullopt;
        std::vector<Term> args;
        if (!accept(Tok::RParen)) {
            args.push_back(term());
            while (accept(Tok::Comma)) args.push_back(term());
            expect(Tok::RParen, "to close the argument list");
        }
        return args;
    }

    Term term() {
        if (accept(Tok::Eps)) {
            std::string binder = binder_name();
            expect(Tok::Dot, "after the eps binder");
            return mk_eps(IndVar{std::move(binder)}, unary());
        }
        Token t = expect(Tok::Ident, "to start a term");
        if (uppercase_initial(t.text)) {
            throw ParseError("formula variable '" + t.text + "' cannot appear in a term",
                             t.span);
        }
        if (auto args = arg_list()) {
            tables_.check(tables_.fn, "function symbol", t.text, args->size(), t.span);
            return mk_fn(std::move(t.text), std::move(*args));
        }
        return mk_var(std::move(t.text));
    }

    Formula atom() {
        if (accept(Tok::LParen)) {
            Formula f = formula();
            expect(Tok::RParen, "to close the parenthesized formula");
            return f;
        }
        Token t = expect(Tok::Ident, "to start a formula");
        auto args = arg_list();
        std::vector<Term> arg_vec = args ? std::move(*args) : std::vector<Term>{};
        if (uppercase_initial(t.text)) {
            tables_.check(tables_.fml, "formula variable", t.text, arg_vec.size(), t.span);
            return mk_fml(std::move(t.text), std::move(arg_vec));
        }
        tables_.check(tables_.pred, "predicate symbol", t.text, arg_vec.size(), t.span);
        return mk_pred(std::move(t.text), std::move(arg_vec));
    }

    Formula unary() {
        if (accept(Tok::Not)) return mk_not(unary());
        if (peek().kind == Tok::Exists || peek().kind == Tok::Forall) {
            Quantifier q = advance().kind == Tok::Exists ? Quantifier::Exists
                                                         : Quantifier::Forall;
            std::string binder = binder_name();
            expect(Tok::Dot, "after the quantifier binder");
            return mk_quant(q, IndVar{std::move(binder)}, unary());
        }
        return atom();
    }

    Formula conj() {
        Formula f = unary();
        while (accept(Tok::And)) f = mk_and(std::move(f), unary());
        return f;
    }

    Formula disj() {
        Formula f = conj();
        while (accept(Tok::Or)) f = mk_or(std::move(f), conj());
        return f;
    }

    Formula impl() {
        Formula f = disj();
        if (accept(Tok::Implies)) return mk_implies(std::move(f), impl());
        return f;
    }

    Formula formula() {
        Formula f = impl();
        while (accept(Tok::Equiv)) f = mk_equiv(std::move(f), impl());
        return f;
    }
};

}  // namespace

Formula parse_formula(const std::string& text) {
    ArityTables tables;
    return Parser(lex(text, 0), tables).parse();
}

std::vector<Formula> parse_corpus(const std::string& text) {
    ArityTables tables;
    std::vector<Formula> out;
    std::size_t line_start = 0;
    while (line_start <= text.size()) {
        std::size_t line_end = text.find('\n', line_start);
        if (line_end == std::string::npos) line_end = text.size();
        std::string line = text.substr(line_start, line_end - line_start);
        auto tokens = lex(line, line_start);
        if (tokens.size() > 1) {  // more than the End token: nonblank line
            out.push_back(Parser(std::move(tokens), tables).parse());
        }
        if (line_end == text.size()) break;
        line_start = line_end + 1;
    }
    return out;
}

// ---------- printing ----------

namespace {

// Precedence levels: <-> 1, -> 2, | 3, & 4, everything unary or atomic 5.
int prec_of(const Formula& f) {
    if (f.kind() != FormulaKind::Bin) return 5;
    switch (f.bin().conn) {
        case Connective::Equiv: return 1;
        case Connective::Implies: return 2;
        case Connective::Or: return 3;
        case Connective::And: return 4;
    }
    return 5;
}

const char* conn_text(Connective c) {
    switch (c) {
        case Connective::And: return " & ";
        case Connective::Or: return " | ";
        case Connective::Implies: return " -> ";
        case Connective::Equiv: return " <-> ";
    }
    return " ? ";
}

void print_formula_at(const Formula& f, int min_level, std::string& out);

void print_term_to(const Term& t, std::string& out) {
    switch (t.kind()) {
        case TermKind::Var:
            out += t.var().var.name;
            return;
        case TermKind::FnApp: {
            const auto& fn = t.fn_app();
            out += fn.symbol;
            out += '(';
            for (std::size_t i = 0; i < fn.args.size(); ++i) {
                if (i) out += ',';
                print_term_to(fn.args[i], out);
            }
            out += ')';
            return;
        }
        case TermKind::Eps: {
            const auto& e = t.eps();
            out += "eps ";
            out += e.binder.name;
            out += ". ";
            print_formula_at(e.body, 5, out);
            return;
        }
    }
}

void print_args(const std::vector<Term>& args, std::string& out) {
    if (args.empty()) return;
    out += '(';
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (i) out += ',';
        print_term_to(args[i], out);
    }
    out += ')';
}

void print_formula_at(const Formula& f, int min_level, std::string& out) {
    const int level = prec_of(f);
    const bool parens = level < min_level;
    if (parens) out += '(';
    switch (f.kind()) {
        case FormulaKind::FmlApp: {
            out += f.fml_app().head.name;
            print_args(f.fml_app().args, out);
            break;
        }
        case FormulaKind::PredApp: {
            out += f.pred_app().symbol;
            print_args(f.pred_app().args, out);
            break;
        }
        case FormulaKind::Not:
            out += '~';
            print_formula_at(f.not_().arg, 5, out);
            break;
        case FormulaKind::Quant: {
            const auto& q = f.quant();
            out += q.q == Quantifier::Exists ? "exists " : "forall ";
            out += q.binder.name;
            out += ". ";
            print_formula_at(q.body, 5, out);
            break;
        }
        case FormulaKind::Bin: {
            const auto& b = f.bin();
            // -> is right-associative; the other connectives associate left.
            const bool right_assoc = b.conn == Connective::Implies;
            print_formula_at(b.lhs, right_assoc ? level + 1 : level, out);
            out += conn_text(b.conn);
            print_formula_at(b.rhs, right_assoc ? level : level + 1, out);
            break;
        }
    }
    if (parens) out += ')';
}

}  // namespace

std::string print_formula(const Formula& f) {
    std::string out;
    print_formula_at(f, 0, out);
    return out;
}

std::string print_term(const Term& t) {
    std::string out;
    print_term_to(t, out);
    return out;
}

// ---------- finite ARS text format ----------

FiniteARS parse_ars(const std::string& text) {
    FiniteARS sys;
    bool have_size = false;
    std::size_t line_start = 0;
    std::size_t line_no = 0;
    while (line_start <= text.size()) {
        std::size_t line_end = text.find('\n', line_start);
        if (line_end == std::string::npos) line_end = text.size();
        std::string line = text.substr(line_start, line_end - line_start);
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        std::istringstream in(line);
        SourceSpan span{line_start, line_end};
        if (!have_size) {
            int n = 0;
            if (in >> n) {
                std::string rest;
                if (in >> rest) {
                    throw ParseError("trailing input after the carrier size", span);
                }
                sys.carrier_size = n;
                have_size = true;
            } else if (!line.empty() && line.find_first_not_of(" \t\r") != std::string::npos) {
                throw ParseError("expected the carrier size on the first line", span);
            }
        } else {
            int kind = 0, u = 0, v = 0;
            if (in >> kind) {
                if (!(in >> u >> v)) {
                    throw ParseError("expected an edge line '0 u v' or '1 u v'", span);
                }
                std::string rest;
                if (in >> rest) throw ParseError("trailing input after the edge", span);
                if (kind == 0) sys.r0.emplace(u, v);
                else if (kind == 1) sys.r1.emplace(u, v);
                else throw ParseError("edge kind must be 0 or 1", span);
            } else if (line.find_first_not_of(" \t\r") != std::string::npos) {
                throw ParseError("expected an edge line '0 u v' or '1 u v'", span);
            }
        }
        if (line_end == text.size()) break;
        line_start = line_end + 1;
    }
    if (!have_size) {
        throw ParseError("expected the carrier size on the first line",
                         SourceSpan{0, text.size()});
    }
    sys.validate();
    return sys;
}

std::string print_ars(const FiniteARS& sys) {
    std::string out = std::to_string(sys.carrier_size) + "\n";
    for (const auto& [u, v] : sys.r0) {
        out += "0 " + std::to_string(u) + " " + std::to_string(v) + "\n";
    }
    for (const auto& [u, v] : sys.r1) {
        out += "1 " + std::to_string(u) + " " + std::to_string(v) + "\n";
    }
    return out;
}

}  // namespace eps
