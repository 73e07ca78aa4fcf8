#include "slmc/formula.hpp"

#include <algorithm>
#include <cassert>
#include <sstream>

namespace slmc {

namespace {

FormulaPtr mk(Op op, std::string name, std::string agent, FormulaPtr lhs, FormulaPtr rhs) {
    auto f = std::make_shared<Formula>();
    f->op = op;
    f->name = std::move(name);
    f->agent = std::move(agent);
    f->lhs = std::move(lhs);
    f->rhs = std::move(rhs);
    return f;
}

} // namespace

FormulaPtr f_true() { return mk(Op::True, "", "", nullptr, nullptr); }
FormulaPtr f_false() { return mk(Op::False, "", "", nullptr, nullptr); }
FormulaPtr f_atom(const std::string& name) { return mk(Op::Atom, name, "", nullptr, nullptr); }
FormulaPtr f_not(FormulaPtr a) { return mk(Op::Not, "", "", std::move(a), nullptr); }
FormulaPtr f_and(FormulaPtr a, FormulaPtr b) { return mk(Op::And, "", "", std::move(a), std::move(b)); }
FormulaPtr f_or(FormulaPtr a, FormulaPtr b) { return mk(Op::Or, "", "", std::move(a), std::move(b)); }
FormulaPtr f_next(FormulaPtr a) { return mk(Op::Next, "", "", std::move(a), nullptr); }
FormulaPtr f_until(FormulaPtr a, FormulaPtr b) { return mk(Op::Until, "", "", std::move(a), std::move(b)); }
FormulaPtr f_release(FormulaPtr a, FormulaPtr b) { return mk(Op::Release, "", "", std::move(a), std::move(b)); }
FormulaPtr f_eventually(FormulaPtr a) { return f_until(f_true(), std::move(a)); }
FormulaPtr f_globally(FormulaPtr a) { return f_release(f_false(), std::move(a)); }
FormulaPtr f_implies(FormulaPtr a, FormulaPtr b) { return f_or(f_not(std::move(a)), std::move(b)); }
FormulaPtr f_iff(FormulaPtr a, FormulaPtr b) {
    return f_and(f_implies(a, b), f_implies(b, a));
}
FormulaPtr f_exists(const std::string& var, FormulaPtr a) { return mk(Op::Exists, var, "", std::move(a), nullptr); }
FormulaPtr f_forall(const std::string& var, FormulaPtr a) { return mk(Op::Forall, var, "", std::move(a), nullptr); }
FormulaPtr f_bind(const std::string& agent, const std::string& var, FormulaPtr a) {
    return mk(Op::Bind, var, agent, std::move(a), nullptr);
}
FormulaPtr f_prop_exists(const std::string& prop, FormulaPtr a) { return mk(Op::PropExists, prop, "", std::move(a), nullptr); }
FormulaPtr f_prop_forall(const std::string& prop, FormulaPtr a) { return mk(Op::PropForall, prop, "", std::move(a), nullptr); }

int compare(const FormulaPtr& a, const FormulaPtr& b) {
    if (a == b) return 0;
    if (!a) return -1;
    if (!b) return 1;
    if (a->op != b->op) return a->op < b->op ? -1 : 1;
    if (int c = a->name.compare(b->name)) return c;
    if (int c = a->agent.compare(b->agent)) return c;
    if (int c = compare(a->lhs, b->lhs)) return c;
    return compare(a->rhs, b->rhs);
}

bool equal(const FormulaPtr& a, const FormulaPtr& b) { return compare(a, b) == 0; }

// ---------------------------------------------------------------------------
// Printing

namespace {

int print_level(const Formula& f) {
    switch (f.op) {
        case Op::True:
        case Op::False:
        case Op::Atom: return 6;
        case Op::Not:
        case Op::Next:
        case Op::Exists:
        case Op::Forall:
        case Op::Bind:
        case Op::PropExists:
        case Op::PropForall: return 5;
        case Op::Until:
        case Op::Release: return 4;
        case Op::And: return 3;
        case Op::Or: return 2;
    }
    return 6;
}

void print(const FormulaPtr& f, int min_level, std::ostream& out) {
    const int level = print_level(*f);
    const bool parens = level < min_level;
    if (parens) out << '(';
    switch (f->op) {
        case Op::True: out << "true"; break;
        case Op::False: out << "false"; break;
        case Op::Atom: out << f->name; break;
        case Op::Not:
            out << '!';
            print(f->lhs, 5, out);
            break;
        case Op::Next:
            out << "X ";
            print(f->lhs, 5, out);
            break;
        case Op::Until:
            if (f->lhs->op == Op::True) {
                out << "F ";
                print(f->rhs, 5, out);
            } else {
                print(f->lhs, 5, out);
                out << " U ";
                print(f->rhs, 4, out);
            }
            break;
        case Op::Release:
            if (f->lhs->op == Op::False) {
                out << "G ";
                print(f->rhs, 5, out);
            } else {
                print(f->lhs, 5, out);
                out << " R ";
                print(f->rhs, 4, out);
            }
            break;
        case Op::And:
            print(f->lhs, 3, out);
            out << " & ";
            print(f->rhs, 4, out);
            break;
        case Op::Or:
            print(f->lhs, 2, out);
            out << " | ";
            print(f->rhs, 3, out);
            break;
        case Op::Exists:
            out << "<<" << f->name << ">> ";
            print(f->lhs, 5, out);
            break;
        case Op::Forall:
            out << "[[" << f->name << "]] ";
            print(f->lhs, 5, out);
            break;
        case Op::Bind:
            out << '(' << f->agent << ',' << f->name << ") ";
            print(f->lhs, 5, out);
            break;
        case Op::PropExists:
            out << "exists " << f->name << ". ";
            print(f->lhs, 5, out);
            break;
        case Op::PropForall:
            out << "forall " << f->name << ". ";
            print(f->lhs, 5, out);
            break;
    }
    if (parens) out << ')';
}

} // namespace

std::string to_string(const FormulaPtr& f) {
    std::ostringstream out;
    print(f, 0, out);
    return out.str();
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

enum class Tok {
    End, Ident, True, False, Not, And, Or, Implies, Iff,
    Next, Until, Release, Finally, Globally,
    LParen, RParen, Comma, Dot,
    ExOpen, ExClose, AllOpen, AllClose,
    PropExists, PropForall,
};

struct Token {
    Tok kind;
    std::string text;
    int line, col;
};

struct Lexer {
    const std::string& src;
    size_t pos = 0;
    int line = 1, col = 1;

    explicit Lexer(const std::string& s) : src(s) {}

    void advance(size_t n) {
        for (size_t i = 0; i < n && pos < src.size(); ++i, ++pos) {
            if (src[pos] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    }

    std::vector<Token> run() {
        std::vector<Token> out;
        while (true) {
            while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos])))
                advance(1);
            if (pos >= src.size()) break;
            const int tl = line, tc = col;
            const char c = src[pos];
            auto push = [&](Tok k, size_t len, std::string text = "") {
                out.push_back({k, std::move(text), tl, tc});
                advance(len);
            };
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '@') {
                size_t end = pos;
                while (end < src.size()) {
                    const char d = src[end];
                    if (std::isalnum(static_cast<unsigned char>(d)) || d == '_' || d == '@' || d == '\'')
                        ++end;
                    else
                        break;
                }
                std::string word = src.substr(pos, end - pos);
                Tok k = Tok::Ident;
                if (word == "true") k = Tok::True;
                else if (word == "false") k = Tok::False;
                else if (word == "X") k = Tok::Next;
                else if (word == "U") k = Tok::Until;
                else if (word == "R") k = Tok::Release;
                else if (word == "F") k = Tok::Finally;
                else if (word == "G") k = Tok::Globally;
                else if (word == "exists") k = Tok::PropExists;
                else if (word == "forall") k = Tok::PropForall;
                push(k, word.size(), word);
                continue;
            }
            switch (c) {
                case '(': push(Tok::LParen, 1); break;
                case ')': push(Tok::RParen, 1); break;
                case ',': push(Tok::Comma, 1); break;
                case '.': push(Tok::Dot, 1); break;
                case '!': push(Tok::Not, 1); break;
                case '&': push(Tok::And, 1); break;
                case '|': push(Tok::Or, 1); break;
                case '<':
                    if (src.compare(pos, 3, "<->") == 0) push(Tok::Iff, 3);
                    else if (src.compare(pos, 2, "<<") == 0) push(Tok::ExOpen, 2);
                    else throw ParseError("unexpected '<'", tl, tc);
                    break;
                case '>':
                    if (src.compare(pos, 2, ">>") == 0) push(Tok::ExClose, 2);
                    else throw ParseError("unexpected '>'", tl, tc);
                    break;
                case '[':
                    if (src.compare(pos, 2, "[[") == 0) push(Tok::AllOpen, 2);
                    else throw ParseError("unexpected '['", tl, tc);
                    break;
                case ']':
                    if (src.compare(pos, 2, "]]") == 0) push(Tok::AllClose, 2);
                    else throw ParseError("unexpected ']'", tl, tc);
                    break;
                case '-':
                    if (src.compare(pos, 2, "->") == 0) push(Tok::Implies, 2);
                    else throw ParseError("unexpected '-'", tl, tc);
                    break;
                default:
                    throw ParseError(std::string("unexpected character '") + c + "'", tl, tc);
            }
        }
        out.push_back({Tok::End, "", line, col});
        return out;
    }
};

struct Parser {
    std::vector<Token> toks;
    size_t at = 0;

    const Token& peek(size_t ahead = 0) const {
        return toks[std::min(at + ahead, toks.size() - 1)];
    }
    Token take() { return toks[at == toks.size() - 1 ? at : at++]; }

    [[noreturn]] void fail(const std::string& what) const {
        const Token& t = peek();
        std::string got = t.kind == Tok::End ? "end of input" : "'" + (t.text.empty() ? describe(t.kind) : t.text) + "'";
        throw ParseError("expected " + what + ", got " + got, t.line, t.col);
    }

    static std::string describe(Tok k) {
        switch (k) {
            case Tok::LParen: return "(";
            case Tok::RParen: return ")";
            case Tok::Comma: return ",";
            case Tok::Dot: return ".";
            case Tok::Not: return "!";
            case Tok::And: return "&";
            case Tok::Or: return "|";
            case Tok::Implies: return "->";
            case Tok::Iff: return "<->";
            case Tok::ExOpen: return "<<";
            case Tok::ExClose: return ">>";
            case Tok::AllOpen: return "[[";
            case Tok::AllClose: return "]]";
            default: return "?";
        }
    }

    std::string expect_ident(const char* what) {
        if (peek().kind != Tok::Ident) fail(what);
        return take().text;
    }
    void expect(Tok k, const char* what) {
        if (peek().kind != k) fail(what);
        take();
    }

    FormulaPtr parse_iff() {
        FormulaPtr l = parse_implies();
        while (peek().kind == Tok::Iff) {
            take();
            l = f_iff(l, parse_implies());
        }
        return l;
    }
    FormulaPtr parse_implies() {
        FormulaPtr l = parse_or();
        if (peek().kind == Tok::Implies) {
            take();
            return f_implies(l, parse_implies());
        }
        return l;
    }
    FormulaPtr parse_or() {
        FormulaPtr l = parse_and();
        while (peek().kind == Tok::Or) {
            take();
            l = f_or(l, parse_and());
        }
        return l;
    }
    FormulaPtr parse_and() {
        FormulaPtr l = parse_until();
        while (peek().kind == Tok::And) {
            take();
            l = f_and(l, parse_until());
        }
        return l;
    }
    FormulaPtr parse_until() {
        FormulaPtr l = parse_unary();
        if (peek().kind == Tok::Until) {
            take();
            return f_until(l, parse_until());
        }
        if (peek().kind == Tok::Release) {
            take();
            return f_release(l, parse_until());
        }
        return l;
    }
    FormulaPtr parse_unary() {
        switch (peek().kind) {
            case Tok::Not: take(); return f_not(parse_unary());
            case Tok::Next: take(); return f_next(parse_unary());
            case Tok::Finally: take(); return f_eventually(parse_unary());
            case Tok::Globally: take(); return f_globally(parse_unary());
            case Tok::ExOpen: {
                take();
                std::string x = expect_ident("variable");
                expect(Tok::ExClose, "'>>'");
                return f_exists(x, parse_unary());
            }
            case Tok::AllOpen: {
                take();
                std::string x = expect_ident("variable");
                expect(Tok::AllClose, "']]'");
                return f_forall(x, parse_unary());
            }
            case Tok::PropExists: {
                take();
                std::string q = expect_ident("proposition");
                expect(Tok::Dot, "'.'");
                return f_prop_exists(q, parse_unary());
            }
            case Tok::PropForall: {
                take();
                std::string q = expect_ident("proposition");
                expect(Tok::Dot, "'.'");
                return f_prop_forall(q, parse_unary());
            }
            case Tok::LParen:
                // two-token lookahead separates a binding "(a,x)" from grouping
                if (peek(1).kind == Tok::Ident && peek(2).kind == Tok::Comma) {
                    take();
                    std::string agent = take().text;
                    take(); // comma
                    std::string var = expect_ident("variable");
                    expect(Tok::RParen, "')'");
                    return f_bind(agent, var, parse_unary());
                }
                return parse_primary();
            default:
                return parse_primary();
        }
    }
    FormulaPtr parse_primary() {
        switch (peek().kind) {
            case Tok::True: take(); return f_true();
            case Tok::False: take(); return f_false();
            case Tok::Ident: return f_atom(take().text);
            case Tok::LParen: {
                take();
                FormulaPtr inner = parse_iff();
                expect(Tok::RParen, "')'");
                return inner;
            }
            default:
                fail("a formula");
        }
    }
};

void enforce_dialect(const FormulaPtr& f, Dialect d) {
    switch (f->op) {
        case Op::Exists:
        case Op::Forall:
            if (d != Dialect::Sl)
                throw DialectError("strategy quantifiers are only available in the sl dialect");
            break;
        case Op::Bind:
            if (d != Dialect::Sl)
                throw DialectError("agent bindings are only available in the sl dialect");
            break;
        case Op::PropExists:
        case Op::PropForall:
            if (d != Dialect::Qptl)
                throw DialectError("proposition quantifiers are only available in the qptl dialect");
            break;
        case Op::Until:
            if (d == Dialect::Qptl && f->lhs->op != Op::True)
                throw DialectError("U is not part of the qptl dialect (only F and G)");
            break;
        case Op::Release:
            if (d == Dialect::Qptl && f->lhs->op != Op::False)
                throw DialectError("R is not part of the qptl dialect (only F and G)");
            break;
        default:
            break;
    }
    if (f->lhs) enforce_dialect(f->lhs, d);
    if (f->rhs) enforce_dialect(f->rhs, d);
}

} // namespace

FormulaPtr parse_formula(const std::string& text, Dialect dialect) {
    Lexer lex(text);
    Parser p{lex.run()};
    FormulaPtr f = p.parse_iff();
    if (p.peek().kind != Tok::End) p.fail("end of input");
    enforce_dialect(f, dialect);
    return f;
}

// ---------------------------------------------------------------------------
// Free names

namespace {
void collect_atoms(const FormulaPtr& f, std::set<std::string>& out) {
    if (f->op == Op::Atom) out.insert(f->name);
    if (f->lhs) collect_atoms(f->lhs, out);
    if (f->rhs) collect_atoms(f->rhs, out);
}
} // namespace

std::set<std::string> atoms_of(const FormulaPtr& f) {
    std::set<std::string> out;
    collect_atoms(f, out);
    return out;
}

std::set<std::string> free_names(const FormulaPtr& f, const std::set<std::string>& agents) {
    switch (f->op) {
        case Op::True:
        case Op::False:
        case Op::Atom:
            return {};
        case Op::Not:
        case Op::PropExists:
        case Op::PropForall:
            return free_names(f->lhs, agents);
        case Op::And:
        case Op::Or: {
            auto l = free_names(f->lhs, agents);
            auto r = free_names(f->rhs, agents);
            l.insert(r.begin(), r.end());
            return l;
        }
        case Op::Next: {
            auto l = free_names(f->lhs, agents);
            l.insert(agents.begin(), agents.end());
            return l;
        }
        case Op::Until:
        case Op::Release: {
            auto l = free_names(f->lhs, agents);
            auto r = free_names(f->rhs, agents);
            l.insert(r.begin(), r.end());
            l.insert(agents.begin(), agents.end());
            return l;
        }
        case Op::Exists:
        case Op::Forall: {
            auto l = free_names(f->lhs, agents);
            l.erase(f->name);
            return l;
        }
        case Op::Bind: {
            auto l = free_names(f->lhs, agents);
            if (l.count(f->agent)) {
                l.erase(f->agent);
                l.insert(f->name);
            }
            return l;
        }
    }
    return {};
}

bool is_sentence(const FormulaPtr& f, const std::set<std::string>& agents) {
    return free_names(f, agents).empty();
}

bool is_agent_closed(const FormulaPtr& f, const std::set<std::string>& agents) {
    auto fr = free_names(f, agents);
    return std::none_of(fr.begin(), fr.end(), [&](const std::string& n) { return agents.count(n) > 0; });
}

// ---------------------------------------------------------------------------
// Subformulas and subsentences

namespace {

void collect_sub(const FormulaPtr& f, FormulaSet& out) {
    out.insert(f);
    if (f->lhs) collect_sub(f->lhs, out);
    if (f->rhs) collect_sub(f->rhs, out);
}

// A sentence counts as principal when some split of its leading quantifier
// chain gives a block quantifying exactly the free variables of the rest.
bool is_principal(const FormulaPtr& f, const std::set<std::string>& agents) {
    std::vector<std::string> chain;
    FormulaPtr p = f;
    while (p->op == Op::Exists || p->op == Op::Forall) {
        chain.push_back(p->name);
        p = p->lhs;
    }
    if (chain.empty()) return false;
    std::set<std::string> block;
    p = f;
    for (const std::string& var : chain) {
        if (!block.insert(var).second) return false; // shadowed variable
        p = p->lhs;
        auto fr = free_names(p, agents);
        bool closed = std::none_of(fr.begin(), fr.end(),
                                   [&](const std::string& n) { return agents.count(n) > 0; });
        if (closed && fr == block) return true;
    }
    return false;
}

} // namespace

FormulaSet sub(const FormulaPtr& f) {
    FormulaSet out;
    collect_sub(f, out);
    return out;
}

FormulaSet snt(const FormulaPtr& f, const std::set<std::string>& agents) {
    FormulaSet out;
    for (const FormulaPtr& g : sub(f))
        if (free_names(g, agents).empty()) out.insert(g);
    return out;
}

FormulaSet psnt(const FormulaPtr& f, const std::set<std::string>& agents) {
    FormulaSet out;
    for (const FormulaPtr& g : snt(f, agents))
        if (is_principal(g, agents)) out.insert(g);
    return out;
}

// ---------------------------------------------------------------------------
// Alternation

namespace {

bool occurs_prop(const FormulaPtr& f, const std::string& q) {
    if (f->op == Op::Atom) return f->name == q;
    if ((f->op == Op::PropExists || f->op == Op::PropForall) && f->name == q) return false;
    if (f->lhs && occurs_prop(f->lhs, q)) return true;
    if (f->rhs && occurs_prop(f->rhs, q)) return true;
    return false;
}

// last: 0 none, 1 existential, 2 universal; negs: negations seen since the
// last quantifier on this path.
int alt_walk(const FormulaPtr& f, bool is_root, const std::set<std::string>& agents,
             int last, int negs) {
    if (!is_root && free_names(f, agents).empty()) return 0; // subsentences act as atoms
    switch (f->op) {
        case Op::True:
        case Op::False:
        case Op::Atom:
            return 0;
        case Op::Not:
            return alt_walk(f->lhs, false, agents, last, negs + 1);
        case Op::Next:
        case Op::Bind:
            return alt_walk(f->lhs, false, agents, last, negs);
        case Op::And:
        case Op::Or:
        case Op::Until:
        case Op::Release:
            return std::max(alt_walk(f->lhs, false, agents, last, negs),
                            alt_walk(f->rhs, false, agents, last, negs));
        case Op::Exists:
        case Op::Forall: {
            if (!free_names(f->lhs, agents).count(f->name))
                return alt_walk(f->lhs, false, agents, last, negs); // vacuous
            const int kind = f->op == Op::Exists ? 1 : 2;
            int sw = 0;
            if (last != 0 && ((kind != last) != (negs % 2 == 1))) sw = 1;
            return sw + alt_walk(f->lhs, false, agents, kind, 0);
        }
        case Op::PropExists:
        case Op::PropForall: {
            if (!occurs_prop(f->lhs, f->name))
                return alt_walk(f->lhs, false, agents, last, negs);
            const int kind = f->op == Op::PropExists ? 1 : 2;
            int sw = 0;
            if (last != 0 && ((kind != last) != (negs % 2 == 1))) sw = 1;
            return sw + alt_walk(f->lhs, false, agents, kind, 0);
        }
    }
    return 0;
}

} // namespace

int alt(const FormulaPtr& f, const std::set<std::string>& agents) {
    return alt_walk(f, true, agents, 0, 0);
}

// ---------------------------------------------------------------------------
// Normal forms

namespace {

FormulaPtr pnf_pos(const FormulaPtr& f);
FormulaPtr pnf_neg(const FormulaPtr& f);

FormulaPtr pnf_pos(const FormulaPtr& f) {
    switch (f->op) {
        case Op::True:
        case Op::False:
        case Op::Atom:
            return f;
        case Op::Not: return pnf_neg(f->lhs);
        case Op::And: return f_and(pnf_pos(f->lhs), pnf_pos(f->rhs));
        case Op::Or: return f_or(pnf_pos(f->lhs), pnf_pos(f->rhs));
        case Op::Next: return f_next(pnf_pos(f->lhs));
        case Op::Until: return f_until(pnf_pos(f->lhs), pnf_pos(f->rhs));
        case Op::Release: return f_release(pnf_pos(f->lhs), pnf_pos(f->rhs));
        case Op::Exists: return f_exists(f->name, pnf_pos(f->lhs));
        case Op::Forall: return f_forall(f->name, pnf_pos(f->lhs));
        case Op::Bind: return f_bind(f->agent, f->name, pnf_pos(f->lhs));
        case Op::PropExists: return f_prop_exists(f->name, pnf_pos(f->lhs));
        case Op::PropForall: return f_prop_forall(f->name, pnf_pos(f->lhs));
    }
    return f;
}

FormulaPtr pnf_neg(const FormulaPtr& f) {
    switch (f->op) {
        case Op::True: return f_false();
        case Op::False: return f_true();
        case Op::Atom: return f_not(f);
        case Op::Not: return pnf_pos(f->lhs);
        case Op::And: return f_or(pnf_neg(f->lhs), pnf_neg(f->rhs));
        case Op::Or: return f_and(pnf_neg(f->lhs), pnf_neg(f->rhs));
        case Op::Next: return f_next(pnf_neg(f->lhs));
        case Op::Until: return f_release(pnf_neg(f->lhs), pnf_neg(f->rhs));
        case Op::Release: return f_until(pnf_neg(f->lhs), pnf_neg(f->rhs));
        case Op::Exists: return f_forall(f->name, pnf_neg(f->lhs));
        case Op::Forall: return f_exists(f->name, pnf_neg(f->lhs));
        case Op::Bind: return f_bind(f->agent, f->name, pnf_neg(f->lhs));
        case Op::PropExists: return f_prop_forall(f->name, pnf_neg(f->lhs));
        case Op::PropForall: return f_prop_exists(f->name, pnf_neg(f->lhs));
    }
    return f;
}

} // namespace

FormulaPtr to_pnf(const FormulaPtr& f) { return pnf_pos(f); }

FormulaPtr to_enf(const FormulaPtr& f) {
    switch (f->op) {
        case Op::True:
        case Op::False:
        case Op::Atom:
            return f;
        case Op::Not: return f_not(to_enf(f->lhs));
        case Op::And: return f_and(to_enf(f->lhs), to_enf(f->rhs));
        case Op::Or: return f_or(to_enf(f->lhs), to_enf(f->rhs));
        case Op::Next: return f_next(to_enf(f->lhs));
        case Op::Until: return f_until(to_enf(f->lhs), to_enf(f->rhs));
        case Op::Release: return f_release(to_enf(f->lhs), to_enf(f->rhs));
        case Op::Exists: return f_exists(f->name, to_enf(f->lhs));
        case Op::Forall: return f_not(f_exists(f->name, f_not(to_enf(f->lhs))));
        case Op::Bind: return f_bind(f->agent, f->name, to_enf(f->lhs));
        case Op::PropExists: return f_prop_exists(f->name, to_enf(f->lhs));
        case Op::PropForall: return f_prop_forall(f->name, to_enf(f->lhs));
    }
    return f;
}

// ---------------------------------------------------------------------------
// Prefix utilities

SplitFormula split_prenex(const FormulaPtr& f) {
    SplitFormula sp;
    FormulaPtr p = f;
    while (p->op == Op::Exists || p->op == Op::Forall) {
        sp.prefix.push_back({p->op == Op::Exists, p->name});
        p = p->lhs;
    }
    if (sp.prefix.empty())
        throw NotPrenex("formula has no leading strategy quantifier: " + to_string(f));
    std::set<std::string> seen;
    for (const Quant& q : sp.prefix)
        if (!seen.insert(q.var).second)
            throw NotPrenex("variable quantified twice in one block: " + q.var);
    while (p->op == Op::Bind) {
        sp.bindings.push_back({p->agent, p->name});
        p = p->lhs;
    }
    sp.matrix = p;
    return sp;
}

std::set<std::string> prefix_existentials(const QuantPrefix& p) {
    std::set<std::string> out;
    for (const Quant& q : p)
        if (q.existential) out.insert(q.var);
    return out;
}

std::set<std::string> prefix_universals(const QuantPrefix& p) {
    std::set<std::string> out;
    for (const Quant& q : p)
        if (!q.existential) out.insert(q.var);
    return out;
}

std::set<std::string> prefix_dep(const QuantPrefix& p, const std::string& x) {
    std::set<std::string> univ;
    for (const Quant& q : p) {
        if (q.var == x) return q.existential ? univ : std::set<std::string>{};
        if (!q.existential) univ.insert(q.var);
    }
    throw UndeclaredName("variable not quantified in this block: " + x);
}

QuantPrefix prefix_dual(const QuantPrefix& p) {
    QuantPrefix out = p;
    for (Quant& q : out) q.existential = !q.existential;
    return out;
}

std::map<std::string, std::string> binding_fn(const BindPrefix& b) {
    std::map<std::string, std::string> out;
    for (const BindingPair& pair : b)
        if (!out.emplace(pair.agent, pair.var).second)
            throw ValidationError("agent bound twice in one binding block: " + pair.agent);
    return out;
}

FormulaPtr apply_prefix(const QuantPrefix& p, const BindPrefix& b, FormulaPtr matrix) {
    FormulaPtr f = std::move(matrix);
    for (auto it = b.rbegin(); it != b.rend(); ++it)
        f = f_bind(it->agent, it->var, f);
    for (auto it = p.rbegin(); it != p.rend(); ++it)
        f = it->existential ? f_exists(it->var, f) : f_forall(it->var, f);
    return f;
}

// ---------------------------------------------------------------------------
// Fragment classification

namespace {

void collect_names(const FormulaPtr& f, std::set<std::string>& out) {
    if (f->op == Op::Atom || f->op == Op::Exists || f->op == Op::Forall ||
        f->op == Op::Bind || f->op == Op::PropExists || f->op == Op::PropForall)
        out.insert(f->name);
    if (f->op == Op::Bind) out.insert(f->agent);
    if (f->lhs) collect_names(f->lhs, out);
    if (f->rhs) collect_names(f->rhs, out);
}

std::string fresh_name(const std::string& base, std::set<std::string>& used) {
    if (!used.count(base)) {
        used.insert(base);
        return base;
    }
    for (int i = 1;; ++i) {
        std::string cand = base + "_" + std::to_string(i);
        if (!used.count(cand)) {
            used.insert(cand);
            return cand;
        }
    }
}

FormulaPtr rename_var(const FormulaPtr& f, const std::string& from, const std::string& to) {
    switch (f->op) {
        case Op::True:
        case Op::False:
        case Op::Atom:
            return f;
        case Op::Exists:
        case Op::Forall:
            if (f->name == from) return f; // shadowed below this point
            return mk(f->op, f->name, "", rename_var(f->lhs, from, to), nullptr);
        case Op::Bind:
            return f_bind(f->agent, f->name == from ? to : f->name,
                          rename_var(f->lhs, from, to));
        default: {
            FormulaPtr l = f->lhs ? rename_var(f->lhs, from, to) : nullptr;
            FormulaPtr r = f->rhs ? rename_var(f->rhs, from, to) : nullptr;
            return mk(f->op, f->name, f->agent, std::move(l), std::move(r));
        }
    }
}

// Drop quantifiers and bindings that do not affect their scope.
FormulaPtr drop_vacuous(const FormulaPtr& f, const std::set<std::string>& agents) {
    FormulaPtr l = f->lhs ? drop_vacuous(f->lhs, agents) : nullptr;
    FormulaPtr r = f->rhs ? drop_vacuous(f->rhs, agents) : nullptr;
    if ((f->op == Op::Exists || f->op == Op::Forall) && !free_names(l, agents).count(f->name))
        return l;
    if (f->op == Op::Bind && !free_names(l, agents).count(f->agent))
        return l;
    if (!f->lhs) return f;
    return mk(f->op, f->name, f->agent, std::move(l), std::move(r));
}

// Push the enclosing binding context down to temporal and atomic positions,
// re-emitting it there as a full binding block. Rebindings on the way down
// override the context, so every emitted block reflects what each agent is
// actually bound to at that position.
FormulaPtr push_bindings(const FormulaPtr& f, std::map<std::string, std::string> env,
                         const std::set<std::string>& agents, std::set<std::string>& used) {
    auto emit = [&](FormulaPtr body) {
        for (auto it = env.rbegin(); it != env.rend(); ++it)
            body = f_bind(it->first, it->second, body);
        return body;
    };
    switch (f->op) {
        case Op::True:
        case Op::False:
            return f;
        case Op::Atom:
            return f; // atoms have no free agents, no block needed
        case Op::Not:
            return f_not(push_bindings(f->lhs, env, agents, used));
        case Op::And:
        case Op::Or:
            return mk(f->op, "", "",
                      push_bindings(f->lhs, env, agents, used),
                      push_bindings(f->rhs, env, agents, used));
        case Op::Next:
        case Op::Until:
        case Op::Release: {
            // goal boundary: emit the block, inner sentences restart clean
            FormulaPtr inner;
            if (f->op == Op::Next) {
                inner = f_next(push_bindings(f->lhs, {}, agents, used));
            } else {
                inner = mk(f->op, "", "",
                           push_bindings(f->lhs, {}, agents, used),
                           push_bindings(f->rhs, {}, agents, used));
            }
            return emit(std::move(inner));
        }
        case Op::Bind: {
            env[f->agent] = f->name;
            return push_bindings(f->lhs, std::move(env), agents, used);
        }
        case Op::Exists:
        case Op::Forall: {
            // avoid capturing a context variable under a same-named quantifier
            bool captures = false;
            for (const auto& [a, x] : env)
                if (x == f->name) captures = true;
            std::string var = f->name;
            FormulaPtr body = f->lhs;
            if (captures) {
                var = fresh_name(f->name, used);
                body = rename_var(body, f->name, var);
            }
            FormulaPtr inner = push_bindings(body, env, agents, used);
            return mk(f->op, var, "", std::move(inner), nullptr);
        }
        case Op::PropExists:
        case Op::PropForall:
            return mk(f->op, f->name, "", push_bindings(f->lhs, env, agents, used), nullptr);
    }
    return f;
}

// Pull quantifiers out of conjunctions and disjunctions, renaming when the
// variable also occurs on the other side. Existentials are extracted first.
FormulaPtr pull_quantifiers(const FormulaPtr& f, std::set<std::string>& used) {
    if (f->op != Op::And && f->op != Op::Or) {
        if (f->op == Op::Exists || f->op == Op::Forall || f->op == Op::Bind ||
            f->op == Op::Not || f->op == Op::PropExists || f->op == Op::PropForall)
            return mk(f->op, f->name, f->agent,
                      pull_quantifiers(f->lhs, used), nullptr);
        if (f->lhs || f->rhs)
            return mk(f->op, f->name, f->agent,
                      f->lhs ? pull_quantifiers(f->lhs, used) : nullptr,
                      f->rhs ? pull_quantifiers(f->rhs, used) : nullptr);
        return f;
    }
    FormulaPtr l = pull_quantifiers(f->lhs, used);
    FormulaPtr r = pull_quantifiers(f->rhs, used);
    const Op conn = f->op;
    QuantPrefix pulled;
    auto try_pull = [&](FormulaPtr& side, const FormulaPtr& other, bool existential) {
        if (side->op != (existential ? Op::Exists : Op::Forall)) return false;
        std::string var = side->name;
        FormulaPtr body = side->lhs;
        std::set<std::string> other_names;
        collect_names(other, other_names);
        if (other_names.count(var)) {
            std::string nv = fresh_name(var, used);
            body = rename_var(body, var, nv);
            var = nv;
        }
        pulled.push_back({existential, var});
        side = body;
        return true;
    };
    bool moved = true;
    while (moved) {
        moved = try_pull(l, r, true) || try_pull(r, l, true) ||
                try_pull(l, r, false) || try_pull(r, l, false);
    }
    FormulaPtr out = mk(conn, "", "", std::move(l), std::move(r));
    for (auto it = pulled.rbegin(); it != pulled.rend(); ++it)
        out = it->existential ? f_exists(it->var, out) : f_forall(it->var, out);
    return out;
}

FormulaPtr normalize_for_grammar(const FormulaPtr& pnf, const std::set<std::string>& agents) {
    std::set<std::string> used;
    collect_names(pnf, used);
    used.insert(agents.begin(), agents.end());
    FormulaPtr f = drop_vacuous(pnf, agents);
    f = push_bindings(f, {}, agents, used);
    f = pull_quantifiers(f, used);
    f = drop_vacuous(f, agents);
    return f;
}

// --- grammar matchers, all on positive normal form -------------------------

// How a quantified node may continue: a block over exactly the free
// variables of some tail of the chain, with the tail checked by `body_ok`.
template <class BodyCheck>
bool match_block(const FormulaPtr& f, const std::set<std::string>& agents, BodyCheck body_ok) {
    std::set<std::string> block;
    FormulaPtr p = f;
    while (p->op == Op::Exists || p->op == Op::Forall) {
        if (!block.insert(p->name).second) return false;
        p = p->lhs;
        auto fr = free_names(p, agents);
        bool agent_free = std::none_of(fr.begin(), fr.end(), [&](const std::string& n) {
            return agents.count(n) > 0;
        });
        if (agent_free && fr == block && body_ok(p)) return true;
    }
    return false;
}

// A goal: a binding block covering every agent exactly once, then a matrix.
template <class MatrixCheck>
bool match_goal(const FormulaPtr& f, const std::set<std::string>& agents, MatrixCheck matrix_ok) {
    if (f->op != Op::Bind) return false;
    std::map<std::string, std::string> bound;
    FormulaPtr p = f;
    while (p->op == Op::Bind) {
        if (!bound.emplace(p->agent, p->name).second) return false;
        p = p->lhs;
    }
    if (bound.size() != agents.size()) return false;
    for (const std::string& a : agents)
        if (!bound.count(a)) return false;
    return matrix_ok(p);
}

bool ngsl_outer(const FormulaPtr& f, const std::set<std::string>& agents);
bool bgsl_outer(const FormulaPtr& f, const std::set<std::string>& agents);
bool ogsl_outer(const FormulaPtr& f, const std::set<std::string>& agents);

bool ngsl_outer(const FormulaPtr& f, const std::set<std::string>& agents) {
    switch (f->op) {
        case Op::True:
        case Op::False:
        case Op::Atom:
            return true;
        case Op::Not:
        case Op::Next:
            return ngsl_outer(f->lhs, agents);
        case Op::And:
        case Op::Or:
        case Op::Until:
        case Op::Release:
            return ngsl_outer(f->lhs, agents) && ngsl_outer(f->rhs, agents);
        case Op::Exists:
        case Op::Forall:
            return match_block(f, agents, [&](const FormulaPtr& body) {
                return ngsl_outer(body, agents);
            });
        case Op::Bind:
            return match_goal(f, agents, [&](const FormulaPtr& m) {
                return ngsl_outer(m, agents);
            });
        default:
            return false;
    }
}

bool bgsl_goal_combo(const FormulaPtr& f, const std::set<std::string>& agents) {
    switch (f->op) {
        case Op::Not:
            return bgsl_goal_combo(f->lhs, agents);
        case Op::And:
        case Op::Or:
            return bgsl_goal_combo(f->lhs, agents) && bgsl_goal_combo(f->rhs, agents);
        case Op::Bind:
            return match_goal(f, agents, [&](const FormulaPtr& m) {
                return bgsl_outer(m, agents);
            });
        default:
            return false;
    }
}

bool bgsl_outer(const FormulaPtr& f, const std::set<std::string>& agents) {
    switch (f->op) {
        case Op::True:
        case Op::False:
        case Op::Atom:
            return true;
        case Op::Not:
        case Op::Next:
            return bgsl_outer(f->lhs, agents);
        case Op::And:
        case Op::Or:
        case Op::Until:
        case Op::Release:
            return bgsl_outer(f->lhs, agents) && bgsl_outer(f->rhs, agents);
        case Op::Exists:
        case Op::Forall:
            return match_block(f, agents, [&](const FormulaPtr& body) {
                return bgsl_goal_combo(body, agents);
            });
        case Op::Bind:
            return match_goal(f, agents, [&](const FormulaPtr& m) {
                return bgsl_outer(m, agents);
            });
        default:
            return false;
    }
}

bool ogsl_outer(const FormulaPtr& f, const std::set<std::string>& agents) {
    switch (f->op) {
        case Op::True:
        case Op::False:
        case Op::Atom:
            return true;
        case Op::Not:
        case Op::Next:
            return ogsl_outer(f->lhs, agents);
        case Op::And:
        case Op::Or:
        case Op::Until:
        case Op::Release:
            return ogsl_outer(f->lhs, agents) && ogsl_outer(f->rhs, agents);
        case Op::Exists:
        case Op::Forall:
            return match_block(f, agents, [&](const FormulaPtr& body) {
                return match_goal(body, agents, [&](const FormulaPtr& m) {
                    return ogsl_outer(m, agents);
                });
            });
        case Op::Bind:
            return match_goal(f, agents, [&](const FormulaPtr& m) {
                return ogsl_outer(m, agents);
            });
        default:
            return false;
    }
}

struct GrammarFlags {
    bool ngsl = false, bgsl = false, ogsl = false;
    int strength() const { return ogsl ? 3 : bgsl ? 2 : ngsl ? 1 : 0; }
};

GrammarFlags match_grammars(const FormulaPtr& f, const std::set<std::string>& agents) {
    GrammarFlags g;
    g.ngsl = ngsl_outer(f, agents);
    g.bgsl = bgsl_outer(f, agents);
    g.ogsl = ogsl_outer(f, agents);
    g.bgsl = g.bgsl || g.ogsl;
    g.ngsl = g.ngsl || g.bgsl;
    return g;
}

void collect_usage(const FormulaPtr& f, std::set<std::string>& agents_used,
                   std::set<std::string>& vars_used,
                   std::map<std::string, std::set<std::string>>& var_agents) {
    if (f->op == Op::Bind) {
        agents_used.insert(f->agent);
        vars_used.insert(f->name);
        var_agents[f->name].insert(f->agent);
    }
    if (f->op == Op::Exists || f->op == Op::Forall) vars_used.insert(f->name);
    if (f->lhs) collect_usage(f->lhs, agents_used, vars_used, var_agents);
    if (f->rhs) collect_usage(f->rhs, agents_used, vars_used, var_agents);
}

} // namespace

FragmentReport classify(const FormulaPtr& f, const std::set<std::string>& agents) {
    FragmentReport r;
    r.is_sentence = is_sentence(f, agents);
    r.is_agent_closed = is_agent_closed(f, agents);

    FormulaPtr base = to_pnf(f);
    FormulaPtr norm = normalize_for_grammar(base, agents);
    GrammarFlags gb = match_grammars(base, agents);
    GrammarFlags gn = match_grammars(norm, agents);
    r.ngsl = gb.ngsl || gn.ngsl;
    r.bgsl = gb.bgsl || gn.bgsl;
    r.ogsl = gb.ogsl || gn.ogsl;

    const FormulaPtr& pick = gb.strength() >= gn.strength() ? base : norm;
    std::set<std::string> agents_used, vars_used;
    std::map<std::string, std::set<std::string>> var_agents;
    collect_usage(pick, agents_used, vars_used, var_agents);
    r.n_agents_used = static_cast<int>(agents_used.size());
    r.n_vars_used = static_cast<int>(vars_used.size());
    r.fvs = std::all_of(var_agents.begin(), var_agents.end(),
                        [](const auto& kv) { return kv.second.size() <= 1; });
    int a = 0;
    for (const FormulaPtr& g : sub(pick)) a = std::max(a, alt(g, agents));
    r.alternation = a;
    return r;
}

std::string to_string(const FragmentReport& r) {
    std::ostringstream out;
    out << (r.is_sentence ? "sentence" : r.is_agent_closed ? "agent-closed" : "open");
    out << "; fragments:";
    if (r.ogsl) out << " ogsl";
    if (r.bgsl) out << " bgsl";
    if (r.ngsl) out << " ngsl";
    if (!r.ngsl) out << " none";
    out << "; " << r.n_agents_used << "-ag " << r.n_vars_used << "-var "
        << r.alternation << "-alt" << (r.fvs ? " fvs" : "");
    return out.str();
}

} // namespace slmc
