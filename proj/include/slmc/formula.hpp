#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "errors.hpp"

namespace slmc {

// Strategy-logic formulas. F and G are parser sugar: "F a" becomes
// "true U a" and "G a" becomes "false R a", so the AST never stores them.
enum class Op {
    True,
    False,
    Atom,
    Not,
    And,
    Or,
    Next,       // X a
    Until,      // a U b
    Release,    // a R b
    Exists,     // <<x>> a      (strategy quantifier)
    Forall,     // [[x]] a
    Bind,       // (agent, x) a
    PropExists, // exists q. a  (proposition quantifier, qptl dialect)
    PropForall, // forall q. a
};

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
    Op op = Op::True;
    std::string name;   // Atom: proposition; quantifiers: bound name; Bind: variable
    std::string agent;  // Bind only
    FormulaPtr lhs;     // unary operators use lhs only
    FormulaPtr rhs;
};

FormulaPtr f_true();
FormulaPtr f_false();
FormulaPtr f_atom(const std::string& name);
FormulaPtr f_not(FormulaPtr a);
FormulaPtr f_and(FormulaPtr a, FormulaPtr b);
FormulaPtr f_or(FormulaPtr a, FormulaPtr b);
FormulaPtr f_next(FormulaPtr a);
FormulaPtr f_until(FormulaPtr a, FormulaPtr b);
FormulaPtr f_release(FormulaPtr a, FormulaPtr b);
FormulaPtr f_eventually(FormulaPtr a); // true U a
FormulaPtr f_globally(FormulaPtr a);   // false R a
FormulaPtr f_implies(FormulaPtr a, FormulaPtr b); // !a | b
FormulaPtr f_iff(FormulaPtr a, FormulaPtr b);     // (!a|b) & (!b|a)
FormulaPtr f_exists(const std::string& var, FormulaPtr a);
FormulaPtr f_forall(const std::string& var, FormulaPtr a);
FormulaPtr f_bind(const std::string& agent, const std::string& var, FormulaPtr a);
FormulaPtr f_prop_exists(const std::string& prop, FormulaPtr a);
FormulaPtr f_prop_forall(const std::string& prop, FormulaPtr a);

// Total structural order; equal(a,b) iff compare(a,b)==0.
int compare(const FormulaPtr& a, const FormulaPtr& b);
bool equal(const FormulaPtr& a, const FormulaPtr& b);

struct FormulaLess {
    bool operator()(const FormulaPtr& a, const FormulaPtr& b) const {
        return compare(a, b) < 0;
    }
};
using FormulaSet = std::set<FormulaPtr, FormulaLess>;
template <class V> using FormulaMap = std::map<FormulaPtr, V, FormulaLess>;

// Round-trippable concrete syntax: parse_formula(to_string(f)) == f.
std::string to_string(const FormulaPtr& f);

enum class Dialect { Sl, Ltl, Qptl };

// Concrete syntax, by decreasing binding strength:
//   atoms, true, false, (a)
//   ! X F G <<x>> [[x]] (agent,x) exists q. forall q.
//   U R    (right-associative)
//   &
//   |
//   ->     (right-associative)
//   <->
// The ltl dialect admits only boolean and temporal operators; qptl admits
// proposition quantifiers plus X, F, G and booleans (no U, R, strategy
// quantifiers or bindings).
FormulaPtr parse_formula(const std::string& text, Dialect dialect = Dialect::Sl);

// Names of all atomic propositions occurring in f.
std::set<std::string> atoms_of(const FormulaPtr& f);

// Free agents and variables. Temporal operators make every agent free in
// their scope; a binding (a,x) replaces a free agent a with the variable x;
// quantifiers remove their variable.
std::set<std::string> free_names(const FormulaPtr& f, const std::set<std::string>& agents);
bool is_sentence(const FormulaPtr& f, const std::set<std::string>& agents);
bool is_agent_closed(const FormulaPtr& f, const std::set<std::string>& agents);

// All subformulas of f, including f itself (deduplicated structurally).
FormulaSet sub(const FormulaPtr& f);
// Subformulas with no free names at all.
FormulaSet snt(const FormulaPtr& f, const std::set<std::string>& agents);
// Sentences of the shape (quantifier block)(body) where the block is
// nonempty, quantifies each variable once, and covers exactly the free
// variables of the agent-closed body.
FormulaSet psnt(const FormulaPtr& f, const std::set<std::string>& agents);

// Maximum number of quantifier alternations along any syntax path, counting
// existential/universal switches and same-kind pairs separated by an odd
// number of negations. Vacuous quantifiers are transparent; proper
// subsentences count as atoms.
int alt(const FormulaPtr& f, const std::set<std::string>& agents);

// Positive normal form: negation applied to atoms only (duals for booleans,
// X/U/R, quantifiers and proposition quantifiers; bindings are transparent).
FormulaPtr to_pnf(const FormulaPtr& f);
// Existential normal form: universal strategy quantifiers rewritten through
// double negation, leaving only <<x>>.
FormulaPtr to_enf(const FormulaPtr& f);

struct Quant {
    bool existential = true;
    std::string var;
    bool operator==(const Quant&) const = default;
};
using QuantPrefix = std::vector<Quant>;

struct BindingPair {
    std::string agent;
    std::string var;
    bool operator==(const BindingPair&) const = default;
};
using BindPrefix = std::vector<BindingPair>;

struct SplitFormula {
    QuantPrefix prefix;   // maximal leading quantifier block (nonempty)
    BindPrefix bindings;  // maximal binding block after it (possibly empty)
    FormulaPtr matrix;
};

// Splits a prenex formula into quantifier block, binding block and matrix.
// Throws NotPrenex when there is no leading quantifier or a variable is
// quantified twice in the block.
SplitFormula split_prenex(const FormulaPtr& f);

std::set<std::string> prefix_existentials(const QuantPrefix& p);
std::set<std::string> prefix_universals(const QuantPrefix& p);
// Universal variables x depends on: the universals preceding x in the block
// when x is existential, empty when x is universal. Throws UndeclaredName
// when x is not quantified in the block.
std::set<std::string> prefix_dep(const QuantPrefix& p, const std::string& x);
// Swap every quantifier kind.
QuantPrefix prefix_dual(const QuantPrefix& p);
// Agent -> variable map; throws ValidationError when an agent is bound twice.
std::map<std::string, std::string> binding_fn(const BindPrefix& b);
// Rebuild prefix . bindings . matrix as a formula.
FormulaPtr apply_prefix(const QuantPrefix& p, const BindPrefix& b, FormulaPtr matrix);

struct FragmentReport {
    bool is_sentence = false;
    bool is_agent_closed = false;
    bool ngsl = false; // every quantifier block sits on an agent-closed scope
    bool bgsl = false; // blocks followed by boolean combinations of goals
    bool ogsl = false; // blocks followed by a single goal
    bool fvs = false;  // each variable is bound to at most one agent
    int n_agents_used = 0;
    int n_vars_used = 0;
    int alternation = 0;
};

// Grammar membership and resource counts. Matching is attempted both on the
// positive normal form as given and on a normalized variant that drops
// vacuous quantifiers and bindings, distributes bindings over boolean
// connectives when that exposes inner quantifiers, and pulls quantifiers out
// of boolean combinations with capture-avoiding renaming. Counts are taken
// on whichever variant matched the strongest fragment.
FragmentReport classify(const FormulaPtr& f, const std::set<std::string>& agents);
std::string to_string(const FragmentReport& r);

} // namespace slmc
