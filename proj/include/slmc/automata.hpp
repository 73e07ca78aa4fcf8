#pragma once

// Word and tree automata: the LTL tableau translation, dualization, the
// strategy-tree constructions, co-Büchi nondeterminization, direction
// projection, and the structural recursion building alternating parity
// automata for full formulas.

#include <functional>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "slmc/cgs.hpp"
#include "slmc/dependence.hpp"
#include "slmc/errors.hpp"
#include "slmc/formula.hpp"

namespace slmc {

// Finite word automaton. Nondeterministic runs pick one successor per step;
// universal runs follow all of them. Büchi accepts when fin is visited
// infinitely often along the run, co-Büchi when it is visited finitely often
// along every branch of the run.
struct WordAutomaton {
    bool universal = false;
    bool cobuchi = false;
    int n_letters = 0;
    int n_states = 0;
    std::set<int> initial;
    std::map<std::pair<int, int>, std::set<int>> delta; // (state, letter) -> successors
    std::set<int> fin;

    void validate() const;
};

// Letters over an atom list are bit masks, atom 0 in the lowest bit.
int letter_index(const std::set<std::string>& present, const std::vector<std::string>& atoms);

// Tableau translation; accepts exactly the models of psi over 2^atoms.
WordAutomaton ltl_to_nbw(const FormulaPtr& psi, const std::vector<std::string>& atoms);

// Swap nondeterministic/universal and Büchi/co-Büchi; the language flips to
// the complement.
WordAutomaton dualize_word(const WordAutomaton& a);

// Membership of the ultimately periodic word stem . loop^omega.
bool word_accepts_lasso(const WordAutomaton& a, const std::vector<int>& stem,
                        const std::vector<int>& loop);

// Negation-free transition formula over (direction, state) moves.
struct PosBool {
    enum class Kind { True, False, Move, And, Or };
    Kind kind = Kind::True;
    int dir = 0;
    int state = 0;
    std::vector<PosBool> kids;

    static PosBool yes();
    static PosBool no();
    static PosBool move(int dir, int state);
    static PosBool all(std::vector<PosBool> kids); // flattens; empty = true
    static PosBool any(std::vector<PosBool> kids); // flattens; empty = false
};

std::string to_string(const PosBool& b);
bool is_conjunctive(const PosBool& b);
// Swap and/or and the two constants, leaving moves in place.
PosBool dual_posbool(const PosBool& b);
// Disjunctive normal form: one move set per disjunct; an empty list means the
// formula is unsatisfiable, an empty set inside means it is trivially true.
std::vector<std::set<std::pair<int, int>>> dnf(const PosBool& b);
// Substitute each move by a new formula (used by dualization and projection).
PosBool map_moves(const PosBool& b, const std::function<PosBool(int, int)>& fn);

// Alternating parity tree automaton over |Dir|-branching trees. The parity
// chain is inclusion-ordered with the last set holding every state; a branch
// of a run is accepted when the least chain level visited infinitely often is
// even (1-based).
struct TreeAutomaton {
    int n_letters = 0;
    // when positive, letters factor as (sigma, dir): letter = sigma * n_dirs + dir
    int sigma_letters = 0;
    int n_dirs = 0;
    int n_states = 0;
    int initial = 0;
    std::vector<std::vector<PosBool>> delta; // [state][letter]
    std::vector<std::set<int>> chain;

    void validate() const;
    int priority(int q) const; // least 1-based chain level containing q
};

// Finite-state description of a labeled tree: node m carries letter[m], and
// the child of m in direction d is move[m][d].
struct RegularTree {
    int m0 = 0;
    std::vector<int> letter;
    std::vector<std::vector<int>> move;
};

// Runs a co-Büchi word automaton along every branch of the strategy-valuation
// tree: directions are the model states, letters pair an action valuation of
// vars with a claimed current state.
TreeAutomaton goal_uct(const Cgs& g, const BindPrefix& bind, const WordAutomaton& ucw,
                       const std::vector<std::string>& vars);

// Lifts the goal automaton to letters pairing a dependence map with a state;
// the transition conjoins the goal transition over every universal valuation.
TreeAutomaton sentence_uct(const Cgs& g, const TreeAutomaton& goal, const QuantPrefix& prefix,
                           const std::vector<std::string>& vars);

// Whether every transition is a choice between single moves per direction.
bool is_nondet_tree(const TreeAutomaton& a);

// Ranking construction turning a conjunctive co-Büchi tree automaton into a
// language-equivalent nondeterministic Büchi one.
TreeAutomaton nondeterminize_cobuchi(const TreeAutomaton& u);

// Bakes the direction component of a product alphabet into the states, with
// d0 the direction assumed at the root.
TreeAutomaton project_direction(const TreeAutomaton& n, int d0);

// Structural construction over a formula in existential normal form; the
// alphabet is fixed to action valuations of vars paired with model states.
// Throws Unsupported when an existential sits above an automaton that the
// co-Büchi nondeterminization cannot digest.
TreeAutomaton formula_apt(const Cgs& g, const FormulaPtr& f, const std::vector<std::string>& vars);

// Full pipeline for a sentence at a state: the one-goal prefix route when the
// sentence has that shape, the structural route otherwise.
TreeAutomaton sentence_npt(const Cgs& g, StateId s, const FormulaPtr& sentence);

// Textual listings for inspection and golden tests.
std::string dump_aut(const WordAutomaton& a);
std::string dump_aut(const TreeAutomaton& a);

} // namespace slmc
