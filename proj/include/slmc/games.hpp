#pragma once

// Game solving: parity games for automata emptiness, and the bounded
// dependence-vs-valuation game used to test the encasement and duality
// results.

#include <functional>
#include <optional>
#include <vector>

#include "slmc/automata.hpp"
#include "slmc/cgs.hpp"
#include "slmc/dependence.hpp"
#include "slmc/errors.hpp"

namespace slmc {

// Min-parity game: a play is won by Even when the least priority occurring
// infinitely often is even. Priorities start at 1; every vertex needs a move.
struct ParityGame {
    int n = 0;
    std::vector<bool> even_owner;
    std::vector<int> priority;
    std::vector<std::vector<int>> succ;
    int initial = 0;

    void validate() const;
};

struct ParitySolution {
    std::vector<bool> even_wins;
    // chosen successor for the owner on vertices the owner wins, -1 elsewhere
    std::vector<int> strategy;
};

// Zielonka recursion with memoryless strategy extraction; the result is
// certified by verify_parity_solution before it is returned.
ParitySolution solve_parity(const ParityGame& g);

// Checks the strategy is winning wherever the solution claims a win: in the
// strategy-restricted graph no odd (resp. even) cycle is reachable inside the
// claimed region.
bool verify_parity_solution(const ParityGame& g, const ParitySolution& sol);

// Attractor-based solver for games whose priorities all lie in {1, 2};
// an independent cross-check for the general recursion.
std::vector<bool> buchi_solve(const ParityGame& g);

// Emptiness of a nondeterministic parity tree automaton via the usual
// automaton-vs-pathfinder game; a nonempty language yields a regular witness.
std::optional<RegularTree> npt_emptiness(const TreeAutomaton& a);

// Dependence-vs-valuation game: at a state t the even player commits to an
// action dependence map theta, then the odd player resolves the universals
// with some valuation v, moving to the successor under theta(v) read through
// the binding.
struct DvvGame {
    const Cgs* g = nullptr;
    StateId s0 = 0;
    QuantPrefix prefix;
    BindPrefix bind;
    std::vector<DependenceMap> maps; // canonical enumeration order
};

DvvGame build_dvv_game(const Cgs& g, StateId s, const QuantPrefix& p, const BindPrefix& b);

// Successor states of the odd position (t, maps[map_idx]), sorted, one entry
// per distinct successor.
std::vector<StateId> dvv_odd_succ(const DvvGame& d, StateId t, int map_idx);

// Winning predicate on plays, determined by the prefix of length horizon+1.
using PlayPredicate = std::function<bool(const Track&)>;

// The two winning conditions computed from their own definitions (not via
// determinacy): even needs a scheme beating every odd reply, odd needs a
// reply to every scheme.
bool dvv_even_wins(const DvvGame& d, const PlayPredicate& target, int horizon);
bool dvv_odd_wins(const DvvGame& d, const PlayPredicate& target, int horizon);

// Exists an elementary map (one action dependence map per track up to the
// horizon) whose induced plays all satisfy the predicate, under every
// universal strategy valuation; checked by direct enumeration.
bool dvv_encasement_exists(const DvvGame& d, const PlayPredicate& target, int horizon);

} // namespace slmc
