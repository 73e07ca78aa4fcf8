#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "errors.hpp"

namespace slmc {

using StateId = int;

// A concurrent game structure: all agents pick an action simultaneously and
// the joint decision determines the unique successor state.
struct Cgs {
    std::string name;
    std::vector<std::string> agents;  // declaration order fixes decision ranks
    std::vector<std::string> actions; // shared by all agents
    std::vector<std::string> states;
    std::set<std::string> atoms;
    std::vector<std::set<std::string>> label; // per state
    StateId initial = 0;
    // trans[s][decision rank] = successor; the rank reads the action indices
    // of the agents in declaration order as mixed-radix digits, first agent
    // most significant.
    std::vector<std::vector<StateId>> trans;

    int agent_index(const std::string& a) const;
    int action_index(const std::string& c) const;
    StateId state_index(const std::string& s) const;

    int decision_count() const;
    int decision_rank(const std::vector<int>& action_idx) const;
    std::vector<int> decision_unrank(int rank) const;
    StateId step(StateId s, const std::vector<int>& action_idx) const;
    StateId step_rank(StateId s, int rank) const;
    std::vector<StateId> successors(StateId s) const; // deduplicated, sorted

    void validate() const; // throws ValidationError
};

// A decision by name, mainly for input and display.
using Decision = std::map<std::string, std::string>;
StateId step_decision(const Cgs& g, StateId s, const Decision& d);

// Finite nonempty state sequence.
using Track = std::vector<StateId>;

// Ultimately periodic infinite state sequence.
struct Path {
    Track stem; // may be empty
    Track loop; // nonempty
};
StateId path_at(const Path& p, long i);
// Semantic equality: the unrolled sequences agree (checked beyond both stems
// plus one least-common-multiple round of the loops).
bool path_equal(const Path& a, const Path& b);

// A strategy recorded as an explicit action table over the tracks that start
// at its anchor and have length between 1 and the horizon.
struct TableStrategy {
    StateId anchor = 0;
    int horizon = 0;
    std::map<Track, int> act; // track -> action index
};

// A finite-memory strategy. Memory starts in m0, consumes the states of the
// track after the anchor, and the action is read off the memory reached and
// the last state.
struct TransducerStrategy {
    int mem = 1;
    int m0 = 0;
    std::vector<std::vector<int>> upd; // [memory][state] -> memory
    std::vector<std::vector<int>> out; // [memory][state] -> action index
};

struct Strategy {
    std::variant<TableStrategy, TransducerStrategy> rep;
    bool is_table() const { return std::holds_alternative<TableStrategy>(rep); }
    const TableStrategy& table() const { return std::get<TableStrategy>(rep); }
    const TransducerStrategy& transducer() const { return std::get<TransducerStrategy>(rep); }
};
using StrategyPtr = std::shared_ptr<const Strategy>;

// Action prescribed on a track whose first state is the strategy's anchor.
// Throws HorizonExceeded when a table strategy runs out of entries.
int strategy_action(const Cgs& g, const Strategy& s, const Track& rho);

// The strategy after the given track has happened: a table strategy keeps
// the entries extending rho (rebased to its last state); a transducer
// advances its initial memory. Throws DomainMismatch when rho does not start
// at the anchor (tables) or is empty.
Strategy translate_strategy(const Cgs& g, const Strategy& s, const Track& rho);

// Variables and agents mapped to shared strategies.
struct Assignment {
    std::map<std::string, StrategyPtr> entries;
    const StrategyPtr& at(const std::string& name) const;
    bool has(const std::string& name) const { return entries.count(name) > 0; }
    bool complete(const std::set<std::string>& agents) const;
};

Assignment redefine(const Assignment& chi, const std::string& name, StrategyPtr s);
Assignment translate_assignment(const Cgs& g, const Assignment& chi, const Track& rho);

// Prefix of the unique outcome when every agent has a strategy anchored at s:
// returns the track of length horizon+1.
Track play_bounded(const Cgs& g, const Assignment& chi, StateId s, int horizon);
// Full outcome for transducer strategies, as a lasso.
Path play_unbounded(const Cgs& g, const Assignment& chi, StateId s);

// The assignment and state reached after i steps of the play from s.
std::pair<Assignment, StateId> global_translation(const Cgs& g, const Assignment& chi,
                                                  StateId s, int i);

// Per-state owners: an agent whose action alone determines the successor.
// Returns the owner map when every state has one, otherwise nullopt.
std::optional<std::vector<int>> turn_based_owners(const Cgs& g);

// All tracks from s with length in [min_len, max_len], ordered by length
// then lexicographically by state ids. The order is part of the contract:
// enumeration-based engines index track tables against it.
std::vector<Track> tracks_from(const Cgs& g, StateId s, int min_len, int max_len);

// Built-in example structures (case-insensitive lookup): prs, pd, sv, rdc,
// g1, g2.
const Cgs& fixture(const std::string& name);
std::vector<std::string> fixture_names();

// Text format load/store. store_cgs emits a canonical form; loading it back
// reproduces the structure exactly.
Cgs load_cgs(const std::string& text);
std::string store_cgs(const Cgs& g);

} // namespace slmc
