#pragma once

#include <stdexcept>
#include <string>

namespace slmc {

// Base class for everything thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Lexical or grammatical problem in an input text. Positions are 1-based.
struct ParseError : Error {
    int line;
    int col;
    ParseError(const std::string& msg, int line_, int col_)
        : Error(msg + " (line " + std::to_string(line_) + ", col " + std::to_string(col_) + ")"),
          line(line_), col(col_) {}
};

// A structurally well-formed object that violates a model invariant.
struct ValidationError : Error { using Error::Error; };

// Reference to an agent, action, state, atom or variable that was never declared.
struct UndeclaredName : Error { using Error::Error; };

// The requested dialect does not admit the parsed construct.
struct DialectError : Error { using Error::Error; };

// A formula was expected in prenex shape (quantifier block, binding block, matrix).
struct NotPrenex : Error { using Error::Error; };

// Track-based strategy translation applied outside the strategy's domain.
struct DomainMismatch : Error { using Error::Error; };

// A table strategy was queried on a track longer than its horizon.
struct HorizonExceeded : Error { using Error::Error; };

// The evaluation mode cannot cover the formula (e.g. unbounded operators at a
// fixed horizon).
struct ModeInsufficient : Error { using Error::Error; };

// Elementary evaluation requires the nested-goal grammar.
struct NotNgsl : Error { using Error::Error; };

// Equivalence checking requires both formulas to have the same free names.
struct FreeMismatch : Error { using Error::Error; };

// An enumeration would exceed the configured size guard.
struct DomainTooLarge : Error { using Error::Error; };

// Word-automaton translation expects a pure linear-time formula.
struct NotLtl : Error { using Error::Error; };

// A goal automaton needs a binding prefix covering every agent.
struct BindingIncomplete : Error { using Error::Error; };

// Sentence automaton built from a goal automaton over a different variable set.
struct PrefixMismatch : Error { using Error::Error; };

// Nondeterminization input must have purely conjunctive transitions.
struct NotUniversal : Error { using Error::Error; };

// Direction projection needs an alphabet of the form letters x directions.
struct AlphabetNotProduct : Error { using Error::Error; };

// Emptiness games are defined on nondeterministic tree automata only.
struct NotNondeterministic : Error { using Error::Error; };

// Bounded game solving got a winning predicate it cannot decide at its horizon.
struct PredicateNotBounded : Error { using Error::Error; };

// The automata engine cannot handle this formula; the message names the
// blocking subformula.
struct Unsupported : Error { using Error::Error; };

// Model checking requires a sentence (no free agents or variables).
struct NotASentence : Error { using Error::Error; };

} // namespace slmc
