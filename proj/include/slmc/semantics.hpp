#pragma once

// Enumerative evaluation of strategy logic at a point (structure, strategy
// assignment, state). Two notions of truth are implemented: the classic one,
// where each quantifier ranges over whole strategies, and the elementary one,
// where an existential block must be witnessed by per-track dependence maps.
// Both are decided by exhaustive search over a finite strategy universe
// picked by the evaluation mode, so verdicts carry a flag telling whether the
// search space was the full one for the formula at hand.

#include <optional>
#include <string>

#include "slmc/cgs.hpp"
#include "slmc/dependence.hpp"
#include "slmc/formula.hpp"

namespace slmc {

// Three-valued verdicts: Unknown shows up only where a mode cannot commit,
// never from the exact-horizon evaluation of a next-only formula.
enum class Truth { False, Unknown, True };

Truth truth_not(Truth a);
Truth truth_and(Truth a, Truth b);
Truth truth_or(Truth a, Truth b);
std::string to_string(Truth t);

struct EvalMode {
    enum class Kind {
        // Quantifiers range over action tables on the tracks of length up to
        // `horizon` from the current state. Exact for next-only formulas
        // whose nesting depth fits the horizon; anything else is refused.
        ExactHorizon,
        // Quantifiers range over transducers with `memory` states. Sound for
        // neither direction in general, hence verdicts come back flagged.
        BoundedMemory,
    };

    Kind kind = Kind::ExactHorizon;
    int horizon = 0;
    int memory = 1;
    // ExactHorizon only: decide each quantifier block by building a Skolem
    // dependence map over the strategy universe instead of trusting the plain
    // nested search, then replay the map against every universal choice. The
    // verdict must match; a mismatch means the block search is broken and
    // raises an error.
    bool skolem = false;

    static EvalMode exact_horizon(int h, bool use_skolem = false);
    static EvalMode bounded_memory(int m);
};

struct Verdict {
    Truth value = Truth::Unknown;
    // True when the strategy universe searched was a proper restriction, so
    // the value speaks about the restricted semantics only.
    bool restricted = false;
    std::string note;
};

// Nesting depth of X when the formula has no U or R; nullopt otherwise.
std::optional<int> temporal_xdepth(const FormulaPtr& f);

// Classic semantics. The assignment must cover every free agent and variable
// of the formula (FreeMismatch otherwise); table strategies in it must be
// anchored at s with enough horizon left. ExactHorizon refuses formulas it
// cannot evaluate exactly (ModeInsufficient).
Verdict eval_classic(const Cgs& g, const FormulaPtr& f, const Assignment& chi, StateId s,
                     const EvalMode& mode);

// Elementary semantics: every maximal quantifier block is interpreted by a
// single map that picks, track by track, each existential's action from the
// actions the universals it may observe took at that same track. Defined for
// formulas in the nested-goal fragment (NotNgsl otherwise) and decided only
// under ExactHorizon; BoundedMemory yields Unknown.
Verdict eval_elementary(const Cgs& g, const FormulaPtr& f, const Assignment& chi, StateId s,
                        const EvalMode& mode);

struct EquivalenceReport {
    Verdict classic;
    Verdict elementary;
    bool agree = false; // both defined and equal
};

// Evaluate both ways at the same point.
EquivalenceReport check_equivalence(const Cgs& g, const FormulaPtr& f, const Assignment& chi,
                                    StateId s, const EvalMode& mode);

} // namespace slmc
