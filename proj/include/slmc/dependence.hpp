#pragma once

// Dependence maps over finite domains: Skolem-table representation,
// counting, canonical enumeration, adjoints, and the incidence and
// dualization constructions.

#include <boost/multiprecision/cpp_int.hpp>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "slmc/errors.hpp"
#include "slmc/formula.hpp"

namespace slmc {

using BigInt = boost::multiprecision::cpp_int;

// A total map from variable names to elements of {0..dsize-1}.
using Valuation = std::map<std::string, int>;

Valuation restrict_to(const Valuation& v, const std::set<std::string>& vars);

// Every total valuation of vars over {0..dsize-1}. The order is a contract:
// ascending when the values are read along the sorted variable names, with
// the last name varying fastest.
std::vector<Valuation> all_valuations(const std::set<std::string>& vars, int dsize);

// Position of v within all_valuations(keys(v), dsize).
long valuation_rank(const Valuation& v, int dsize);

// Choices of one existential variable, keyed by valuations of the variables
// it is allowed to observe.
struct SkolemTable {
    std::string var;
    std::set<std::string> dep;
    std::map<Valuation, int> choice;
};

// A dependence map for a quantification prefix: assigns to every valuation of
// the universal variables a full valuation, acting as the identity on the
// universals and reading only the declared dependencies for each existential.
// Both properties hold by construction of the table form; validate() checks
// the bookkeeping is intact after manual edits.
struct DependenceMap {
    QuantPrefix prefix;
    int dsize = 1;
    std::vector<SkolemTable> tables; // one per existential, in prefix order

    Valuation apply(const Valuation& universals) const;
    void validate() const;
};

BigInt count_dependence_maps(const QuantPrefix& p, int dsize);

// Restartable generator over all dependence maps in canonical order: earlier
// existentials are more significant, and within one table the entry at the
// lower-ranked dependence valuation is more significant.
class DepMapEnum {
  public:
    DepMapEnum(const QuantPrefix& p, int dsize);
    std::optional<DependenceMap> next();

  private:
    DependenceMap base_;
    std::vector<int> digits_;
    bool done_ = false;
};

// Materialized enumeration; refuses to build more than bound maps.
std::vector<DependenceMap> enumerate_dependence_maps(const QuantPrefix& p, int dsize,
                                                     const BigInt& bound = BigInt(1) << 20);

// A domain whose elements are the functions {0..tsize-1} -> {0..dsize-1},
// indexed with t = 0 as the most significant digit.
struct FunctionDomain {
    int tsize = 1;
    int dsize = 1;

    int size() const;
    int eval(int fidx, int t) const;
    int make(const std::vector<int>& values) const;
};

// One action-level dependence map per index t.
struct AdjointMap {
    FunctionDomain fd;
    QuantPrefix prefix;
    std::vector<DependenceMap> per_index;
};

// Two universal valuations that agree at index t but drive the map to
// different outputs of var at t.
struct NotElementaryWitness {
    Valuation g1, g2;
    int t = 0;
    std::string var;
};

// Factor a map over a function domain into per-index maps, when the value of
// each existential at index t depends only on the arguments' values at t.
std::variant<AdjointMap, NotElementaryWitness> adjoint(const DependenceMap& theta,
                                                       const FunctionDomain& fd);

// Inverse direction; always a valid dependence map over the function domain.
DependenceMap from_adjoint(const AdjointMap& a);

// A valuation fixed by theta (over p) and theta_bar (over the dual of p)
// simultaneously, built by recursion on the trailing quantifier block.
Valuation incidence(const QuantPrefix& p, int dsize, const DependenceMap& theta,
                    const DependenceMap& theta_bar);

struct DualizeResult {
    // covered: map is over dual(p) and lands in the target set under every
    // valuation of its universals. Otherwise: map is over p and misses the
    // target set under every valuation.
    bool covered = false;
    DependenceMap map;
};

DualizeResult dualize_dependence(const QuantPrefix& p, int dsize,
                                 const std::set<Valuation>& target,
                                 const BigInt& bound = BigInt(1) << 20);

} // namespace slmc
