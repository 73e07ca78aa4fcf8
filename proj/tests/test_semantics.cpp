#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "slmc/cgs.hpp"
#include "slmc/formula.hpp"
#include "slmc/semantics.hpp"

using namespace slmc;

namespace {

FormulaPtr sl(const std::string& text) { return parse_formula(text, Dialect::Sl); }

Truth classic(const std::string& game, const std::string& text, int h) {
    const Cgs& g = fixture(game);
    return eval_classic(g, sl(text), Assignment{}, g.initial, EvalMode::exact_horizon(h))
        .value;
}

Truth elementary(const std::string& game, const std::string& text, int h) {
    const Cgs& g = fixture(game);
    return eval_elementary(g, sl(text), Assignment{}, g.initial, EvalMode::exact_horizon(h))
        .value;
}

} // namespace

TEST_SUITE("semantics") {

TEST_CASE("three-valued connectives") {
    const Truth F = Truth::False, U = Truth::Unknown, T = Truth::True;
    CHECK(truth_not(T) == F);
    CHECK(truth_not(F) == T);
    CHECK(truth_not(U) == U);
    CHECK(truth_and(T, U) == U);
    CHECK(truth_and(F, U) == F);
    CHECK(truth_or(T, U) == T);
    CHECK(truth_or(F, U) == U);
    CHECK(truth_or(F, F) == F);
    CHECK(to_string(U) == "unknown");
}

TEST_CASE("next-depth measurement") {
    CHECK(*temporal_xdepth(sl("p")) == 0);
    CHECK(*temporal_xdepth(sl("X p")) == 1);
    CHECK(*temporal_xdepth(sl("X X p & X q")) == 2);
    CHECK(*temporal_xdepth(sl("<<x>> (alpha,x) X X p")) == 2);
    CHECK(!temporal_xdepth(sl("p U q")).has_value());
    CHECK(!temporal_xdepth(sl("X (p R q)")).has_value());
}

TEST_CASE("exact evaluation refuses what it cannot settle exactly") {
    const Cgs& g = fixture("rdc");
    CHECK_THROWS_AS(eval_classic(g, sl("<<x>> (alpha,x) F p"), Assignment{}, g.initial,
                                 EvalMode::exact_horizon(3)),
                    ModeInsufficient);
    CHECK_THROWS_AS(eval_classic(g, sl("<<x>> (alpha,x) X X p"), Assignment{}, g.initial,
                                 EvalMode::exact_horizon(1)),
                    ModeInsufficient);
    CHECK_THROWS_AS(eval_classic(g, sl("<<x>> (alpha,x) X q"), Assignment{}, g.initial,
                                 EvalMode::exact_horizon(1)),
                    UndeclaredName);
    // free names need strategies up front
    CHECK_THROWS_AS(eval_classic(g, sl("(alpha,x) X p"), Assignment{}, g.initial,
                                 EvalMode::exact_horizon(1)),
                    FreeMismatch);
}

TEST_CASE("an open formula evaluates once its free variable is supplied") {
    const Cgs& g = fixture("rdc");
    TableStrategy t;
    t.anchor = g.initial;
    t.horizon = 1;
    t.act[{g.initial}] = g.action_index("t");
    Assignment chi;
    chi.entries["x"] = std::make_shared<Strategy>(Strategy{std::move(t)});
    const Verdict v = eval_classic(g, sl("(alpha,x) X p"), chi, g.initial,
                                   EvalMode::exact_horizon(1));
    CHECK(v.value == Truth::True);
    CHECK(!v.restricted);
}

TEST_CASE("shared-variable game satisfies the cross-binding sentence") {
    CHECK(classic("sv",
                  "<<x>> [[y]] <<z>> ((alpha,x) (beta,y) X p & (alpha,y) (beta,z) X q)",
                  1) == Truth::True);
}

TEST_CASE("the three-player coordination sentence separates the twin games") {
    const std::string phi =
        "[[x]] <<y>> [[z]] (alpha,x) (beta,y) (gamma,z) X p";
    CHECK(classic("g1", phi, 1) == Truth::True);
    CHECK(classic("g2", phi, 1) == Truth::False);
}

TEST_CASE("single-goal prefixes cannot separate the twin games") {
    // every way of quantifying one goal, over either polarity of the target,
    // comes out the same on both structures
    const std::string prefixes[] = {
        "[[x]] [[z]] <<y>>",
        "<<x>> <<y>> [[z]]",
        "[[y]] [[z]] <<x>>",
    };
    const std::string goals[] = {"X p", "X !p"};
    for (const std::string& pre : prefixes)
        for (const std::string& goal : goals) {
            const std::string phi =
                pre + " (alpha,x) (beta,y) (gamma,z) " + goal;
            CHECK(classic("g1", phi, 1) == Truth::True);
            CHECK(classic("g2", phi, 1) == Truth::True);
        }
}

TEST_CASE("binding two agents to one variable shares the strategy") {
    CHECK(classic("sv", "<<x>> (alpha,x) (beta,x) X p", 1) == Truth::True);
    CHECK(classic("sv", "<<x>> (alpha,x) (beta,x) X q", 1) == Truth::False);
    CHECK(classic("sv", "<<x>> <<y>> (alpha,x) (beta,y) X q", 1) == Truth::True);
}

TEST_CASE("classic truth survives a larger horizon than needed") {
    const std::string phi =
        "[[x]] <<y>> [[z]] (alpha,x) (beta,y) (gamma,z) X p";
    for (int h = 1; h <= 3; ++h) {
        CHECK(classic("g1", phi, h) == Truth::True);
        CHECK(classic("g2", phi, h) == Truth::False);
    }
}

TEST_CASE("the reduction game tells classic and elementary truth apart") {
    const std::string phi1 =
        "[[x]] <<y>> (((alpha,x) X p <-> (alpha,y) X !p)"
        " & ((alpha,x) X X p <-> (alpha,y) X X p))";
    const std::string phi2 =
        "[[x]] (alpha,x) X ((<<x>> (alpha,x) X p) & (<<x>> (alpha,x) X !p))";
    const std::string both = "(" + phi1 + ") & (" + phi2 + ")";

    CHECK(classic("rdc", phi1, 2) == Truth::True);
    CHECK(classic("rdc", phi2, 2) == Truth::True);
    CHECK(classic("rdc", both, 2) == Truth::True);

    // track-local reactions cannot copy an action taken on the road not
    // taken, so the first conjunct loses its witness
    CHECK(elementary("rdc", phi1, 2) == Truth::False);
    CHECK(elementary("rdc", phi2, 2) == Truth::True);
    CHECK(elementary("rdc", both, 2) == Truth::False);
}

TEST_CASE("the weakened reduction sentence is elementarily true") {
    const std::string phi =
        "(<<x>> (alpha,x) X (p & X p) <-> <<x>> (alpha,x) X (!p & X p))"
        " & (<<x>> (alpha,x) X (p & X !p) <-> <<x>> (alpha,x) X (!p & X !p))";
    CHECK(elementary("rdc", phi, 2) == Truth::True);
    CHECK(classic("rdc", phi, 2) == Truth::True);
}

TEST_CASE("equivalence report on the separating and agreeing cases") {
    const Cgs& g1 = fixture("g1");
    const FormulaPtr star =
        sl("[[x]] <<y>> [[z]] (alpha,x) (beta,y) (gamma,z) X p");
    const EquivalenceReport a =
        check_equivalence(g1, star, Assignment{}, g1.initial, EvalMode::exact_horizon(1));
    CHECK(a.agree);
    CHECK(a.classic.value == Truth::True);

    const Cgs& rdc = fixture("rdc");
    const FormulaPtr tb = sl(
        "([[x]] <<y>> (((alpha,x) X p <-> (alpha,y) X !p)"
        " & ((alpha,x) X X p <-> (alpha,y) X X p)))"
        " & ([[x]] (alpha,x) X ((<<x>> (alpha,x) X p) & (<<x>> (alpha,x) X !p)))");
    const EquivalenceReport b =
        check_equivalence(rdc, tb, Assignment{}, rdc.initial, EvalMode::exact_horizon(2));
    CHECK(!b.agree);
    CHECK(b.classic.value == Truth::True);
    CHECK(b.elementary.value == Truth::False);
}

TEST_CASE("elementary evaluation rejects agent-open nested blocks") {
    const Cgs& g = fixture("sv");
    const FormulaPtr f =
        sl("<<x>> <<y>> (alpha,x) (beta,y) X <<z>> (alpha,z) X p");
    CHECK_THROWS_AS(eval_elementary(g, f, Assignment{}, g.initial,
                                    EvalMode::exact_horizon(2)),
                    NotNgsl);
}

TEST_CASE("elementary evaluation under a memory bound stays undecided") {
    const Cgs& g = fixture("rdc");
    const Verdict v = eval_elementary(g, sl("<<x>> (alpha,x) X p"), Assignment{},
                                      g.initial, EvalMode::bounded_memory(1));
    CHECK(v.value == Truth::Unknown);
    CHECK(v.restricted);
}

TEST_CASE("memoryless transducers settle the reachability sentences") {
    const Cgs& g = fixture("rdc");
    const EvalMode m = EvalMode::bounded_memory(1);
    const Verdict a =
        eval_classic(g, sl("<<x>> (alpha,x) F p"), Assignment{}, g.initial, m);
    CHECK(a.value == Truth::True);
    CHECK(a.restricted);
    CHECK(eval_classic(g, sl("[[x]] (alpha,x) G !p"), Assignment{}, g.initial, m).value ==
          Truth::False);
    CHECK(eval_classic(g, sl("<<x>> (alpha,x) G !p"), Assignment{}, g.initial, m).value ==
          Truth::True);
    CHECK(eval_classic(g, sl("<<x>> (alpha,x) (!p U p)"), Assignment{}, g.initial, m)
              .value == Truth::True);
}

TEST_CASE("a quantifier nested under an always is re-evaluated along the play") {
    const Cgs& g = fixture("rdc");
    const EvalMode m = EvalMode::bounded_memory(1);
    // from every reachable point some one-step deviation lands in p
    CHECK(eval_classic(g, sl("<<x>> (alpha,x) G (<<y>> (alpha,y) X p)"), Assignment{},
                       g.initial, m)
              .value == Truth::True);
    CHECK(eval_classic(g, sl("<<x>> (alpha,x) G (<<y>> (alpha,y) X (p & X !p))"),
                       Assignment{}, g.initial, m)
              .value == Truth::True);
    // the universal deviation can always step off p, so the target is hollow
    CHECK(eval_classic(g, sl("<<x>> (alpha,x) F ([[y]] (alpha,y) X p)"), Assignment{},
                       g.initial, m)
              .value == Truth::False);
}

TEST_CASE("profitable-deviation sentences under one memory state") {
    const EvalMode m = EvalMode::bounded_memory(1);
    const Cgs& pd = fixture("pd");
    const std::string ne =
        "<<x1>> (A1,x1) <<x2>> (A2,x2) ((<<y>> (A1,y) G f1 -> G f1)"
        " & (<<y>> (A2,y) G f2 -> G f2))";
    const Verdict v = eval_classic(pd, parse_formula(ne, Dialect::Sl), Assignment{},
                                   pd.initial, m);
    CHECK(v.value == Truth::True);
    CHECK(v.restricted);

    const Cgs& prs = fixture("prs");
    const std::string ne_prs =
        "<<x1>> (A,x1) <<x2>> (B,x2) ((<<y>> (A,y) F wA -> F wA)"
        " & (<<y>> (B,y) F wB -> F wB))";
    CHECK(eval_classic(prs, parse_formula(ne_prs, Dialect::Sl), Assignment{}, prs.initial,
                       m)
              .value == Truth::False);
}

TEST_CASE("skolem replay agrees with the plain search on the fixtures") {
    struct Row {
        const char* game;
        const char* text;
        int h;
        Truth want;
    };
    const Row rows[] = {
        {"g1", "[[x]] <<y>> [[z]] (alpha,x) (beta,y) (gamma,z) X p", 1, Truth::True},
        {"g2", "[[x]] <<y>> [[z]] (alpha,x) (beta,y) (gamma,z) X p", 1, Truth::False},
        {"sv", "<<x>> [[y]] <<z>> ((alpha,x) (beta,y) X p & (alpha,y) (beta,z) X q)", 1,
         Truth::True},
        {"rdc", "[[x]] <<y>> (((alpha,x) X p <-> (alpha,y) X !p)"
                " & ((alpha,x) X X p <-> (alpha,y) X X p))",
         2, Truth::True},
    };
    for (const Row& r : rows) {
        const Cgs& g = fixture(r.game);
        const Verdict lit = eval_classic(g, sl(r.text), Assignment{}, g.initial,
                                         EvalMode::exact_horizon(r.h, false));
        const Verdict sko = eval_classic(g, sl(r.text), Assignment{}, g.initial,
                                         EvalMode::exact_horizon(r.h, true));
        CHECK(lit.value == r.want);
        CHECK(sko.value == r.want);
    }
}

TEST_CASE("skolem replay agrees with the plain search on random sentences") {
    std::mt19937 rng(20260815);
    for (int i = 0; i < 40; ++i) {
        const Cgs g = oracle::random_cgs(rng, 2 + static_cast<int>(rng() % 3), 2, 2, 2);
        const FormulaPtr f =
            oracle::random_one_goal_xonly(rng, g, 1 + static_cast<int>(rng() % 3), 2);
        const int h = *temporal_xdepth(f);
        const Truth lit =
            eval_classic(g, f, Assignment{}, 0, EvalMode::exact_horizon(h, false)).value;
        const Truth sko =
            eval_classic(g, f, Assignment{}, 0, EvalMode::exact_horizon(h, true)).value;
        CHECK(lit == sko);
    }
}

TEST_CASE("negating a sentence flips its classic verdict") {
    std::mt19937 rng(7411);
    for (int i = 0; i < 30; ++i) {
        const Cgs g = oracle::random_cgs(rng, 2 + static_cast<int>(rng() % 2), 2, 2, 2);
        const FormulaPtr f =
            oracle::random_one_goal_xonly(rng, g, 1 + static_cast<int>(rng() % 2), 2);
        const int h = *temporal_xdepth(f);
        const Truth pos =
            eval_classic(g, f, Assignment{}, 0, EvalMode::exact_horizon(h)).value;
        const Truth neg =
            eval_classic(g, f_not(f), Assignment{}, 0, EvalMode::exact_horizon(h)).value;
        CHECK(pos == truth_not(neg));
    }
}

TEST_CASE("one-goal sentences mean the same classically and elementarily") {
    std::mt19937 rng(99120);
    for (int i = 0; i < 40; ++i) {
        const Cgs g = oracle::random_cgs(rng, 2 + static_cast<int>(rng() % 2), 2, 2, 2);
        const FormulaPtr f =
            oracle::random_one_goal_xonly(rng, g, 1 + static_cast<int>(rng() % 2), 2);
        const int h = *temporal_xdepth(f);
        const EquivalenceReport r =
            check_equivalence(g, f, Assignment{}, 0, EvalMode::exact_horizon(h));
        CHECK(r.agree);
    }
}

TEST_CASE("elementary truth implies classic truth on prenex sentences") {
    std::mt19937 rng(361240);
    int hits = 0;
    for (int i = 0; i < 40; ++i) {
        const Cgs g = oracle::random_cgs(rng, 2, 2, 2, 2);
        const FormulaPtr f = oracle::random_prenex_xonly(rng, g, 2, 2, 2);
        const int h = std::max(1, *temporal_xdepth(f));
        const EquivalenceReport r =
            check_equivalence(g, f, Assignment{}, 0, EvalMode::exact_horizon(h));
        if (r.elementary.value == Truth::True) {
            CHECK(r.classic.value == Truth::True);
            ++hits;
        }
    }
    CHECK(hits > 0); // the sweep has to exercise the implication, not dodge it
}

} // TEST_SUITE
