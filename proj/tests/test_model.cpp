#include <doctest.h>

#include "slmc/cgs.hpp"

using namespace slmc;

namespace {

StateId step_by_name(const Cgs& g, const std::string& s, std::vector<std::string> acts) {
    std::vector<int> idx;
    for (const std::string& a : acts) idx.push_back(g.action_index(a));
    return g.step(g.state_index(s), idx);
}

// length of the track modulo three picks the action, cycling P <- R <- S
Strategy cyclic_strategy(const Cgs& g) {
    TransducerStrategy t;
    t.mem = 3;
    t.m0 = 0;
    t.upd.assign(3, std::vector<int>(g.states.size()));
    t.out.assign(3, std::vector<int>(g.states.size()));
    for (int m = 0; m < 3; ++m)
        for (size_t s = 0; s < g.states.size(); ++s) {
            t.upd[m][s] = (m + 1) % 3;
            // memory m means the track has length m+1 so far (mod 3)
            const int by_len[3] = {g.action_index("R"), g.action_index("S"),
                                   g.action_index("P")};
            t.out[m][s] = by_len[m];
        }
    return Strategy{std::move(t)};
}

bool is_square(int n) {
    for (int k = 1; k * k <= n; ++k)
        if (k * k == n) return true;
    return false;
}
bool is_cube(int n) {
    for (int k = 1; k * k * k <= n; ++k)
        if (k * k * k == n) return true;
    return false;
}

// play P on won tracks; otherwise pick by whether the length is a square or
// a cube of a positive number
Strategy arithmetic_strategy(const Cgs& g, int horizon) {
    TableStrategy t;
    t.anchor = g.state_index("si");
    t.horizon = horizon;
    for (const Track& rho : tracks_from(g, t.anchor, 1, horizon)) {
        const int n = static_cast<int>(rho.size());
        int a;
        if (rho.back() != g.state_index("si")) a = g.action_index("P");
        else if (is_square(n)) a = g.action_index("R");
        else if (is_cube(n)) a = g.action_index("S");
        else a = g.action_index("P");
        t.act[rho] = a;
    }
    return Strategy{std::move(t)};
}

} // namespace

TEST_SUITE("model") {

TEST_CASE("fixtures validate and declare the expected vocabulary") {
    for (const std::string& n : fixture_names()) {
        const Cgs& g = fixture(n);
        CAPTURE(n);
        CHECK_NOTHROW(g.validate());
    }
    CHECK(fixture("prs").agents == std::vector<std::string>{"A", "B"});
    CHECK(fixture("prs").actions == std::vector<std::string>{"P", "R", "S"});
    CHECK(fixture("PD").states == std::vector<std::string>{"si", "sA1", "sA2", "sj"});
    CHECK(fixture("sv").states.size() == 4);
    CHECK(fixture("rdc").agents == std::vector<std::string>{"alpha"});
    CHECK(fixture("g1").actions.size() == 2);
    CHECK(fixture("g2").actions.size() == 3);
    CHECK_THROWS_AS(fixture("nope"), UndeclaredName);
}

TEST_CASE("catching game transitions") {
    const Cgs& g = fixture("prs");
    CHECK(step_by_name(g, "si", {"P", "R"}) == g.state_index("sA"));
    CHECK(step_by_name(g, "si", {"R", "S"}) == g.state_index("sA"));
    CHECK(step_by_name(g, "si", {"S", "P"}) == g.state_index("sA"));
    CHECK(step_by_name(g, "si", {"R", "P"}) == g.state_index("sB"));
    CHECK(step_by_name(g, "si", {"P", "S"}) == g.state_index("sB"));
    CHECK(step_by_name(g, "si", {"P", "P"}) == g.state_index("si"));
    CHECK(step_by_name(g, "si", {"S", "S"}) == g.state_index("si"));
    CHECK(step_by_name(g, "sA", {"R", "P"}) == g.state_index("sA"));
    CHECK(step_by_name(g, "sB", {"P", "P"}) == g.state_index("sB"));
    CHECK(g.label[g.state_index("sA")] == std::set<std::string>{"wA"});
    CHECK(g.label[g.state_index("si")].empty());
}

TEST_CASE("dilemma transitions") {
    const Cgs& g = fixture("pd");
    CHECK(step_by_name(g, "si", {"D", "C"}) == g.state_index("sA1"));
    CHECK(step_by_name(g, "si", {"C", "D"}) == g.state_index("sA2"));
    CHECK(step_by_name(g, "si", {"D", "D"}) == g.state_index("sj"));
    CHECK(step_by_name(g, "si", {"C", "C"}) == g.state_index("si"));
    CHECK(step_by_name(g, "sA1", {"C", "C"}) == g.state_index("sA1"));
    CHECK(g.label[g.state_index("si")] == std::set<std::string>{"f1", "f2"});
    CHECK(g.label[g.state_index("sA1")] == std::set<std::string>{"f1"});
    CHECK(g.label[g.state_index("sj")].empty());
}

TEST_CASE("shared-variable game transitions") {
    const Cgs& g = fixture("sv");
    CHECK(step_by_name(g, "s0", {"0", "0"}) == g.state_index("s1"));
    CHECK(step_by_name(g, "s0", {"0", "1"}) == g.state_index("s2"));
    CHECK(step_by_name(g, "s0", {"1", "0"}) == g.state_index("s3"));
    CHECK(step_by_name(g, "s0", {"1", "1"}) == g.state_index("s0"));
    for (const char* s : {"s1", "s2", "s3"})
        for (const char* a : {"0", "1"})
            for (const char* b : {"0", "1"})
                CHECK(step_by_name(g, s, {a, b}) == g.state_index("s0"));
    CHECK(g.label[1] == std::set<std::string>{"p"});
    CHECK(g.label[2] == std::set<std::string>{"p", "q"});
    CHECK(g.label[3] == std::set<std::string>{"q"});
}

TEST_CASE("one-agent reduction structure") {
    const Cgs& g = fixture("rdc");
    for (const char* s : {"s0", "s1"}) {
        CHECK(step_by_name(g, s, {"f"}) == g.state_index("s0"));
        CHECK(step_by_name(g, s, {"t"}) == g.state_index("s1"));
    }
}

TEST_CASE("indistinguishable pair transitions") {
    const Cgs& g1 = fixture("g1");
    CHECK(step_by_name(g1, "s0", {"0", "0", "1"}) == g1.state_index("s1"));
    CHECK(step_by_name(g1, "s0", {"1", "1", "0"}) == g1.state_index("s1"));
    CHECK(step_by_name(g1, "s0", {"0", "1", "0"}) == g1.state_index("s2"));
    CHECK(step_by_name(g1, "s1", {"0", "1", "0"}) == g1.state_index("s1"));

    const Cgs& g2 = fixture("g2");
    CHECK(step_by_name(g2, "s0", {"0", "0", "2"}) == g2.state_index("s1"));
    CHECK(step_by_name(g2, "s0", {"1", "1", "0"}) == g2.state_index("s1"));
    CHECK(step_by_name(g2, "s0", {"1", "2", "1"}) == g2.state_index("s1"));
    CHECK(step_by_name(g2, "s0", {"2", "0", "0"}) == g2.state_index("s1"));
    CHECK(step_by_name(g2, "s0", {"2", "0", "2"}) == g2.state_index("s1"));
    CHECK(step_by_name(g2, "s0", {"2", "1", "1"}) == g2.state_index("s1"));
    CHECK(step_by_name(g2, "s0", {"2", "0", "1"}) == g2.state_index("s2"));
    CHECK(step_by_name(g2, "s0", {"2", "1", "0"}) == g2.state_index("s2"));
    CHECK(step_by_name(g2, "s0", {"0", "1", "1"}) == g2.state_index("s2"));
}

TEST_CASE("decision helpers") {
    const Cgs& g = fixture("pd");
    CHECK(step_decision(g, 0, {{"A1", "D"}, {"A2", "C"}}) == 1);
    CHECK_THROWS_AS(step_decision(g, 0, {{"A1", "D"}}), ValidationError);
    CHECK_THROWS_AS(step_decision(g, 0, {{"A1", "D"}, {"A2", "X"}}), UndeclaredName);
    CHECK(g.decision_unrank(g.decision_rank({1, 0})) == std::vector<int>{1, 0});
}

TEST_CASE("tracks enumerate by length then lexicographically") {
    const Cgs& g = fixture("sv");
    auto ts = tracks_from(g, 0, 1, 2);
    REQUIRE(ts.size() == 5);
    CHECK(ts[0] == Track{0});
    CHECK(ts[1] == Track{0, 0});
    CHECK(ts[2] == Track{0, 1});
    CHECK(ts[3] == Track{0, 2});
    CHECK(ts[4] == Track{0, 3});

    auto long_ts = tracks_from(fixture("g1"), 0, 1, 3);
    // s1 and s2 absorb, so: [s0], 2 of length 2, 2 of length 3
    CHECK(long_ts.size() == 5);
}

TEST_CASE("table strategies act and translate") {
    const Cgs& g = fixture("prs");
    Strategy sigma = arithmetic_strategy(g, 6);
    const StateId si = g.state_index("si");
    CHECK(strategy_action(g, sigma, {si}) == g.action_index("R"));          // 1 is a square
    CHECK(strategy_action(g, sigma, {si, si}) == g.action_index("P"));      // 2 is neither
    CHECK(strategy_action(g, sigma, {si, si, si}) == g.action_index("P"));  // 3 is neither
    CHECK(strategy_action(g, sigma, {si, si, si, si}) == g.action_index("R"));
    CHECK(strategy_action(g, sigma, {si, g.state_index("sA")}) == g.action_index("P"));
    CHECK_THROWS_AS(strategy_action(g, sigma, {si, si, si, si, si, si, si}), HorizonExceeded);
    CHECK_THROWS_AS(strategy_action(g, sigma, {g.state_index("sA")}), DomainMismatch);

    Strategy moved = translate_strategy(g, sigma, {si, si, si});
    CHECK(moved.table().anchor == si);
    CHECK(moved.table().horizon == 4);
    // a track of length n continues one of length n+2, so 2 behaves like 4
    CHECK(strategy_action(g, moved, {si, si}) == g.action_index("R"));
    CHECK_THROWS_AS(translate_strategy(g, sigma, {g.state_index("sB"), si}), DomainMismatch);
}

TEST_CASE("transducer strategies act and translate") {
    const Cgs& g = fixture("prs");
    Strategy sigma = cyclic_strategy(g);
    const StateId si = g.state_index("si");
    CHECK(strategy_action(g, sigma, {si}) == g.action_index("R"));
    CHECK(strategy_action(g, sigma, {si, si}) == g.action_index("S"));
    CHECK(strategy_action(g, sigma, {si, si, si}) == g.action_index("P"));
    CHECK(strategy_action(g, sigma, {si, si, si, si}) == g.action_index("R"));

    // four steps of nothing happening leave the cycle untouched
    Strategy same = translate_strategy(g, sigma, {si, si, si, si});
    CHECK(same.transducer().m0 == sigma.transducer().m0);

    // six consumed states shift the phase by two
    const StateId sA = g.state_index("sA");
    Strategy shifted = translate_strategy(g, sigma, {si, si, si, si, sA, sA});
    CHECK(shifted.transducer().m0 == 2);
    CHECK(strategy_action(g, shifted, {sA}) == g.action_index("P"));
    CHECK(strategy_action(g, shifted, {sA, sA}) == g.action_index("R"));
    CHECK(strategy_action(g, shifted, {sA, sA, sA}) == g.action_index("S"));
}

TEST_CASE("the catching play stalls briefly and then resolves") {
    const Cgs& g = fixture("prs");
    Assignment chi;
    chi.entries["A"] = std::make_shared<Strategy>(arithmetic_strategy(g, 6));
    chi.entries["B"] = std::make_shared<Strategy>(cyclic_strategy(g));
    Track pi = play_bounded(g, chi, g.state_index("si"), 5);
    const StateId si = g.state_index("si"), sB = g.state_index("sB");
    CHECK(pi == Track{si, si, sB, sB, sB, sB});

    // the stem stays in the start state for exactly two positions
    int stall = 0;
    while (stall < static_cast<int>(pi.size()) && pi[stall] == si) ++stall;
    CHECK(stall == 2);
}

TEST_CASE("unbounded play finds the lasso") {
    const Cgs& g = fixture("prs");
    Assignment chi;
    chi.entries["A"] = std::make_shared<Strategy>(cyclic_strategy(g));
    chi.entries["B"] = std::make_shared<Strategy>(cyclic_strategy(g));
    Path p = play_unbounded(g, chi, g.state_index("si"));
    // identical strategies never catch each other
    Path expect{{}, {g.state_index("si")}};
    CHECK(path_equal(p, expect));
    CHECK(path_at(p, 0) == g.state_index("si"));
    CHECK(path_at(p, 17) == g.state_index("si"));

    Path shifted{{0, 1}, {2, 1}};
    Path rotated{{0, 1, 2}, {1, 2}};
    CHECK(path_equal(shifted, rotated));
    CHECK(path_equal(shifted, Path{{0}, {1, 2}})); // same word, shorter stem
    CHECK(!path_equal(shifted, Path{{0}, {2, 1}}));
}

TEST_CASE("global translation advances strategies and state together") {
    const Cgs& g = fixture("prs");
    Assignment chi;
    chi.entries["A"] = std::make_shared<Strategy>(arithmetic_strategy(g, 6));
    chi.entries["B"] = std::make_shared<Strategy>(cyclic_strategy(g));
    auto [chi2, s2] = global_translation(g, chi, g.state_index("si"), 2);
    CHECK(s2 == g.state_index("sB"));
    CHECK(chi2.at("B")->transducer().m0 == 2);
    CHECK(chi2.at("A")->table().anchor == g.state_index("sB"));
    CHECK(chi2.at("A")->table().horizon == 4);
}

TEST_CASE("turn-based owners") {
    auto rdc = turn_based_owners(fixture("rdc"));
    REQUIRE(rdc.has_value());
    CHECK((*rdc)[0] == 0);
    CHECK(!turn_based_owners(fixture("pd")).has_value());
    CHECK(!turn_based_owners(fixture("sv")).has_value());
    CHECK(!turn_based_owners(fixture("g1")).has_value());
}

TEST_CASE("text format round-trips every fixture") {
    for (const std::string& n : fixture_names()) {
        const Cgs& g = fixture(n);
        CAPTURE(n);
        std::string text = store_cgs(g);
        Cgs loaded = load_cgs(text);
        CHECK(loaded.agents == g.agents);
        CHECK(loaded.actions == g.actions);
        CHECK(loaded.states == g.states);
        CHECK(loaded.atoms == g.atoms);
        CHECK(loaded.label == g.label);
        CHECK(loaded.initial == g.initial);
        CHECK(loaded.trans == g.trans);
        CHECK(store_cgs(loaded) == text);
    }
}

TEST_CASE("wildcard rows expand by specificity, later rows break ties") {
    const char* text = R"(
# two agents, two actions
agents: a b
actions: x y
states: s t
init: s
trans: s (*,*) -> s
trans: s (x,*) -> t
trans: s (*,y) -> s
trans: t (*,*) -> t
trans: t (y,y) -> s
)";
    Cgs g = load_cgs(text);
    auto at = [&](const std::string& st, const char* a, const char* b) {
        return g.step(g.state_index(st), {g.action_index(a), g.action_index(b)});
    };
    CHECK(at("s", "x", "x") == g.state_index("t"));
    CHECK(at("s", "x", "y") == g.state_index("s")); // later one-wildcard row wins
    CHECK(at("s", "y", "x") == g.state_index("s"));
    CHECK(at("s", "y", "y") == g.state_index("s"));
    CHECK(at("t", "y", "y") == g.state_index("s")); // exact row beats the catch-all
    CHECK(at("t", "x", "y") == g.state_index("t"));
}

TEST_CASE("format errors") {
    CHECK_THROWS_AS(load_cgs("agents: a\nactions x y\n"), ParseError);
    try {
        load_cgs("agents: a\n\nnonsense: here\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line == 3);
    }
    // missing cell
    CHECK_THROWS_AS(load_cgs("agents: a\nactions: x y\nstates: s\ninit: s\n"
                             "trans: s (x) -> s\n"),
                    ValidationError);
    // undeclared names
    CHECK_THROWS_AS(load_cgs("agents: a\nactions: x\nstates: s\ninit: nope\n"
                             "trans: s (*) -> s\n"),
                    UndeclaredName);
    CHECK_THROWS_AS(load_cgs("agents: a\nactions: x\nstates: s\ninit: s\n"
                             "label: s = glow\ntrans: s (*) -> s\n"),
                    UndeclaredName);
    // duplicate directive
    CHECK_THROWS_AS(load_cgs("agents: a\nagents: b\n"), ParseError);
}

TEST_CASE("validation rejects broken structures") {
    Cgs g = fixture("rdc");
    g.trans[0][0] = 7;
    CHECK_THROWS_AS(g.validate(), ValidationError);
    Cgs g2 = fixture("rdc");
    g2.label.pop_back();
    CHECK_THROWS_AS(g2.validate(), ValidationError);
    Cgs g3 = fixture("rdc");
    g3.agents.push_back("alpha");
    CHECK_THROWS_AS(g3.validate(), ValidationError);
}

} // TEST_SUITE
