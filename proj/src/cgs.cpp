#include "slmc/cgs.hpp"

#include <algorithm>
#include <cassert>
#include <functional>
#include <numeric>
#include <sstream>

namespace slmc {

// ---------------------------------------------------------------------------
// Structure basics

namespace {

int find_name(const std::vector<std::string>& pool, const std::string& n, const char* what) {
    auto it = std::find(pool.begin(), pool.end(), n);
    if (it == pool.end())
        throw UndeclaredName(std::string("unknown ") + what + ": " + n);
    return static_cast<int>(it - pool.begin());
}

} // namespace

int Cgs::agent_index(const std::string& a) const { return find_name(agents, a, "agent"); }
int Cgs::action_index(const std::string& c) const { return find_name(actions, c, "action"); }
StateId Cgs::state_index(const std::string& s) const { return find_name(states, s, "state"); }

int Cgs::decision_count() const {
    int n = 1;
    for (size_t i = 0; i < agents.size(); ++i) n *= static_cast<int>(actions.size());
    return n;
}

int Cgs::decision_rank(const std::vector<int>& action_idx) const {
    assert(action_idx.size() == agents.size());
    int r = 0;
    for (int a : action_idx) {
        assert(a >= 0 && a < static_cast<int>(actions.size()));
        r = r * static_cast<int>(actions.size()) + a;
    }
    return r;
}

std::vector<int> Cgs::decision_unrank(int rank) const {
    std::vector<int> d(agents.size(), 0);
    for (size_t i = agents.size(); i-- > 0;) {
        d[i] = rank % static_cast<int>(actions.size());
        rank /= static_cast<int>(actions.size());
    }
    return d;
}

StateId Cgs::step(StateId s, const std::vector<int>& action_idx) const {
    return trans[s][decision_rank(action_idx)];
}

StateId Cgs::step_rank(StateId s, int rank) const { return trans[s][rank]; }

std::vector<StateId> Cgs::successors(StateId s) const {
    std::vector<StateId> out(trans[s]);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

void Cgs::validate() const {
    if (agents.empty()) throw ValidationError("a game structure needs at least one agent");
    if (actions.empty()) throw ValidationError("a game structure needs at least one action");
    if (states.empty()) throw ValidationError("a game structure needs at least one state");
    auto check_unique = [](const std::vector<std::string>& v, const char* what) {
        std::set<std::string> seen;
        for (const std::string& n : v) {
            if (n.empty()) throw ValidationError(std::string("empty ") + what + " name");
            if (!seen.insert(n).second)
                throw ValidationError(std::string("duplicate ") + what + " name: " + n);
        }
    };
    check_unique(agents, "agent");
    check_unique(actions, "action");
    check_unique(states, "state");
    if (label.size() != states.size())
        throw ValidationError("labeling must cover every state exactly once");
    for (size_t s = 0; s < states.size(); ++s)
        for (const std::string& a : label[s])
            if (!atoms.count(a))
                throw ValidationError("state " + states[s] + " labeled with undeclared atom " + a);
    if (initial < 0 || initial >= static_cast<StateId>(states.size()))
        throw ValidationError("initial state out of range");
    if (trans.size() != states.size())
        throw ValidationError("transition table must cover every state");
    const int dc = decision_count();
    for (size_t s = 0; s < states.size(); ++s) {
        if (static_cast<int>(trans[s].size()) != dc)
            throw ValidationError("transition table for state " + states[s] + " is not total");
        for (StateId t : trans[s])
            if (t < 0 || t >= static_cast<StateId>(states.size()))
                throw ValidationError("transition from " + states[s] + " leaves the state space");
    }
}

StateId step_decision(const Cgs& g, StateId s, const Decision& d) {
    std::vector<int> idx(g.agents.size(), -1);
    for (const auto& [agent, action] : d)
        idx[g.agent_index(agent)] = g.action_index(action);
    for (size_t i = 0; i < idx.size(); ++i)
        if (idx[i] < 0) throw ValidationError("decision misses agent " + g.agents[i]);
    return g.step(s, idx);
}

// ---------------------------------------------------------------------------
// Paths

StateId path_at(const Path& p, long i) {
    if (i < static_cast<long>(p.stem.size())) return p.stem[i];
    const long k = (i - static_cast<long>(p.stem.size())) % static_cast<long>(p.loop.size());
    return p.loop[k];
}

bool path_equal(const Path& a, const Path& b) {
    const long la = static_cast<long>(a.loop.size());
    const long lb = static_cast<long>(b.loop.size());
    const long bound = static_cast<long>(std::max(a.stem.size(), b.stem.size())) +
                       std::lcm(la, lb) + 1;
    for (long i = 0; i < bound; ++i)
        if (path_at(a, i) != path_at(b, i)) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Strategies

int strategy_action(const Cgs& g, const Strategy& s, const Track& rho) {
    if (rho.empty()) throw DomainMismatch("a strategy acts on nonempty tracks");
    if (s.is_table()) {
        const TableStrategy& t = s.table();
        if (rho.front() != t.anchor)
            throw DomainMismatch("track does not start at the strategy anchor " +
                                 g.states[t.anchor]);
        if (static_cast<int>(rho.size()) > t.horizon)
            throw HorizonExceeded("track of length " + std::to_string(rho.size()) +
                                  " exceeds strategy horizon " + std::to_string(t.horizon));
        auto it = t.act.find(rho);
        if (it == t.act.end()) throw DomainMismatch("track outside the strategy table");
        return it->second;
    }
    const TransducerStrategy& t = s.transducer();
    int m = t.m0;
    for (size_t i = 1; i < rho.size(); ++i) m = t.upd[m][rho[i]];
    return t.out[m][rho.back()];
}

Strategy translate_strategy(const Cgs& g, const Strategy& s, const Track& rho) {
    if (rho.empty()) throw DomainMismatch("translation needs a nonempty track");
    if (s.is_table()) {
        const TableStrategy& t = s.table();
        if (rho.front() != t.anchor)
            throw DomainMismatch("track does not start at the strategy anchor " +
                                 g.states[t.anchor]);
        TableStrategy out;
        out.anchor = rho.back();
        out.horizon = std::max(0, t.horizon - static_cast<int>(rho.size()) + 1);
        const size_t r = rho.size();
        for (const auto& [track, action] : t.act) {
            if (track.size() < r) continue;
            if (!std::equal(rho.begin(), rho.end(), track.begin())) continue;
            Track rebased(track.begin() + static_cast<long>(r) - 1, track.end());
            out.act.emplace(std::move(rebased), action);
        }
        return Strategy{std::move(out)};
    }
    TransducerStrategy t = s.transducer();
    for (size_t i = 1; i < rho.size(); ++i) t.m0 = t.upd[t.m0][rho[i]];
    return Strategy{std::move(t)};
}

const StrategyPtr& Assignment::at(const std::string& name) const {
    auto it = entries.find(name);
    if (it == entries.end())
        throw UndeclaredName("assignment has no entry for " + name);
    return it->second;
}

bool Assignment::complete(const std::set<std::string>& agents) const {
    return std::all_of(agents.begin(), agents.end(),
                       [&](const std::string& a) { return entries.count(a) > 0; });
}

Assignment redefine(const Assignment& chi, const std::string& name, StrategyPtr s) {
    Assignment out = chi;
    out.entries[name] = std::move(s);
    return out;
}

Assignment translate_assignment(const Cgs& g, const Assignment& chi, const Track& rho) {
    Assignment out;
    for (const auto& [name, strat] : chi.entries)
        out.entries.emplace(name,
                            std::make_shared<Strategy>(translate_strategy(g, *strat, rho)));
    return out;
}

Track play_bounded(const Cgs& g, const Assignment& chi, StateId s, int horizon) {
    if (!chi.complete(std::set<std::string>(g.agents.begin(), g.agents.end())))
        throw ValidationError("play needs a strategy for every agent");
    Track pi{s};
    std::vector<int> d(g.agents.size());
    for (int step = 0; step < horizon; ++step) {
        for (size_t i = 0; i < g.agents.size(); ++i)
            d[i] = strategy_action(g, *chi.at(g.agents[i]), pi);
        pi.push_back(g.step(pi.back(), d));
    }
    return pi;
}

Path play_unbounded(const Cgs& g, const Assignment& chi, StateId s) {
    std::vector<const TransducerStrategy*> ts;
    for (const std::string& a : g.agents) {
        const StrategyPtr& p = chi.at(a);
        if (!p || p->is_table())
            throw ValidationError("unbounded play needs transducer strategies for all agents");
        ts.push_back(&p->transducer());
    }
    // configuration: current state plus each agent's memory
    std::vector<int> mems;
    for (const TransducerStrategy* t : ts) mems.push_back(t->m0);
    std::map<std::pair<StateId, std::vector<int>>, size_t> seen;
    Track visited;
    StateId cur = s;
    while (true) {
        auto key = std::make_pair(cur, mems);
        auto it = seen.find(key);
        if (it != seen.end()) {
            Path p;
            p.stem.assign(visited.begin(), visited.begin() + static_cast<long>(it->second));
            p.loop.assign(visited.begin() + static_cast<long>(it->second), visited.end());
            return p;
        }
        seen.emplace(std::move(key), visited.size());
        visited.push_back(cur);
        std::vector<int> d(ts.size());
        for (size_t i = 0; i < ts.size(); ++i) d[i] = ts[i]->out[mems[i]][cur];
        cur = g.step(cur, d);
        for (size_t i = 0; i < ts.size(); ++i) mems[i] = ts[i]->upd[mems[i]][cur];
    }
}

std::pair<Assignment, StateId> global_translation(const Cgs& g, const Assignment& chi,
                                                  StateId s, int i) {
    Track pi = play_bounded(g, chi, s, i);
    return {translate_assignment(g, chi, pi), pi.back()};
}

std::optional<std::vector<int>> turn_based_owners(const Cgs& g) {
    std::vector<int> owner(g.states.size(), -1);
    const int dc = g.decision_count();
    for (size_t s = 0; s < g.states.size(); ++s) {
        for (size_t a = 0; a < g.agents.size() && owner[s] < 0; ++a) {
            // the successor must depend on agent a's action only
            std::vector<StateId> per_action(g.actions.size(), -1);
            bool ok = true;
            for (int r = 0; r < dc && ok; ++r) {
                const int act = g.decision_unrank(r)[a];
                const StateId t = g.trans[s][r];
                if (per_action[act] < 0) per_action[act] = t;
                else if (per_action[act] != t) ok = false;
            }
            if (ok) owner[s] = static_cast<int>(a);
        }
        if (owner[s] < 0) return std::nullopt;
    }
    return owner;
}

std::vector<Track> tracks_from(const Cgs& g, StateId s, int min_len, int max_len) {
    std::vector<Track> out;
    std::vector<Track> layer{{s}};
    for (int len = 1; len <= max_len; ++len) {
        if (len >= min_len)
            for (const Track& t : layer) out.push_back(t);
        if (len == max_len) break;
        std::vector<Track> next;
        for (const Track& t : layer)
            for (StateId u : g.successors(t.back())) {
                Track ext = t;
                ext.push_back(u);
                next.push_back(std::move(ext));
            }
        layer = std::move(next);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Fixtures

namespace {

Cgs make_cgs(std::string name, std::vector<std::string> agents,
             std::vector<std::string> actions, std::vector<std::string> states,
             std::set<std::string> atoms, std::vector<std::set<std::string>> label,
             int initial, const std::function<int(int, const std::vector<int>&)>& tau) {
    Cgs g;
    g.name = std::move(name);
    g.agents = std::move(agents);
    g.actions = std::move(actions);
    g.states = std::move(states);
    g.atoms = std::move(atoms);
    g.label = std::move(label);
    g.initial = initial;
    g.trans.assign(g.states.size(), std::vector<StateId>(g.decision_count(), 0));
    for (size_t s = 0; s < g.states.size(); ++s)
        for (int r = 0; r < g.decision_count(); ++r)
            g.trans[s][r] = tau(static_cast<int>(s), g.decision_unrank(r));
    g.validate();
    return g;
}

// hand-cyclic beats relation on three actions: 0 loses to 1 loses to 2 loses to 0
bool beats(int a, int b) { return (b - a + 3) % 3 == 1; }

Cgs make_prs() {
    return make_cgs(
        "prs", {"A", "B"}, {"P", "R", "S"}, {"si", "sA", "sB"}, {"wA", "wB"},
        {{}, {"wA"}, {"wB"}}, 0, [](int s, const std::vector<int>& d) {
            if (s != 0) return s; // winner states absorb
            if (beats(d[0], d[1])) return 1;
            if (beats(d[1], d[0])) return 2;
            return 0;
        });
}

Cgs make_pd() {
    return make_cgs(
        "pd", {"A1", "A2"}, {"C", "D"}, {"si", "sA1", "sA2", "sj"}, {"f1", "f2"},
        {{"f1", "f2"}, {"f1"}, {"f2"}, {}}, 0, [](int s, const std::vector<int>& d) {
            if (s != 0) return s;
            const bool d1 = d[0] == 1, d2 = d[1] == 1;
            if (d1 && !d2) return 1;
            if (d1 && d2) return 3;
            if (!d1 && d2) return 2;
            return 0;
        });
}

Cgs make_sv() {
    return make_cgs(
        "sv", {"alpha", "beta"}, {"0", "1"}, {"s0", "s1", "s2", "s3"}, {"p", "q"},
        {{}, {"p"}, {"p", "q"}, {"q"}}, 0, [](int s, const std::vector<int>& d) {
            if (s != 0) return 0; // everything funnels back to the start
            if (d[0] == 0) return d[1] == 0 ? 1 : 2;
            return d[1] == 0 ? 3 : 0;
        });
}

Cgs make_rdc() {
    return make_cgs(
        "rdc", {"alpha"}, {"f", "t"}, {"s0", "s1"}, {"p"}, {{}, {"p"}}, 0,
        [](int, const std::vector<int>& d) { return d[0] == 0 ? 0 : 1; });
}

Cgs make_g1() {
    return make_cgs(
        "g1", {"alpha", "beta", "gamma"}, {"0", "1"}, {"s0", "s1", "s2"}, {"p"},
        {{}, {"p"}, {}}, 0, [](int s, const std::vector<int>& d) {
            if (s != 0) return s;
            return d[0] == d[1] ? 1 : 2;
        });
}

Cgs make_g2() {
    return make_cgs(
        "g2", {"alpha", "beta", "gamma"}, {"0", "1", "2"}, {"s0", "s1", "s2"}, {"p"},
        {{}, {"p"}, {}}, 0, [](int s, const std::vector<int>& d) {
            if (s != 0) return s;
            const int a = d[0], b = d[1], c = d[2];
            const bool in = (a == 0 && b == 0) || (a == 1 && (b == 1 || b == 2)) ||
                            (a == 2 && ((b == 0 && (c == 0 || c == 2)) || (b == 1 && c == 1)));
            return in ? 1 : 2;
        });
}

} // namespace

const Cgs& fixture(const std::string& name) {
    static const std::map<std::string, Cgs> all = [] {
        std::map<std::string, Cgs> m;
        for (Cgs g : {make_prs(), make_pd(), make_sv(), make_rdc(), make_g1(), make_g2()})
            m.emplace(g.name, std::move(g));
        return m;
    }();
    std::string key = name;
    std::transform(key.begin(), key.end(), key.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    auto it = all.find(key);
    if (it == all.end()) throw UndeclaredName("unknown fixture: " + name);
    return it->second;
}

std::vector<std::string> fixture_names() {
    return {"prs", "pd", "sv", "rdc", "g1", "g2"};
}

// ---------------------------------------------------------------------------
// Text format

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string w;
    while (in >> w) out.push_back(w);
    return out;
}

std::vector<std::string> split_on(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

struct RawTrans {
    int line;
    std::string src;
    std::vector<std::string> acts; // "*" for wildcard
    std::string dst;
};

} // namespace

Cgs load_cgs(const std::string& text) {
    Cgs g;
    bool have_init = false;
    std::string init_name;
    std::vector<std::pair<int, std::pair<std::string, std::vector<std::string>>>> raw_labels;
    std::vector<RawTrans> raw_trans;
    std::map<std::string, bool> seen_directive;

    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::string body = trim(line);
        if (body.empty()) continue;
        auto colon = body.find(':');
        if (colon == std::string::npos)
            throw ParseError("expected 'directive: ...'", lineno, 1);
        std::string directive = trim(body.substr(0, colon));
        std::string rest = trim(body.substr(colon + 1));

        auto once = [&](const std::string& d) {
            if (seen_directive[d])
                throw ParseError("directive '" + d + "' given twice", lineno, 1);
            seen_directive[d] = true;
        };

        if (directive == "agents") {
            once(directive);
            g.agents = split_ws(rest);
        } else if (directive == "actions") {
            once(directive);
            g.actions = split_ws(rest);
        } else if (directive == "atoms") {
            once(directive);
            for (const std::string& a : split_ws(rest)) g.atoms.insert(a);
        } else if (directive == "states") {
            once(directive);
            g.states = split_ws(rest);
        } else if (directive == "init") {
            once(directive);
            auto toks = split_ws(rest);
            if (toks.size() != 1) throw ParseError("init wants exactly one state", lineno, 1);
            init_name = toks[0];
            have_init = true;
        } else if (directive == "label") {
            for (const std::string& group : split_on(rest, ';')) {
                std::string grp = trim(group);
                if (grp.empty()) continue;
                auto eq = grp.find('=');
                if (eq == std::string::npos)
                    throw ParseError("label group wants 'state = atoms'", lineno, 1);
                std::string st = trim(grp.substr(0, eq));
                if (split_ws(st).size() != 1)
                    throw ParseError("label group wants exactly one state", lineno, 1);
                raw_labels.push_back({lineno, {st, split_ws(grp.substr(eq + 1))}});
            }
        } else if (directive == "trans") {
            auto lp = rest.find('(');
            auto rp = rest.find(')');
            if (lp == std::string::npos || rp == std::string::npos || rp < lp)
                throw ParseError("transition wants 'state (actions) -> state'", lineno, 1);
            RawTrans row;
            row.line = lineno;
            row.src = trim(rest.substr(0, lp));
            for (const std::string& a : split_on(rest.substr(lp + 1, rp - lp - 1), ','))
                row.acts.push_back(trim(a));
            std::string tail = trim(rest.substr(rp + 1));
            if (tail.rfind("->", 0) != 0)
                throw ParseError("transition wants '->' after the decision", lineno, 1);
            row.dst = trim(tail.substr(2));
            if (row.src.empty() || row.dst.empty())
                throw ParseError("transition misses a state name", lineno, 1);
            raw_trans.push_back(std::move(row));
        } else {
            throw ParseError("unknown directive '" + directive + "'", lineno, 1);
        }
    }

    if (g.agents.empty()) throw ValidationError("missing agents declaration");
    if (g.actions.empty()) throw ValidationError("missing actions declaration");
    if (g.states.empty()) throw ValidationError("missing states declaration");
    if (!have_init) throw ValidationError("missing init declaration");

    g.label.assign(g.states.size(), {});
    g.initial = g.state_index(init_name);
    for (const auto& [ln, kv] : raw_labels) {
        const StateId s = g.state_index(kv.first);
        for (const std::string& a : kv.second) {
            if (!g.atoms.count(a))
                throw UndeclaredName("undeclared atom " + a + " on line " + std::to_string(ln));
            g.label[s].insert(a);
        }
    }

    // expand transition rows: fewer wildcards bind stronger, and among rows
    // of equal strength the later one wins
    const int dc = g.decision_count();
    g.trans.assign(g.states.size(), std::vector<StateId>(dc, -1));
    std::vector<const RawTrans*> ordered;
    for (const RawTrans& r : raw_trans) ordered.push_back(&r);
    std::stable_sort(ordered.begin(), ordered.end(), [](const RawTrans* a, const RawTrans* b) {
        auto spec = [](const RawTrans* r) {
            return std::count_if(r->acts.begin(), r->acts.end(),
                                 [](const std::string& s) { return s == "*"; });
        };
        return spec(a) > spec(b);
    });
    for (const RawTrans* row : ordered) {
        if (row->acts.size() != g.agents.size())
            throw ParseError("decision lists " + std::to_string(row->acts.size()) +
                                 " actions for " + std::to_string(g.agents.size()) + " agents",
                             row->line, 1);
        const StateId src = g.state_index(row->src);
        const StateId dst = g.state_index(row->dst);
        std::vector<int> fixed(g.agents.size(), -1);
        for (size_t i = 0; i < row->acts.size(); ++i)
            if (row->acts[i] != "*") fixed[i] = g.action_index(row->acts[i]);
        for (int r = 0; r < dc; ++r) {
            const std::vector<int> d = g.decision_unrank(r);
            bool match = true;
            for (size_t i = 0; i < d.size(); ++i)
                if (fixed[i] >= 0 && fixed[i] != d[i]) match = false;
            if (match) g.trans[src][r] = dst;
        }
    }
    for (size_t s = 0; s < g.states.size(); ++s)
        for (int r = 0; r < dc; ++r)
            if (g.trans[s][r] < 0) {
                std::ostringstream msg;
                msg << "transition table not total: state " << g.states[s] << ", decision (";
                const std::vector<int> d = g.decision_unrank(r);
                for (size_t i = 0; i < d.size(); ++i)
                    msg << (i ? "," : "") << g.actions[d[i]];
                msg << ")";
                throw ValidationError(msg.str());
            }

    g.validate();
    return g;
}

std::string store_cgs(const Cgs& g) {
    std::ostringstream out;
    auto words = [&](const char* d, const std::vector<std::string>& v) {
        out << d << ":";
        for (const std::string& w : v) out << ' ' << w;
        out << '\n';
    };
    words("agents", g.agents);
    words("actions", g.actions);
    words("atoms", std::vector<std::string>(g.atoms.begin(), g.atoms.end()));
    words("states", g.states);
    out << "init: " << g.states[g.initial] << '\n';
    for (size_t s = 0; s < g.states.size(); ++s) {
        out << "label: " << g.states[s] << " =";
        for (const std::string& a : g.label[s]) out << ' ' << a;
        out << '\n';
    }
    const int dc = g.decision_count();
    for (size_t s = 0; s < g.states.size(); ++s) {
        // one wildcard row for the most common successor, explicit exceptions
        std::map<StateId, int> count;
        for (StateId t : g.trans[s]) ++count[t];
        StateId common = g.trans[s][0];
        for (const auto& [t, n] : count)
            if (n > count[common]) common = t;
        out << "trans: " << g.states[s] << " (";
        for (size_t i = 0; i < g.agents.size(); ++i) out << (i ? ",*" : "*");
        out << ") -> " << g.states[common] << '\n';
        for (int r = 0; r < dc; ++r) {
            if (g.trans[s][r] == common) continue;
            const std::vector<int> d = g.decision_unrank(r);
            out << "trans: " << g.states[s] << " (";
            for (size_t i = 0; i < d.size(); ++i)
                out << (i ? "," : "") << g.actions[d[i]];
            out << ") -> " << g.states[g.trans[s][r]] << '\n';
        }
    }
    return out.str();
}

} // namespace slmc
