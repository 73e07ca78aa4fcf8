#include "slmc/games.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>

namespace slmc {

void ParityGame::validate() const {
    if (n < 0) throw ValidationError("negative vertex count");
    if (static_cast<int>(even_owner.size()) != n || static_cast<int>(priority.size()) != n ||
        static_cast<int>(succ.size()) != n)
        throw ValidationError("vertex attribute sizes disagree");
    if (n > 0 && (initial < 0 || initial >= n)) throw ValidationError("initial vertex out of range");
    for (int v = 0; v < n; ++v) {
        if (priority[v] < 1) throw ValidationError("priorities start at 1");
        if (succ[v].empty()) throw ValidationError("every vertex needs a move");
        for (int w : succ[v])
            if (w < 0 || w >= n) throw ValidationError("edge target out of range");
    }
}

namespace {

struct AttrResult {
    std::vector<char> in;
    std::vector<int> strat; // for the attracting player, away from the base
};

AttrResult attract(const ParityGame& g, const std::vector<char>& alive,
                   const std::vector<char>& base, bool player) {
    AttrResult r{base, std::vector<int>(g.n, -1)};
    for (bool changed = true; changed;) {
        changed = false;
        for (int v = 0; v < g.n; ++v) {
            if (!alive[v] || r.in[v]) continue;
            if (g.even_owner[v] == player) {
                for (int w : g.succ[v])
                    if (alive[w] && r.in[w]) {
                        r.in[v] = 1;
                        r.strat[v] = w;
                        changed = true;
                        break;
                    }
            } else {
                bool all = true;
                for (int w : g.succ[v]) all = all && (!alive[w] || r.in[w]);
                if (all) {
                    r.in[v] = 1;
                    changed = true;
                }
            }
        }
    }
    return r;
}

int any_alive_succ(const ParityGame& g, const std::vector<char>& alive, int v) {
    for (int w : g.succ[v])
        if (alive[w]) return w;
    throw Error("subgame lost a move; the recursion is broken");
}

void zielonka(const ParityGame& g, std::vector<char> alive, std::vector<bool>& even_wins,
              std::vector<int>& strategy) {
    int p = 0;
    bool seen = false;
    for (int v = 0; v < g.n; ++v)
        if (alive[v] && (!seen || g.priority[v] < p)) {
            p = g.priority[v];
            seen = true;
        }
    if (!seen) return;
    const bool player = p % 2 == 0;

    std::vector<char> tops(g.n, 0);
    for (int v = 0; v < g.n; ++v) tops[v] = alive[v] && g.priority[v] == p;
    AttrResult a = attract(g, alive, tops, player);
    std::vector<char> rest(g.n, 0);
    for (int v = 0; v < g.n; ++v) rest[v] = alive[v] && !a.in[v];
    zielonka(g, rest, even_wins, strategy);

    std::vector<char> opp(g.n, 0);
    bool opp_any = false;
    for (int v = 0; v < g.n; ++v)
        if (rest[v] && even_wins[v] != player) {
            opp[v] = 1;
            opp_any = true;
        }
    if (!opp_any) {
        // the minimum-priority player sweeps this whole subgame: attract to
        // the top vertices and keep the recursive strategy elsewhere
        for (int v = 0; v < g.n; ++v) {
            if (!alive[v]) continue;
            even_wins[v] = player;
            if (!a.in[v]) continue; // recursion already placed the move
            if (g.even_owner[v] != player) strategy[v] = -1;
            else strategy[v] = tops[v] ? any_alive_succ(g, alive, v) : a.strat[v];
        }
        return;
    }
    AttrResult b = attract(g, alive, opp, !player);
    std::vector<char> rest2(g.n, 0);
    for (int v = 0; v < g.n; ++v) rest2[v] = alive[v] && !b.in[v];
    zielonka(g, rest2, even_wins, strategy);
    for (int v = 0; v < g.n; ++v) {
        if (!alive[v] || !b.in[v]) continue;
        even_wins[v] = !player;
        if (opp[v]) continue; // keep the strategy from the first recursion
        if (g.even_owner[v] == player) strategy[v] = -1;
        else strategy[v] = b.strat[v];
    }
}

} // namespace

ParitySolution solve_parity(const ParityGame& g) {
    g.validate();
    ParitySolution sol;
    sol.even_wins.assign(g.n, false);
    sol.strategy.assign(g.n, -1);
    zielonka(g, std::vector<char>(g.n, 1), sol.even_wins, sol.strategy);
    if (!verify_parity_solution(g, sol)) throw Error("parity solution failed certification");
    return sol;
}

bool verify_parity_solution(const ParityGame& g, const ParitySolution& sol) {
    if (static_cast<int>(sol.even_wins.size()) != g.n ||
        static_cast<int>(sol.strategy.size()) != g.n)
        return false;
    for (int v = 0; v < g.n; ++v) {
        bool holder = g.even_owner[v] == sol.even_wins[v];
        if (holder) {
            if (!std::count(g.succ[v].begin(), g.succ[v].end(), sol.strategy[v])) return false;
        } else if (sol.strategy[v] != -1) {
            return false;
        }
    }
    // per region: the loser moves freely, the winner follows the strategy
    auto region_ok = [&](bool even_region) {
        std::vector<char> in(g.n, 0);
        for (int v = 0; v < g.n; ++v) in[v] = sol.even_wins[v] == even_region;
        auto moves = [&](int v) {
            if (g.even_owner[v] == even_region) return std::vector<int>{sol.strategy[v]};
            return g.succ[v];
        };
        for (int v = 0; v < g.n; ++v)
            if (in[v])
                for (int w : moves(v))
                    if (!in[w]) return false; // the region leaks
        // a losing-parity cycle inside the restricted region refutes the claim
        int top = 0;
        for (int v = 0; v < g.n; ++v) top = std::max(top, g.priority[v]);
        for (int p = even_region ? 1 : 2; p <= top; p += 2) {
            for (int v = 0; v < g.n; ++v) {
                if (!in[v] || g.priority[v] != p) continue;
                std::vector<char> visited(g.n, 0);
                std::deque<int> queue{v};
                while (!queue.empty()) {
                    int u = queue.front();
                    queue.pop_front();
                    for (int w : moves(u)) {
                        if (!in[w] || g.priority[w] < p) continue;
                        if (w == v) return false;
                        if (!visited[w]) {
                            visited[w] = 1;
                            queue.push_back(w);
                        }
                    }
                }
            }
        }
        return true;
    };
    return region_ok(true) && region_ok(false);
}

std::vector<bool> buchi_solve(const ParityGame& g) {
    g.validate();
    for (int v = 0; v < g.n; ++v)
        if (g.priority[v] > 2) throw ValidationError("this solver expects priorities 1 and 2");
    std::vector<char> alive(g.n, 1);
    for (;;) {
        std::vector<char> targets(g.n, 0);
        for (int v = 0; v < g.n; ++v) targets[v] = alive[v] && g.priority[v] == 1;
        AttrResult reach = attract(g, alive, targets, false);
        std::vector<char> safe(g.n, 0);
        bool any = false;
        for (int v = 0; v < g.n; ++v) {
            safe[v] = alive[v] && !reach.in[v];
            any = any || safe[v];
        }
        if (!any) break;
        AttrResult out = attract(g, alive, safe, true);
        for (int v = 0; v < g.n; ++v)
            if (out.in[v]) alive[v] = 0;
    }
    std::vector<bool> even(g.n, false);
    for (int v = 0; v < g.n; ++v) even[v] = !alive[v];
    return even;
}

namespace {

struct AdamVertex {
    int letter = 0;
    std::vector<std::pair<int, int>> moves;
};

} // namespace

std::optional<RegularTree> npt_emptiness(const TreeAutomaton& a) {
    a.validate();
    if (a.sigma_letters > 0)
        throw AlphabetNotProduct("emptiness expects a plain alphabet; project first");

    ParityGame game;
    std::vector<AdamVertex> adam_of; // metadata for odd vertices, by vertex id
    auto add = [&](bool even, int prio) {
        game.even_owner.push_back(even);
        game.priority.push_back(prio);
        game.succ.emplace_back();
        adam_of.emplace_back();
        if (game.n > (1 << 20)) throw DomainTooLarge("emptiness game beyond 2^20 vertices");
        return game.n++;
    };
    int win_sink = add(true, 2);
    game.succ[win_sink].push_back(win_sink);
    int lose_sink = add(true, 1);
    game.succ[lose_sink].push_back(lose_sink);

    const int idle = static_cast<int>(a.chain.size()) + 1;
    std::vector<int> eve_of(a.n_states, -1);
    std::deque<int> todo;
    auto eve = [&](int q) {
        if (eve_of[q] >= 0) return eve_of[q];
        eve_of[q] = add(true, a.priority(q));
        todo.push_back(q);
        return eve_of[q];
    };
    eve(a.initial);
    while (!todo.empty()) {
        int q = todo.front();
        todo.pop_front();
        int v = eve_of[q];
        for (int letter = 0; letter < a.n_letters; ++letter) {
            for (const auto& clause : dnf(a.delta[q][letter])) {
                std::set<int> dirs;
                for (auto [d, q2] : clause)
                    if (!dirs.insert(d).second)
                        throw NotNondeterministic("two moves share a direction");
                int av = add(false, idle);
                adam_of[av].letter = letter;
                adam_of[av].moves.assign(clause.begin(), clause.end());
                game.succ[v].push_back(av);
                if (clause.empty()) game.succ[av].push_back(win_sink);
                else
                    for (auto [d, q2] : clause) {
                        // eve() may grow the vector, so take the row after
                        const int target = eve(q2);
                        game.succ[av].push_back(target);
                    }
            }
        }
        if (game.succ[v].empty()) game.succ[v].push_back(lose_sink);
    }
    game.initial = eve_of[a.initial];
    ParitySolution sol = solve_parity(game);
    if (!sol.even_wins[game.initial]) return std::nullopt;

    // read the witness off the even strategy: one tree node per automaton
    // state the strategy can reach
    RegularTree t;
    std::map<int, int> node_of;
    std::deque<int> walk;
    auto node = [&](int q) {
        auto it = node_of.find(q);
        if (it != node_of.end()) return it->second;
        int m = static_cast<int>(t.letter.size());
        node_of[q] = m;
        t.letter.push_back(0);
        t.move.emplace_back(a.n_dirs, m);
        walk.push_back(q);
        return m;
    };
    t.m0 = node(a.initial);
    while (!walk.empty()) {
        int q = walk.front();
        walk.pop_front();
        int m = node_of[q];
        const AdamVertex& av = adam_of[sol.strategy[eve_of[q]]];
        t.letter[m] = av.letter;
        for (int d = 0; d < a.n_dirs; ++d) t.move[m][d] = m; // free directions loop back
        for (auto [d, q2] : av.moves) t.move[m][d] = node(q2);
    }
    return t;
}

DvvGame build_dvv_game(const Cgs& g, StateId s, const QuantPrefix& p, const BindPrefix& b) {
    g.validate();
    if (s < 0 || s >= static_cast<int>(g.states.size()))
        throw ValidationError("state out of range");
    std::set<std::string> vars;
    for (const Quant& q : p)
        if (!vars.insert(q.var).second)
            throw ValidationError("variable '" + q.var + "' is quantified twice");
    std::map<std::string, std::string> zeta = binding_fn(b);
    for (const std::string& agent : g.agents) {
        auto it = zeta.find(agent);
        if (it == zeta.end()) throw BindingIncomplete("agent '" + agent + "' has no bound variable");
        if (!vars.count(it->second))
            throw UndeclaredName("variable '" + it->second + "' is not quantified");
    }
    DvvGame d;
    d.g = &g;
    d.s0 = s;
    d.prefix = p;
    d.bind = b;
    d.maps = enumerate_dependence_maps(p, static_cast<int>(g.actions.size()), BigInt(1) << 14);
    return d;
}

namespace {

StateId dvv_step(const DvvGame& d, StateId t, const DependenceMap& theta, const Valuation& v) {
    Valuation w = theta.apply(v);
    std::vector<int> acts;
    std::map<std::string, std::string> zeta = binding_fn(d.bind);
    for (const std::string& agent : d.g->agents) acts.push_back(w.at(zeta.at(agent)));
    return d.g->step(t, acts);
}

} // namespace

std::vector<StateId> dvv_odd_succ(const DvvGame& d, StateId t, int map_idx) {
    if (map_idx < 0 || map_idx >= static_cast<int>(d.maps.size()))
        throw ValidationError("map index out of range");
    std::set<StateId> out;
    for (const Valuation& v :
         all_valuations(prefix_universals(d.prefix), static_cast<int>(d.g->actions.size())))
        out.insert(dvv_step(d, t, d.maps[map_idx], v));
    return {out.begin(), out.end()};
}

namespace {

bool dvv_rec(const DvvGame& d, Track& rho, int horizon, const PlayPredicate& target, bool even,
             std::map<Track, char>& memo) {
    if (static_cast<int>(rho.size()) == horizon + 1) return even == target(rho);
    auto hit = memo.find(rho);
    if (hit != memo.end()) return hit->second != 0;
    // even needs one map against which every reply keeps winning; odd needs
    // a winning reply against every map
    bool win = !even;
    for (int mi = 0; mi < static_cast<int>(d.maps.size()) && win != even; ++mi) {
        bool held = even;
        for (StateId t : dvv_odd_succ(d, rho.back(), mi)) {
            rho.push_back(t);
            bool sub = dvv_rec(d, rho, horizon, target, even, memo);
            rho.pop_back();
            if (sub != even) {
                held = !even;
                break;
            }
        }
        win = held;
    }
    memo[rho] = win ? 1 : 0;
    return win;
}

} // namespace

bool dvv_even_wins(const DvvGame& d, const PlayPredicate& target, int horizon) {
    if (horizon < 0) throw ValidationError("the horizon cannot be negative");
    Track rho{d.s0};
    std::map<Track, char> memo;
    return dvv_rec(d, rho, horizon, target, true, memo);
}

bool dvv_odd_wins(const DvvGame& d, const PlayPredicate& target, int horizon) {
    if (horizon < 0) throw ValidationError("the horizon cannot be negative");
    Track rho{d.s0};
    std::map<Track, char> memo;
    return dvv_rec(d, rho, horizon, target, false, memo);
}

bool dvv_encasement_exists(const DvvGame& d, const PlayPredicate& target, int horizon) {
    if (horizon < 0) throw ValidationError("the horizon cannot be negative");
    if (horizon == 0) return target(Track{d.s0});
    std::vector<Track> tracks = tracks_from(*d.g, d.s0, 1, horizon);
    std::map<Track, int> track_idx;
    for (size_t i = 0; i < tracks.size(); ++i) track_idx[tracks[i]] = static_cast<int>(i);
    const int dsize = static_cast<int>(d.g->actions.size());
    std::vector<std::string> univ;
    for (const std::string& x : prefix_universals(d.prefix)) univ.push_back(x);

    // odd side: one action per universal variable and track
    const size_t cells = univ.size() * tracks.size();
    if (cells > 24) throw DomainTooLarge("too many universal strategy cells to sweep");
    if (tracks.size() * std::log2(std::max<double>(2, d.maps.size())) > 28)
        throw DomainTooLarge("too many map assignments to sweep");
    std::vector<int> assign(tracks.size(), 0); // dependence map per track
    for (;;) {
        bool covered = true;
        std::vector<int> uact(cells, 0);
        for (;;) {
            Track rho{d.s0};
            for (int step = 0; step < horizon; ++step) {
                int ti = track_idx.at(rho);
                Valuation at;
                for (size_t ui = 0; ui < univ.size(); ++ui)
                    at[univ[ui]] = uact[ui * tracks.size() + ti];
                rho.push_back(dvv_step(d, rho.back(), d.maps[assign[ti]], at));
            }
            if (!target(rho)) {
                covered = false;
                break;
            }
            size_t i = 0;
            while (i < cells && ++uact[i] == dsize) uact[i++] = 0;
            if (i == cells) break;
        }
        if (covered) return true;
        size_t i = 0;
        while (i < assign.size() && ++assign[i] == static_cast<int>(d.maps.size())) assign[i++] = 0;
        if (i == assign.size()) break;
    }
    return false;
}

} // namespace slmc
