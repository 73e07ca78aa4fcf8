#include "oracles.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace slmc::oracle {

namespace {

int lasso_succ(int i, int n, int stem) { return i + 1 < n ? i + 1 : stem; }

// truth vector of f at every position of the lasso, by structural recursion
// with fixpoint iteration for the binary temporal operators
std::vector<char> truth_vector(const FormulaPtr& f,
                               const std::vector<std::set<std::string>>& word, int stem,
                               std::map<const Formula*, std::vector<char>>& memo) {
    const int n = static_cast<int>(word.size());
    auto hit = memo.find(f.get());
    if (hit != memo.end()) return hit->second;
    std::vector<char> out(n, 0);
    switch (f->op) {
        case Op::True: out.assign(n, 1); break;
        case Op::False: break;
        case Op::Atom:
            for (int i = 0; i < n; ++i) out[i] = word[i].count(f->name) ? 1 : 0;
            break;
        case Op::Not: {
            auto a = truth_vector(f->lhs, word, stem, memo);
            for (int i = 0; i < n; ++i) out[i] = !a[i];
            break;
        }
        case Op::And:
        case Op::Or: {
            auto a = truth_vector(f->lhs, word, stem, memo);
            auto b = truth_vector(f->rhs, word, stem, memo);
            for (int i = 0; i < n; ++i)
                out[i] = f->op == Op::And ? (a[i] && b[i]) : (a[i] || b[i]);
            break;
        }
        case Op::Next: {
            auto a = truth_vector(f->lhs, word, stem, memo);
            for (int i = 0; i < n; ++i) out[i] = a[lasso_succ(i, n, stem)];
            break;
        }
        case Op::Until:
        case Op::Release: {
            auto a = truth_vector(f->lhs, word, stem, memo);
            auto b = truth_vector(f->rhs, word, stem, memo);
            const bool until = f->op == Op::Until;
            out.assign(n, until ? 0 : 1);
            for (bool changed = true; changed;) {
                changed = false;
                for (int i = n - 1; i >= 0; --i) {
                    char nxt = out[lasso_succ(i, n, stem)];
                    char v = until ? (b[i] || (a[i] && nxt)) : (b[i] && (a[i] || nxt));
                    if (v != out[i]) {
                        out[i] = v;
                        changed = true;
                    }
                }
            }
            break;
        }
        default:
            throw NotLtl("temporal oracle handles pure path formulas only");
    }
    memo.emplace(f.get(), out);
    return out;
}

} // namespace

bool ltl_lasso(const FormulaPtr& f, const std::vector<std::set<std::string>>& stem,
               const std::vector<std::set<std::string>>& loop) {
    if (loop.empty()) throw ValidationError("lasso needs a nonempty loop");
    std::vector<std::set<std::string>> word = stem;
    word.insert(word.end(), loop.begin(), loop.end());
    std::map<const Formula*, std::vector<char>> memo;
    return truth_vector(f, word, static_cast<int>(stem.size()), memo)[0] != 0;
}

namespace {

// vertices Odd can force into a cycle whose least priority is odd, when Even
// is pinned to the given positional strategy
std::vector<char> odd_wins_restricted(const ParityGame& g, const std::vector<int>& even_move) {
    const int n = g.n;
    auto succs = [&](int v) {
        if (g.even_owner[v]) return std::vector<int>{even_move[v]};
        return g.succ[v];
    };
    // cores: vertices on a cycle of minimum priority p, for some odd p
    std::vector<char> core(n, 0);
    for (int p = 1; p <= *std::max_element(g.priority.begin(), g.priority.end()); p += 2) {
        // restrict to priorities >= p and look for cycles through priority p
        std::vector<char> in(n, 0);
        for (int v = 0; v < n; ++v) in[v] = g.priority[v] >= p;
        // iterative: can v start a path within `in` that returns to v?
        for (int v = 0; v < n; ++v) {
            if (!in[v] || g.priority[v] != p) continue;
            std::vector<char> seen(n, 0);
            std::vector<int> stack{v};
            bool back = false;
            while (!stack.empty() && !back) {
                int u = stack.back();
                stack.pop_back();
                for (int w : succs(u)) {
                    if (!in[w]) continue;
                    if (w == v) back = true;
                    if (!seen[w]) {
                        seen[w] = 1;
                        stack.push_back(w);
                    }
                }
            }
            if (back) core[v] = 1;
        }
    }
    // odd steers along any restricted path, so reachability suffices
    std::vector<char> win(n, 0);
    for (bool changed = true; changed;) {
        changed = false;
        for (int v = 0; v < n; ++v) {
            if (win[v]) continue;
            bool now = core[v] != 0;
            for (int w : succs(v)) now = now || win[w];
            if (now) {
                win[v] = 1;
                changed = true;
            }
        }
    }
    return win;
}

} // namespace

std::vector<bool> parity_brute(const ParityGame& g) {
    g.validate();
    std::vector<int> even_vs;
    for (int v = 0; v < g.n; ++v)
        if (g.even_owner[v]) even_vs.push_back(v);
    std::vector<bool> even_can(g.n, false);
    std::vector<size_t> pick(even_vs.size(), 0);
    for (;;) {
        std::vector<int> mv(g.n, -1);
        for (size_t i = 0; i < even_vs.size(); ++i)
            mv[even_vs[i]] = g.succ[even_vs[i]][pick[i]];
        std::vector<char> lost = odd_wins_restricted(g, mv);
        for (int v = 0; v < g.n; ++v)
            if (!lost[v]) even_can[v] = true;
        // odometer over strategy choices
        size_t i = 0;
        while (i < even_vs.size() && ++pick[i] == g.succ[even_vs[i]].size()) pick[i++] = 0;
        if (i == even_vs.size()) break;
    }
    return even_can;
}

namespace {

// player = true for Even. Standard attractor within the `alive` subgame.
std::vector<char> attractor(const ParityGame& g, const std::vector<char>& alive,
                            std::vector<char> base, bool player) {
    for (bool changed = true; changed;) {
        changed = false;
        for (int v = 0; v < g.n; ++v) {
            if (!alive[v] || base[v]) continue;
            bool mine = g.even_owner[v] == player;
            bool take = !mine;
            for (int w : g.succ[v]) {
                if (!alive[w]) continue;
                if (mine && base[w]) take = true;
                if (!mine && !base[w]) take = false;
            }
            if (take) {
                base[v] = 1;
                changed = true;
            }
        }
    }
    return base;
}

void zielonka_regions(const ParityGame& g, std::vector<char> alive, std::vector<char>& even_out) {
    int p = 0;
    bool any = false;
    for (int v = 0; v < g.n; ++v)
        if (alive[v] && (!any || g.priority[v] < p)) {
            p = g.priority[v];
            any = true;
        }
    if (!any) return;
    bool player = p % 2 == 0;
    std::vector<char> tops(g.n, 0);
    for (int v = 0; v < g.n; ++v) tops[v] = alive[v] && g.priority[v] == p;
    std::vector<char> a = attractor(g, alive, tops, player);
    std::vector<char> rest(g.n, 0);
    for (int v = 0; v < g.n; ++v) rest[v] = alive[v] && !a[v];
    std::vector<char> sub_even(g.n, 0);
    zielonka_regions(g, rest, sub_even);
    // does the opponent win anything in the subgame?
    std::vector<char> opp(g.n, 0);
    bool opp_any = false;
    for (int v = 0; v < g.n; ++v)
        if (rest[v] && (player ? !sub_even[v] : sub_even[v])) {
            opp[v] = 1;
            opp_any = true;
        }
    if (!opp_any) {
        if (player)
            for (int v = 0; v < g.n; ++v)
                if (alive[v]) even_out[v] = 1;
        return;
    }
    std::vector<char> b = attractor(g, alive, opp, !player);
    std::vector<char> rest2(g.n, 0);
    for (int v = 0; v < g.n; ++v) rest2[v] = alive[v] && !b[v];
    std::vector<char> even2(g.n, 0);
    zielonka_regions(g, rest2, even2);
    for (int v = 0; v < g.n; ++v) {
        if (!alive[v]) continue;
        if (rest2[v]) even_out[v] = even2[v];
        else even_out[v] = player ? 0 : 1; // b belongs to the opponent of `player`
    }
}

} // namespace

std::vector<bool> parity_small(const ParityGame& g) {
    std::vector<char> alive(g.n, 1), even(g.n, 0);
    zielonka_regions(g, alive, even);
    std::vector<bool> out(g.n);
    for (int v = 0; v < g.n; ++v) out[v] = even[v] != 0;
    return out;
}

std::vector<BoundedTree> all_bounded_trees(int dirs, int depth, int letters) {
    int nodes = 0, level = 1;
    for (int d = 0; d <= depth; ++d) {
        nodes += level;
        level *= dirs;
    }
    std::vector<BoundedTree> out;
    BoundedTree t{dirs, depth, std::vector<int>(nodes, 0)};
    for (;;) {
        out.push_back(t);
        int i = nodes - 1;
        while (i >= 0 && ++t.letter[i] == letters) t.letter[i--] = 0;
        if (i < 0) break;
    }
    return out;
}

namespace {

bool eval_posbool(const PosBool& b, const std::function<bool(int, int)>& move) {
    switch (b.kind) {
        case PosBool::Kind::True: return true;
        case PosBool::Kind::False: return false;
        case PosBool::Kind::Move: return move(b.dir, b.state);
        case PosBool::Kind::And:
            for (const PosBool& k : b.kids)
                if (!eval_posbool(k, move)) return false;
            return true;
        case PosBool::Kind::Or:
            for (const PosBool& k : b.kids)
                if (eval_posbool(k, move)) return true;
            return false;
    }
    return false;
}

bool bounded_member_rec(const TreeAutomaton& a, const BoundedTree& t, int node, int level,
                        int q, std::map<std::pair<int, int>, char>& memo) {
    if (level == t.depth) return true; // leaves end every obligation
    auto key = std::make_pair(node, q);
    auto hit = memo.find(key);
    if (hit != memo.end()) return hit->second != 0;
    memo[key] = 0; // provisional; trees are acyclic so never consulted
    bool ok = eval_posbool(a.delta[q][t.letter[node]], [&](int d, int q2) {
        return bounded_member_rec(a, t, node * t.dirs + d + 1, level + 1, q2, memo);
    });
    memo[key] = ok ? 1 : 0;
    return ok;
}

} // namespace

bool apt_bounded_member(const TreeAutomaton& a, const BoundedTree& t) {
    if (a.n_dirs != t.dirs) throw ValidationError("tree arity does not match the automaton");
    std::map<std::pair<int, int>, char> memo;
    return bounded_member_rec(a, t, 0, 0, a.initial, memo);
}

bool npt_member(const TreeAutomaton& a, const RegularTree& t) {
    // acceptance game: Even picks a disjunct at (q, m), Odd picks a move
    const int n_nodes = static_cast<int>(t.letter.size());
    int max_prio = static_cast<int>(a.chain.size());
    ParityGame game;
    auto add = [&](bool even, int prio) {
        game.even_owner.push_back(even);
        game.priority.push_back(prio);
        game.succ.emplace_back();
        return game.n++;
    };
    int win_sink = add(true, 2);
    game.succ[win_sink].push_back(win_sink);
    int lose_sink = add(true, 1);
    game.succ[lose_sink].push_back(lose_sink);

    std::map<std::pair<int, int>, int> pos;
    std::vector<std::pair<int, int>> todo;
    auto position = [&](int q, int m) {
        auto key = std::make_pair(q, m);
        auto it = pos.find(key);
        if (it != pos.end()) return it->second;
        int v = add(true, a.priority(q));
        pos[key] = v;
        todo.push_back(key);
        return v;
    };
    position(a.initial, t.m0);
    while (!todo.empty()) {
        auto [q, m] = todo.back();
        todo.pop_back();
        int v = pos[{q, m}];
        for (const auto& moves : dnf(a.delta[q][t.letter[m]])) {
            if (moves.empty()) {
                game.succ[v].push_back(win_sink);
                continue;
            }
            int mid = add(false, max_prio + 1);
            game.succ[v].push_back(mid);
            for (auto [d, q2] : moves) {
                if (d < 0 || d >= static_cast<int>(t.move[m].size()))
                    throw ValidationError("regular tree misses a direction");
                // position() may grow the vector, so take the row after
                const int target = position(q2, t.move[m][d]);
                game.succ[mid].push_back(target);
            }
        }
        if (game.succ[v].empty()) game.succ[v].push_back(lose_sink);
    }
    (void)n_nodes;
    game.initial = pos[{a.initial, t.m0}];
    return parity_small(game)[game.initial];
}

namespace {

bool qptl_eval(const FormulaPtr& f, int pos, int horizon, std::map<std::string, unsigned>& env) {
    switch (f->op) {
        case Op::True: return true;
        case Op::False: return false;
        case Op::Atom: {
            auto it = env.find(f->name);
            if (it == env.end()) throw UndeclaredName("unquantified proposition '" + f->name + "'");
            return pos <= horizon && (it->second >> pos & 1u);
        }
        case Op::Not: return !qptl_eval(f->lhs, pos, horizon, env);
        case Op::And: return qptl_eval(f->lhs, pos, horizon, env) && qptl_eval(f->rhs, pos, horizon, env);
        case Op::Or: return qptl_eval(f->lhs, pos, horizon, env) || qptl_eval(f->rhs, pos, horizon, env);
        case Op::Next: return qptl_eval(f->lhs, pos + 1, horizon, env);
        case Op::PropExists:
        case Op::PropForall: {
            const bool exists = f->op == Op::PropExists;
            for (unsigned m = 0; m < (2u << horizon); ++m) {
                env[f->name] = m;
                bool v = qptl_eval(f->lhs, pos, horizon, env);
                env.erase(f->name);
                if (v == exists) return exists;
            }
            return !exists;
        }
        default:
            throw NotLtl("the brute-force evaluation covers next-only formulas");
    }
}

} // namespace

bool qptl_xonly(const FormulaPtr& f, int horizon) {
    std::map<std::string, unsigned> env;
    return qptl_eval(f, 0, horizon, env);
}

std::vector<FormulaPtr> all_ltl_formulas(const std::vector<std::string>& atoms,
                                         int max_size) {
    // by_size[n] holds every formula with exactly n nodes
    std::vector<std::vector<FormulaPtr>> by_size(static_cast<size_t>(max_size) + 1);
    if (max_size >= 1) {
        by_size[1].push_back(f_true());
        by_size[1].push_back(f_false());
        for (const std::string& a : atoms) by_size[1].push_back(f_atom(a));
    }
    for (int n = 2; n <= max_size; ++n) {
        for (const FormulaPtr& a : by_size[static_cast<size_t>(n - 1)]) {
            by_size[static_cast<size_t>(n)].push_back(f_not(a));
            by_size[static_cast<size_t>(n)].push_back(f_next(a));
        }
        for (int k = 1; k <= n - 2; ++k)
            for (const FormulaPtr& a : by_size[static_cast<size_t>(k)])
                for (const FormulaPtr& b : by_size[static_cast<size_t>(n - 1 - k)]) {
                    by_size[static_cast<size_t>(n)].push_back(f_and(a, b));
                    by_size[static_cast<size_t>(n)].push_back(f_or(a, b));
                    by_size[static_cast<size_t>(n)].push_back(f_until(a, b));
                    by_size[static_cast<size_t>(n)].push_back(f_release(a, b));
                }
    }
    std::vector<FormulaPtr> out;
    for (const auto& bucket : by_size) out.insert(out.end(), bucket.begin(), bucket.end());
    return out;
}

Cgs random_cgs(std::mt19937& rng, int n_states, int n_agents, int n_actions, int n_atoms) {
    Cgs g;
    g.name = "random";
    for (int i = 0; i < n_agents; ++i) g.agents.push_back("a" + std::to_string(i));
    for (int i = 0; i < n_actions; ++i) g.actions.push_back("c" + std::to_string(i));
    for (int i = 0; i < n_states; ++i) g.states.push_back("s" + std::to_string(i));
    for (int i = 0; i < n_atoms; ++i) g.atoms.insert("p" + std::to_string(i));
    std::uniform_int_distribution<int> st(0, n_states - 1);
    std::uniform_int_distribution<int> coin(0, 1);
    g.label.resize(n_states);
    for (int s = 0; s < n_states; ++s)
        for (const std::string& p : g.atoms)
            if (coin(rng)) g.label[s].insert(p);
    g.initial = 0;
    g.trans.resize(n_states);
    for (int s = 0; s < n_states; ++s) {
        g.trans[s].resize(g.decision_count());
        for (int r = 0; r < g.decision_count(); ++r) g.trans[s][r] = st(rng);
    }
    g.validate();
    return g;
}

FormulaPtr random_ltl(std::mt19937& rng, const std::vector<std::string>& atoms, int size) {
    std::uniform_int_distribution<int> pick(0, 6);
    std::uniform_int_distribution<int> leaf(0, static_cast<int>(atoms.size()) + 1);
    if (size <= 1) {
        int c = leaf(rng);
        if (c == static_cast<int>(atoms.size())) return f_true();
        if (c > static_cast<int>(atoms.size())) return f_false();
        return f_atom(atoms[c]);
    }
    switch (pick(rng)) {
        case 0: return f_not(random_ltl(rng, atoms, size - 1));
        case 1: return f_next(random_ltl(rng, atoms, size - 1));
        case 2: {
            int ls = 1 + static_cast<int>(rng() % static_cast<unsigned>(size - 1));
            return f_and(random_ltl(rng, atoms, ls), random_ltl(rng, atoms, size - ls));
        }
        case 3: {
            int ls = 1 + static_cast<int>(rng() % static_cast<unsigned>(size - 1));
            return f_or(random_ltl(rng, atoms, ls), random_ltl(rng, atoms, size - ls));
        }
        case 4: {
            int ls = 1 + static_cast<int>(rng() % static_cast<unsigned>(size - 1));
            return f_until(random_ltl(rng, atoms, ls), random_ltl(rng, atoms, size - ls));
        }
        case 5: {
            int ls = 1 + static_cast<int>(rng() % static_cast<unsigned>(size - 1));
            return f_release(random_ltl(rng, atoms, ls), random_ltl(rng, atoms, size - ls));
        }
        default: return random_ltl(rng, atoms, 1);
    }
}

namespace {

// boolean combination of atoms and X-chains, depth-limited
FormulaPtr random_matrix(std::mt19937& rng, const std::vector<std::string>& atoms, int xdepth,
                         int size) {
    std::uniform_int_distribution<int> pick(0, 4);
    if (size <= 1 || atoms.empty()) {
        if (atoms.empty()) return f_true();
        return f_atom(atoms[rng() % atoms.size()]);
    }
    switch (pick(rng)) {
        case 0: return f_not(random_matrix(rng, atoms, xdepth, size - 1));
        case 1:
            if (xdepth > 0) return f_next(random_matrix(rng, atoms, xdepth - 1, size - 1));
            [[fallthrough]];
        case 2: {
            int ls = 1 + static_cast<int>(rng() % static_cast<unsigned>(size - 1));
            return f_and(random_matrix(rng, atoms, xdepth, ls),
                         random_matrix(rng, atoms, xdepth, size - ls));
        }
        case 3: {
            int ls = 1 + static_cast<int>(rng() % static_cast<unsigned>(size - 1));
            return f_or(random_matrix(rng, atoms, xdepth, ls),
                        random_matrix(rng, atoms, xdepth, size - ls));
        }
        default: return random_matrix(rng, atoms, xdepth, 1);
    }
}

// ensure the matrix mentions every agent through at least one temporal step
FormulaPtr forced_temporal(std::mt19937& rng, const std::vector<std::string>& atoms, int xdepth,
                           int size) {
    FormulaPtr m = random_matrix(rng, atoms, std::max(0, xdepth - 1), size);
    return f_next(m);
}

} // namespace

FormulaPtr random_one_goal_xonly(std::mt19937& rng, const Cgs& g, int n_vars, int xdepth) {
    std::vector<std::string> vars;
    for (int i = 0; i < n_vars; ++i) vars.push_back("x" + std::to_string(i));
    std::vector<std::string> atoms(g.atoms.begin(), g.atoms.end());
    BindPrefix bind;
    std::set<std::string> used;
    for (const std::string& a : g.agents) {
        const std::string& v = vars[rng() % vars.size()];
        bind.push_back({a, v});
        used.insert(v);
    }
    FormulaPtr f = forced_temporal(rng, atoms, xdepth, 4);
    for (auto it = bind.rbegin(); it != bind.rend(); ++it) f = f_bind(it->agent, it->var, f);
    // quantify exactly the bound variables, random kinds, random order
    std::vector<std::string> order(used.begin(), used.end());
    std::shuffle(order.begin(), order.end(), rng);
    for (auto it = order.rbegin(); it != order.rend(); ++it)
        f = rng() % 2 ? f_exists(*it, f) : f_forall(*it, f);
    return f;
}

FormulaPtr random_prenex_xonly(std::mt19937& rng, const Cgs& g, int n_vars, int n_goals,
                               int xdepth) {
    std::vector<std::string> vars;
    for (int i = 0; i < n_vars; ++i) vars.push_back("x" + std::to_string(i));
    std::vector<std::string> atoms(g.atoms.begin(), g.atoms.end());
    std::set<std::string> used;
    auto goal = [&]() {
        BindPrefix bind;
        for (const std::string& a : g.agents) {
            const std::string& v = vars[rng() % vars.size()];
            bind.push_back({a, v});
            used.insert(v);
        }
        FormulaPtr f = forced_temporal(rng, atoms, xdepth, 3);
        for (auto it = bind.rbegin(); it != bind.rend(); ++it) f = f_bind(it->agent, it->var, f);
        return f;
    };
    FormulaPtr body = goal();
    for (int i = 1; i < n_goals; ++i) {
        FormulaPtr next = goal();
        if (rng() % 3 == 0) next = f_not(next);
        body = rng() % 2 ? f_and(body, next) : f_or(body, next);
    }
    std::vector<std::string> order(used.begin(), used.end());
    std::shuffle(order.begin(), order.end(), rng);
    for (auto it = order.rbegin(); it != order.rend(); ++it)
        body = rng() % 2 ? f_exists(*it, body) : f_forall(*it, body);
    return body;
}

FormulaPtr random_qptl_xonly(std::mt19937& rng, int n_props, int depth) {
    std::vector<std::string> props;
    for (int i = 0; i < n_props; ++i) props.push_back("q" + std::to_string(i));
    FormulaPtr body = random_matrix(rng, props, depth, 5);
    for (auto it = props.rbegin(); it != props.rend(); ++it)
        body = rng() % 2 ? f_prop_exists(*it, body) : f_prop_forall(*it, body);
    return body;
}

ParityGame random_parity_game(std::mt19937& rng, int n_vertices, int max_priority) {
    ParityGame g;
    g.n = n_vertices;
    std::uniform_int_distribution<int> prio(1, max_priority);
    std::uniform_int_distribution<int> vtx(0, n_vertices - 1);
    for (int v = 0; v < n_vertices; ++v) {
        g.even_owner.push_back(rng() % 2 == 0);
        g.priority.push_back(prio(rng));
        std::set<int> out{vtx(rng)};
        while (rng() % 2) out.insert(vtx(rng));
        g.succ.emplace_back(out.begin(), out.end());
    }
    g.initial = 0;
    return g;
}

} // namespace slmc::oracle
