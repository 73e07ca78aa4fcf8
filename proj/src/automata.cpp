#include "slmc/automata.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

namespace slmc {

void WordAutomaton::validate() const {
    if (n_states < 0 || n_letters <= 0) throw ValidationError("word automaton sizes are off");
    for (int q : initial)
        if (q < 0 || q >= n_states) throw ValidationError("initial state out of range");
    for (int q : fin)
        if (q < 0 || q >= n_states) throw ValidationError("acceptance state out of range");
    for (const auto& [key, succs] : delta) {
        if (key.first < 0 || key.first >= n_states || key.second < 0 || key.second >= n_letters)
            throw ValidationError("transition key out of range");
        for (int q : succs)
            if (q < 0 || q >= n_states) throw ValidationError("transition target out of range");
    }
}

int letter_index(const std::set<std::string>& present, const std::vector<std::string>& atoms) {
    int mask = 0;
    size_t hit = 0;
    for (size_t i = 0; i < atoms.size(); ++i)
        if (present.count(atoms[i])) {
            mask |= 1 << i;
            ++hit;
        }
    if (hit != present.size())
        for (const std::string& a : present)
            if (std::find(atoms.begin(), atoms.end(), a) == atoms.end())
                throw UndeclaredName("atom '" + a + "' is not in the alphabet");
    return mask;
}

namespace {

// Bit layout of a tableau state: one bit per atom of the alphabet, then one
// bit per temporal subformula, in the structural order of the subformula set.
struct Basis {
    std::vector<std::string> atoms;
    std::vector<FormulaPtr> temporal;
    // keyed structurally: repeated subterms share one bit regardless of how
    // the formula object was assembled
    FormulaMap<int> temporal_bit;

    int bits() const { return static_cast<int>(atoms.size() + temporal.size()); }
};

bool basis_truth(const Basis& b, const FormulaPtr& f, unsigned state) {
    switch (f->op) {
        case Op::True: return true;
        case Op::False: return false;
        case Op::Atom: {
            auto it = std::find(b.atoms.begin(), b.atoms.end(), f->name);
            if (it == b.atoms.end())
                throw UndeclaredName("atom '" + f->name + "' is not in the alphabet");
            return state >> (it - b.atoms.begin()) & 1u;
        }
        case Op::Not: return !basis_truth(b, f->lhs, state);
        case Op::And: return basis_truth(b, f->lhs, state) && basis_truth(b, f->rhs, state);
        case Op::Or: return basis_truth(b, f->lhs, state) || basis_truth(b, f->rhs, state);
        case Op::Next:
        case Op::Until:
        case Op::Release:
            return state >> b.temporal_bit.at(f) & 1u;
        default:
            throw NotLtl("path formulas admit booleans and temporal operators only");
    }
}

} // namespace

WordAutomaton ltl_to_nbw(const FormulaPtr& psi, const std::vector<std::string>& atoms) {
    Basis b;
    b.atoms = atoms;
    std::vector<FormulaPtr> pending;
    for (const FormulaPtr& f : sub(psi)) {
        if (f->op != Op::Next && f->op != Op::Until && f->op != Op::Release) continue;
        b.temporal_bit[f] = static_cast<int>(atoms.size() + b.temporal.size());
        b.temporal.push_back(f);
        if (f->op != Op::Next) pending.push_back(f);
    }
    if (b.bits() > 12) throw DomainTooLarge("path formula basis beyond 12 bits");
    const unsigned n_base = 1u << b.bits();
    const int atom_mask = (1 << atoms.size()) - 1;

    // local consistency of a source/target pair: every temporal bit of the
    // source matches its one-step expansion
    auto linked = [&](unsigned s, unsigned t) {
        for (const FormulaPtr& f : b.temporal) {
            bool bit = s >> b.temporal_bit.at(f) & 1u;
            bool want = false;
            switch (f->op) {
                case Op::Next: want = basis_truth(b, f->lhs, t); break;
                case Op::Until:
                    want = basis_truth(b, f->rhs, s) ||
                           (basis_truth(b, f->lhs, s) && (t >> b.temporal_bit.at(f) & 1u));
                    break;
                default:
                    want = basis_truth(b, f->rhs, s) &&
                           (basis_truth(b, f->lhs, s) || (t >> b.temporal_bit.at(f) & 1u));
            }
            if (bit != want) return false;
        }
        return true;
    };

    // fairness: an asserted until must be discharged here, and a denied
    // release must be excused here (its right side failing); otherwise the
    // claim is allowed to ride along to the successor
    const int k = static_cast<int>(pending.size());
    auto fair = [&](unsigned s, int i) {
        const FormulaPtr& f = pending[static_cast<size_t>(i)];
        const bool bit = s >> b.temporal_bit.at(f) & 1u;
        const bool rhs = basis_truth(b, f->rhs, s);
        return f->op == Op::Until ? (!bit || rhs) : (bit || !rhs);
    };

    WordAutomaton a;
    a.n_letters = 1 << atoms.size();
    const int copies = std::max(k, 1);
    a.n_states = static_cast<int>(n_base) * copies;
    auto id = [&](unsigned s, int i) { return static_cast<int>(s) * copies + i; };
    for (unsigned s = 0; s < n_base; ++s) {
        if (basis_truth(b, psi, s)) a.initial.insert(id(s, 0));
        int letter = static_cast<int>(s) & atom_mask;
        for (unsigned t = 0; t < n_base; ++t) {
            if (!linked(s, t)) continue;
            for (int i = 0; i < copies; ++i) {
                int j = (k > 0 && fair(s, i)) ? (i + 1) % k : i;
                a.delta[{id(s, i), letter}].insert(id(t, j));
            }
        }
        if (k == 0) a.fin.insert(id(s, 0));
        else if (fair(s, k - 1)) a.fin.insert(id(s, k - 1));
    }

    // trim to the states reachable from the initial set
    std::vector<char> reach(a.n_states, 0);
    std::deque<int> work(a.initial.begin(), a.initial.end());
    for (int q : a.initial) reach[q] = 1;
    while (!work.empty()) {
        int q = work.front();
        work.pop_front();
        for (int l = 0; l < a.n_letters; ++l) {
            auto it = a.delta.find({q, l});
            if (it == a.delta.end()) continue;
            for (int t : it->second)
                if (!reach[t]) {
                    reach[t] = 1;
                    work.push_back(t);
                }
        }
    }
    std::vector<int> renum(a.n_states, -1);
    int live = 0;
    for (int q = 0; q < a.n_states; ++q)
        if (reach[q]) renum[q] = live++;
    WordAutomaton out;
    out.n_letters = a.n_letters;
    out.n_states = live;
    for (int q : a.initial) out.initial.insert(renum[q]);
    for (int q : a.fin)
        if (reach[q]) out.fin.insert(renum[q]);
    for (const auto& [key, succs] : a.delta) {
        if (!reach[key.first]) continue;
        std::set<int>& bucket = out.delta[{renum[key.first], key.second}];
        for (int t : succs) bucket.insert(renum[t]);
    }
    out.validate();
    return out;
}

WordAutomaton dualize_word(const WordAutomaton& a) {
    WordAutomaton d = a;
    d.universal = !a.universal;
    d.cobuchi = !a.cobuchi;
    return d;
}

bool word_accepts_lasso(const WordAutomaton& a, const std::vector<int>& stem,
                        const std::vector<int>& loop) {
    a.validate();
    if (loop.empty()) throw ValidationError("lasso needs a nonempty loop");
    std::vector<int> word = stem;
    word.insert(word.end(), loop.begin(), loop.end());
    for (int l : word)
        if (l < 0 || l >= a.n_letters) throw ValidationError("lasso letter out of range");
    const int n = static_cast<int>(word.size());
    auto succ_pos = [&](int i) { return i + 1 < n ? i + 1 : static_cast<int>(stem.size()); };
    auto node = [&](int q, int i) { return q * n + i; };

    std::vector<char> reach(static_cast<size_t>(a.n_states) * n, 0);
    std::deque<int> work;
    for (int q : a.initial) {
        reach[node(q, 0)] = 1;
        work.push_back(node(q, 0));
    }
    while (!work.empty()) {
        int v = work.front();
        work.pop_front();
        int q = v / n, i = v % n;
        auto it = a.delta.find({q, word[i]});
        if (it == a.delta.end()) continue;
        for (int t : it->second) {
            int w = node(t, succ_pos(i));
            if (!reach[w]) {
                reach[w] = 1;
                work.push_back(w);
            }
        }
    }

    // is there a reachable cycle through an acceptance node (want_fin), or a
    // reachable cycle visiting no acceptance node at all
    auto cycle = [&](bool want_fin) {
        for (int q = 0; q < a.n_states; ++q) {
            if (want_fin != (a.fin.count(q) > 0)) continue;
            for (int i = 0; i < n; ++i) {
                int v = node(q, i);
                if (!reach[v]) continue;
                std::vector<char> seen(reach.size(), 0);
                std::deque<int> queue{v};
                bool back = false;
                while (!queue.empty() && !back) {
                    int su = queue.front();
                    queue.pop_front();
                    int uq = su / n, ui = su % n;
                    auto it = a.delta.find({uq, word[ui]});
                    if (it == a.delta.end()) continue;
                    for (int t : it->second) {
                        if (!want_fin && a.fin.count(t)) continue;
                        int w = node(t, succ_pos(ui));
                        if (w == v) back = true;
                        if (!seen[w]) {
                            seen[w] = 1;
                            queue.push_back(w);
                        }
                    }
                }
                if (back) return true;
            }
        }
        return false;
    };
    if (!a.universal) return a.cobuchi ? cycle(false) : cycle(true);
    return a.cobuchi ? !cycle(true) : !cycle(false);
}

PosBool PosBool::yes() { return PosBool{}; }

PosBool PosBool::no() {
    PosBool b;
    b.kind = Kind::False;
    return b;
}

PosBool PosBool::move(int dir, int state) {
    PosBool b;
    b.kind = Kind::Move;
    b.dir = dir;
    b.state = state;
    return b;
}

PosBool PosBool::all(std::vector<PosBool> kids) {
    PosBool b;
    b.kind = Kind::And;
    for (PosBool& k : kids) {
        if (k.kind == Kind::True) continue;
        if (k.kind == Kind::False) return no();
        if (k.kind == Kind::And)
            for (PosBool& kk : k.kids) b.kids.push_back(std::move(kk));
        else b.kids.push_back(std::move(k));
    }
    if (b.kids.empty()) return yes();
    if (b.kids.size() == 1) return b.kids[0];
    return b;
}

PosBool PosBool::any(std::vector<PosBool> kids) {
    PosBool b;
    b.kind = Kind::Or;
    for (PosBool& k : kids) {
        if (k.kind == Kind::False) continue;
        if (k.kind == Kind::True) return yes();
        if (k.kind == Kind::Or)
            for (PosBool& kk : k.kids) b.kids.push_back(std::move(kk));
        else b.kids.push_back(std::move(k));
    }
    if (b.kids.empty()) return no();
    if (b.kids.size() == 1) return b.kids[0];
    return b;
}

std::string to_string(const PosBool& b) {
    switch (b.kind) {
        case PosBool::Kind::True: return "true";
        case PosBool::Kind::False: return "false";
        case PosBool::Kind::Move:
            return "(" + std::to_string(b.dir) + "," + std::to_string(b.state) + ")";
        case PosBool::Kind::And:
        case PosBool::Kind::Or: {
            std::string sep = b.kind == PosBool::Kind::And ? " & " : " | ";
            std::string out = "[";
            for (size_t i = 0; i < b.kids.size(); ++i) {
                if (i) out += sep;
                out += to_string(b.kids[i]);
            }
            return out + "]";
        }
    }
    return "?";
}

bool is_conjunctive(const PosBool& b) {
    if (b.kind == PosBool::Kind::Or) return false;
    for (const PosBool& k : b.kids)
        if (!is_conjunctive(k)) return false;
    return true;
}

PosBool dual_posbool(const PosBool& b) {
    switch (b.kind) {
        case PosBool::Kind::True: return PosBool::no();
        case PosBool::Kind::False: return PosBool::yes();
        case PosBool::Kind::Move: return b;
        case PosBool::Kind::And:
        case PosBool::Kind::Or: {
            std::vector<PosBool> kids;
            for (const PosBool& k : b.kids) kids.push_back(dual_posbool(k));
            return b.kind == PosBool::Kind::And ? PosBool::any(std::move(kids))
                                                : PosBool::all(std::move(kids));
        }
    }
    return b;
}

std::vector<std::set<std::pair<int, int>>> dnf(const PosBool& b) {
    switch (b.kind) {
        case PosBool::Kind::True: return {{}};
        case PosBool::Kind::False: return {};
        case PosBool::Kind::Move: return {{{b.dir, b.state}}};
        case PosBool::Kind::Or: {
            std::set<std::set<std::pair<int, int>>> acc;
            for (const PosBool& k : b.kids)
                for (auto& d : dnf(k)) acc.insert(std::move(d));
            return {acc.begin(), acc.end()};
        }
        case PosBool::Kind::And: {
            std::vector<std::set<std::pair<int, int>>> acc{{}};
            for (const PosBool& k : b.kids) {
                auto part = dnf(k);
                std::set<std::set<std::pair<int, int>>> next;
                for (const auto& left : acc)
                    for (const auto& right : part) {
                        std::set<std::pair<int, int>> merged = left;
                        merged.insert(right.begin(), right.end());
                        next.insert(std::move(merged));
                        if (next.size() > (1u << 20))
                            throw DomainTooLarge("transition normal form beyond 2^20 clauses");
                    }
                acc.assign(next.begin(), next.end());
            }
            return acc;
        }
    }
    return {};
}

PosBool map_moves(const PosBool& b, const std::function<PosBool(int, int)>& fn) {
    switch (b.kind) {
        case PosBool::Kind::True:
        case PosBool::Kind::False: return b;
        case PosBool::Kind::Move: return fn(b.dir, b.state);
        case PosBool::Kind::And:
        case PosBool::Kind::Or: {
            std::vector<PosBool> kids;
            for (const PosBool& k : b.kids) kids.push_back(map_moves(k, fn));
            return b.kind == PosBool::Kind::And ? PosBool::all(std::move(kids))
                                                : PosBool::any(std::move(kids));
        }
    }
    return b;
}

namespace {

void check_moves(const TreeAutomaton& a, const PosBool& b) {
    if (b.kind == PosBool::Kind::Move) {
        if (b.dir < 0 || b.dir >= a.n_dirs || b.state < 0 || b.state >= a.n_states)
            throw ValidationError("transition move out of range");
    }
    for (const PosBool& k : b.kids) check_moves(a, k);
}

} // namespace

void TreeAutomaton::validate() const {
    if (n_states <= 0 || n_letters <= 0 || n_dirs <= 0)
        throw ValidationError("tree automaton sizes are off");
    if (initial < 0 || initial >= n_states) throw ValidationError("initial state out of range");
    if (sigma_letters > 0 && sigma_letters * n_dirs != n_letters)
        throw ValidationError("letters do not factor over the directions");
    if (static_cast<int>(delta.size()) != n_states)
        throw ValidationError("one transition row per state, please");
    for (const auto& row : delta) {
        if (static_cast<int>(row.size()) != n_letters)
            throw ValidationError("one transition per letter, please");
        for (const PosBool& b : row) check_moves(*this, b);
    }
    if (chain.empty()) throw ValidationError("the parity chain is empty");
    for (size_t i = 0; i + 1 < chain.size(); ++i)
        for (int q : chain[i])
            if (!chain[i + 1].count(q)) throw ValidationError("the parity chain is not nested");
    if (static_cast<int>(chain.back().size()) != n_states)
        throw ValidationError("the last chain set must hold every state");
}

int TreeAutomaton::priority(int q) const {
    for (size_t i = 0; i < chain.size(); ++i)
        if (chain[i].count(q)) return static_cast<int>(i) + 1;
    throw ValidationError("state missing from the parity chain");
}

namespace {

std::set<std::string> var_set(const std::vector<std::string>& vars) {
    std::set<std::string> s(vars.begin(), vars.end());
    if (s.size() != vars.size()) throw ValidationError("variable list has duplicates");
    return s;
}

// joint action of all agents under the environment agent -> variable,
// reading actions off the valuation
std::vector<int> joint_action(const Cgs& g, const std::map<std::string, std::string>& env,
                              const Valuation& v) {
    std::vector<int> acts;
    for (const std::string& a : g.agents) {
        auto it = env.find(a);
        if (it == env.end()) throw BindingIncomplete("agent '" + a + "' has no bound variable");
        auto vt = v.find(it->second);
        if (vt == v.end())
            throw UndeclaredName("variable '" + it->second + "' is outside the alphabet");
        acts.push_back(vt->second);
    }
    return acts;
}

} // namespace

TreeAutomaton goal_uct(const Cgs& g, const BindPrefix& bind, const WordAutomaton& ucw,
                       const std::vector<std::string>& vars) {
    if (!ucw.universal || !ucw.cobuchi) throw NotUniversal("the goal automaton runs on a ucw");
    std::vector<std::string> atoms(g.atoms.begin(), g.atoms.end());
    if (ucw.n_letters != 1 << atoms.size())
        throw ValidationError("word alphabet does not match the model labels");
    std::map<std::string, std::string> env = binding_fn(bind);
    std::set<std::string> vs = var_set(vars);
    std::vector<Valuation> vals = all_valuations(vs, static_cast<int>(g.actions.size()));
    const int n_dirs = static_cast<int>(g.states.size());

    TreeAutomaton t;
    t.sigma_letters = static_cast<int>(vals.size());
    t.n_dirs = n_dirs;
    t.n_letters = t.sigma_letters * n_dirs;
    t.n_states = ucw.n_states + 1;
    t.initial = 0;
    t.delta.assign(t.n_states, std::vector<PosBool>(t.n_letters, PosBool::yes()));

    auto word_moves = [&](int q_word, int s, StateId dir) {
        std::vector<PosBool> moves;
        auto it = ucw.delta.find({q_word, letter_index(g.label[s], atoms)});
        if (it != ucw.delta.end())
            for (int q2 : it->second) moves.push_back(PosBool::move(dir, q2 + 1));
        return PosBool::all(std::move(moves));
    };
    for (int vi = 0; vi < static_cast<int>(vals.size()); ++vi) {
        for (int s = 0; s < n_dirs; ++s) {
            const int letter = vi * n_dirs + s;
            StateId dir = g.step(s, joint_action(g, env, vals[vi]));
            std::vector<PosBool> first;
            for (int qi : ucw.initial) first.push_back(word_moves(qi, s, dir));
            t.delta[0][letter] = PosBool::all(std::move(first));
            for (int q = 0; q < ucw.n_states; ++q)
                t.delta[q + 1][letter] = word_moves(q, s, dir);
        }
    }
    std::set<int> bad;
    for (int q : ucw.fin) bad.insert(q + 1);
    std::set<int> everything;
    for (int q = 0; q < t.n_states; ++q) everything.insert(q);
    t.chain = {bad, everything};
    t.validate();
    return t;
}

TreeAutomaton sentence_uct(const Cgs& g, const TreeAutomaton& goal, const QuantPrefix& prefix,
                           const std::vector<std::string>& vars) {
    std::set<std::string> vs = var_set(vars);
    std::set<std::string> quantified;
    for (const Quant& q : prefix)
        if (!quantified.insert(q.var).second)
            throw ValidationError("variable '" + q.var + "' is quantified twice");
    if (quantified != vs) throw PrefixMismatch("prefix variables differ from the goal variables");
    const int dsize = static_cast<int>(g.actions.size());
    if (goal.sigma_letters <= 0) throw AlphabetNotProduct("the goal alphabet must factor");

    std::vector<DependenceMap> maps = enumerate_dependence_maps(prefix, dsize, BigInt(1) << 14);
    std::vector<Valuation> uvals = all_valuations(prefix_universals(prefix), dsize);

    TreeAutomaton t;
    t.sigma_letters = static_cast<int>(maps.size());
    t.n_dirs = goal.n_dirs;
    t.n_letters = t.sigma_letters * t.n_dirs;
    t.n_states = goal.n_states;
    t.initial = goal.initial;
    t.chain = goal.chain;
    t.delta.assign(t.n_states, std::vector<PosBool>(t.n_letters, PosBool::yes()));
    for (int mi = 0; mi < static_cast<int>(maps.size()); ++mi) {
        // the letters the goal automaton would read under this map
        std::vector<long> goal_sigma;
        for (const Valuation& u : uvals)
            goal_sigma.push_back(valuation_rank(maps[mi].apply(u), dsize));
        for (int s = 0; s < t.n_dirs; ++s) {
            for (int q = 0; q < t.n_states; ++q) {
                std::vector<PosBool> parts;
                for (long gs : goal_sigma)
                    parts.push_back(goal.delta[q][static_cast<int>(gs) * goal.n_dirs + s]);
                t.delta[q][mi * t.n_dirs + s] = PosBool::all(std::move(parts));
            }
        }
    }
    t.validate();
    return t;
}

namespace {

// conjunctive transition as a move list; nullopt when it is false
std::optional<std::vector<std::pair<int, int>>> conj_moves(const PosBool& b) {
    switch (b.kind) {
        case PosBool::Kind::True: return std::vector<std::pair<int, int>>{};
        case PosBool::Kind::False: return std::nullopt;
        case PosBool::Kind::Move: return std::vector<std::pair<int, int>>{{b.dir, b.state}};
        case PosBool::Kind::And: {
            std::vector<std::pair<int, int>> out;
            for (const PosBool& k : b.kids) {
                auto part = conj_moves(k);
                if (!part) return std::nullopt;
                out.insert(out.end(), part->begin(), part->end());
            }
            return out;
        }
        case PosBool::Kind::Or:
            throw NotUniversal("disjunctive transition in a universal automaton");
    }
    return std::nullopt;
}

struct Macro {
    std::vector<int> states;          // sorted
    std::vector<int> rank;            // aligned with states
    std::vector<char> owing;          // aligned; tracked even-rank states
    auto operator<=>(const Macro&) const = default;
};

} // namespace

TreeAutomaton nondeterminize_cobuchi(const TreeAutomaton& u) {
    u.validate();
    for (const auto& row : u.delta)
        for (const PosBool& b : row)
            if (!is_conjunctive(b)) throw NotUniversal("transitions must be conjunctive");
    if (u.chain.size() > 2)
        throw Unsupported("the ranking construction digests co-Büchi chains only");
    const std::set<int>& bad = u.chain.front();
    const int max_rank = 2 * u.n_states;

    std::map<Macro, int> ids;
    std::vector<Macro> macros;
    std::deque<int> work;
    auto intern = [&](Macro m) {
        auto it = ids.find(m);
        if (it != ids.end()) return it->second;
        int id = static_cast<int>(macros.size());
        if (id > (1 << 17)) throw DomainTooLarge("ranking construction beyond 2^17 states");
        ids.emplace(m, id);
        macros.push_back(std::move(m));
        work.push_back(id);
        return id;
    };
    Macro init;
    init.states = {u.initial};
    init.rank = {max_rank};
    init.owing = {1};
    intern(std::move(init));

    std::vector<std::vector<PosBool>> delta;
    while (!work.empty()) {
        int id = work.front();
        work.pop_front();
        Macro m = macros[id];
        if (static_cast<int>(delta.size()) <= id)
            delta.resize(id + 1, std::vector<PosBool>(u.n_letters, PosBool::no()));
        for (int letter = 0; letter < u.n_letters; ++letter) {
            bool dead = false;
            // per direction: successors with their predecessor ranks
            std::vector<std::map<int, std::pair<int, bool>>> succ(u.n_dirs); // q' -> (min rank, pred owing)
            for (size_t i = 0; i < m.states.size() && !dead; ++i) {
                auto moves = conj_moves(u.delta[m.states[i]][letter]);
                if (!moves) {
                    dead = true;
                    break;
                }
                for (auto [d, q2] : *moves) {
                    auto [it, fresh] = succ[d].try_emplace(q2, std::make_pair(m.rank[i], m.owing[i] != 0));
                    if (!fresh) {
                        it->second.first = std::min(it->second.first, m.rank[i]);
                        it->second.second = it->second.second || m.owing[i] != 0;
                    }
                }
            }
            if (dead) {
                delta[id][letter] = PosBool::no();
                continue;
            }
            bool owing_any = std::any_of(m.owing.begin(), m.owing.end(), [](char c) { return c != 0; });
            std::vector<PosBool> per_dir;
            for (int d = 0; d < u.n_dirs; ++d) {
                // every way of assigning ranks in this direction
                std::vector<std::vector<int>> options;
                std::vector<int> qs;
                std::vector<char> from_owing;
                for (auto& [q2, info] : succ[d]) {
                    qs.push_back(q2);
                    from_owing.push_back(info.second ? 1 : 0);
                    int top = info.first;
                    std::vector<int> opts;
                    if (bad.count(q2)) {
                        opts.push_back(top % 2 == 0 ? top : top - 1);
                    } else {
                        opts.push_back(top);
                        if (top > 0) opts.push_back(top - 1);
                    }
                    options.push_back(std::move(opts));
                }
                std::vector<PosBool> choices;
                std::vector<size_t> pick(options.size(), 0);
                for (;;) {
                    Macro next;
                    next.states = qs;
                    for (size_t i = 0; i < qs.size(); ++i) next.rank.push_back(options[i][pick[i]]);
                    for (size_t i = 0; i < qs.size(); ++i) {
                        bool even = next.rank[i] % 2 == 0;
                        next.owing.push_back(even && (!owing_any || from_owing[i]) ? 1 : 0);
                    }
                    choices.push_back(PosBool::move(d, intern(std::move(next))));
                    size_t i = 0;
                    while (i < options.size() && ++pick[i] == options[i].size()) pick[i++] = 0;
                    if (i == options.size()) break;
                }
                per_dir.push_back(PosBool::any(std::move(choices)));
            }
            delta[id][letter] = PosBool::all(std::move(per_dir));
        }
    }

    TreeAutomaton t;
    t.n_letters = u.n_letters;
    t.sigma_letters = u.sigma_letters;
    t.n_dirs = u.n_dirs;
    t.n_states = static_cast<int>(macros.size());
    t.initial = 0;
    delta.resize(macros.size(), std::vector<PosBool>(u.n_letters, PosBool::no()));
    t.delta = std::move(delta);
    std::set<int> accept, everything;
    for (int q = 0; q < t.n_states; ++q) {
        everything.insert(q);
        bool owes = false;
        for (char c : macros[q].owing) owes = owes || c != 0;
        if (!owes) accept.insert(q);
    }
    t.chain = {{}, accept, everything};
    t.validate();
    return t;
}

TreeAutomaton project_direction(const TreeAutomaton& n, int d0) {
    n.validate();
    if (n.sigma_letters <= 0)
        throw AlphabetNotProduct("direction projection needs a factored alphabet");
    if (d0 < 0 || d0 >= n.n_dirs) throw ValidationError("root direction out of range");
    TreeAutomaton t;
    t.n_letters = n.sigma_letters;
    t.sigma_letters = 0;
    t.n_dirs = n.n_dirs;
    t.n_states = n.n_states * n.n_dirs;
    t.initial = n.initial * n.n_dirs + d0;
    t.delta.assign(t.n_states, std::vector<PosBool>(t.n_letters, PosBool::yes()));
    for (int q = 0; q < n.n_states; ++q)
        for (int d = 0; d < n.n_dirs; ++d)
            for (int sigma = 0; sigma < n.sigma_letters; ++sigma)
                t.delta[q * n.n_dirs + d][sigma] =
                    map_moves(n.delta[q][sigma * n.n_dirs + d], [&](int d2, int q2) {
                        return PosBool::move(d2, q2 * n.n_dirs + d2);
                    });
    for (const std::set<int>& level : n.chain) {
        std::set<int> lifted;
        for (int q : level)
            for (int d = 0; d < n.n_dirs; ++d) lifted.insert(q * n.n_dirs + d);
        t.chain.push_back(std::move(lifted));
    }
    t.validate();
    return t;
}

// nondeterministic means runs assign at most one state to every tree node:
// each disjunct of a transition carries at most one move per direction
bool is_nondet_tree(const TreeAutomaton& a) {
    for (const auto& row : a.delta)
        for (const PosBool& b : row)
            for (const auto& clause : dnf(b)) {
                std::set<int> dirs;
                for (auto [d, q] : clause)
                    if (!dirs.insert(d).second) return false;
            }
    return true;
}

namespace {

struct AptContext {
    const Cgs* g = nullptr;
    std::vector<std::string> vars;
    std::vector<Valuation> vals;
    int n_dirs = 0;
    int dsize = 0;

    int letter(long vrank, int s) const { return static_cast<int>(vrank) * n_dirs + s; }
};

TreeAutomaton apt_atom(const AptContext& cx, const std::function<bool(int)>& holds) {
    TreeAutomaton t;
    t.sigma_letters = static_cast<int>(cx.vals.size());
    t.n_dirs = cx.n_dirs;
    t.n_letters = t.sigma_letters * t.n_dirs;
    t.n_states = 1;
    t.initial = 0;
    t.delta.assign(1, std::vector<PosBool>(t.n_letters, PosBool::no()));
    for (int vi = 0; vi < t.sigma_letters; ++vi)
        for (int s = 0; s < t.n_dirs; ++s)
            t.delta[0][cx.letter(vi, s)] = holds(s) ? PosBool::yes() : PosBool::no();
    t.chain = {{0}};
    return t;
}

PosBool shift_moves(const PosBool& b, int off) {
    return map_moves(b, [off](int d, int q) { return PosBool::move(d, q + off); });
}

// chain contribution of a component inside a merged automaton: its own level
// when it still has one, otherwise all of its states
void add_contribution(std::set<int>& level, const TreeAutomaton& a, size_t i, int off) {
    const std::set<int>& src = i < a.chain.size() ? a.chain[i] : a.chain.back();
    for (int q : src) level.insert(q + off);
}

TreeAutomaton apt_dual(TreeAutomaton a) {
    for (auto& row : a.delta)
        for (PosBool& b : row) b = dual_posbool(b);
    if (a.chain.front().empty()) a.chain.erase(a.chain.begin());
    else a.chain.insert(a.chain.begin(), std::set<int>{});
    return a;
}

TreeAutomaton apt_rec(const AptContext& cx, const FormulaPtr& f,
                      std::map<std::string, std::string> env);

TreeAutomaton apt_binary(const AptContext& cx, bool conj, const TreeAutomaton& a,
                         const TreeAutomaton& b) {
    TreeAutomaton t;
    t.sigma_letters = a.sigma_letters;
    t.n_dirs = a.n_dirs;
    t.n_letters = a.n_letters;
    t.n_states = 1 + a.n_states + b.n_states;
    t.initial = 0;
    const int off_a = 1, off_b = 1 + a.n_states;
    t.delta.assign(t.n_states, std::vector<PosBool>(t.n_letters, PosBool::yes()));
    for (int l = 0; l < t.n_letters; ++l) {
        std::vector<PosBool> kids{shift_moves(a.delta[a.initial][l], off_a),
                                  shift_moves(b.delta[b.initial][l], off_b)};
        t.delta[0][l] = conj ? PosBool::all(std::move(kids)) : PosBool::any(std::move(kids));
    }
    for (int q = 0; q < a.n_states; ++q)
        for (int l = 0; l < t.n_letters; ++l) t.delta[off_a + q][l] = shift_moves(a.delta[q][l], off_a);
    for (int q = 0; q < b.n_states; ++q)
        for (int l = 0; l < t.n_letters; ++l) t.delta[off_b + q][l] = shift_moves(b.delta[q][l], off_b);
    size_t k = std::max(a.chain.size(), b.chain.size());
    for (size_t i = 0; i < k; ++i) {
        std::set<int> level;
        add_contribution(level, a, i, off_a);
        add_contribution(level, b, i, off_b);
        if (i + 1 == k) level.insert(0);
        t.chain.push_back(std::move(level));
    }
    return t;
}

// the self-looping constructions for X, U and R need the joint step of the
// model at the current node
std::vector<StateId> step_table(const AptContext& cx,
                                const std::map<std::string, std::string>& env) {
    std::vector<StateId> dir(static_cast<size_t>(cx.vals.size()) * cx.n_dirs, 0);
    for (size_t vi = 0; vi < cx.vals.size(); ++vi) {
        std::vector<int> acts = joint_action(*cx.g, env, cx.vals[vi]);
        for (int s = 0; s < cx.n_dirs; ++s) dir[vi * cx.n_dirs + s] = cx.g->step(s, acts);
    }
    return dir;
}

TreeAutomaton apt_temporal(const AptContext& cx, const FormulaPtr& f,
                           const std::map<std::string, std::string>& env) {
    std::vector<StateId> dir = step_table(cx, env);
    if (f->op == Op::Next) {
        TreeAutomaton a = apt_rec(cx, f->lhs, env);
        TreeAutomaton t;
        t.sigma_letters = a.sigma_letters;
        t.n_dirs = a.n_dirs;
        t.n_letters = a.n_letters;
        t.n_states = 1 + a.n_states;
        t.initial = 0;
        t.delta.assign(t.n_states, std::vector<PosBool>(t.n_letters, PosBool::yes()));
        for (int vi = 0; vi < t.sigma_letters; ++vi)
            for (int s = 0; s < t.n_dirs; ++s)
                t.delta[0][cx.letter(vi, s)] = PosBool::move(dir[vi * cx.n_dirs + s], a.initial + 1);
        for (int q = 0; q < a.n_states; ++q)
            for (int l = 0; l < t.n_letters; ++l) t.delta[1 + q][l] = shift_moves(a.delta[q][l], 1);
        t.chain = a.chain;
        for (std::set<int>& level : t.chain) {
            std::set<int> shifted;
            for (int q : level) shifted.insert(q + 1);
            level = std::move(shifted);
        }
        t.chain.back().insert(0);
        return t;
    }
    const bool until = f->op == Op::Until;
    TreeAutomaton a = apt_rec(cx, f->lhs, env);
    TreeAutomaton b = apt_rec(cx, f->rhs, env);
    TreeAutomaton t;
    t.sigma_letters = a.sigma_letters;
    t.n_dirs = a.n_dirs;
    t.n_letters = a.n_letters;
    t.n_states = 1 + a.n_states + b.n_states;
    t.initial = 0;
    const int off_a = 1, off_b = 1 + a.n_states;
    t.delta.assign(t.n_states, std::vector<PosBool>(t.n_letters, PosBool::yes()));
    for (int vi = 0; vi < t.sigma_letters; ++vi)
        for (int s = 0; s < t.n_dirs; ++s) {
            const int l = cx.letter(vi, s);
            PosBool da = shift_moves(a.delta[a.initial][l], off_a);
            PosBool db = shift_moves(b.delta[b.initial][l], off_b);
            PosBool again = PosBool::move(dir[vi * cx.n_dirs + s], 0);
            std::vector<PosBool> cont{std::move(da), std::move(again)};
            if (until)
                t.delta[0][l] = PosBool::any({std::move(db), PosBool::all(std::move(cont))});
            else {
                std::vector<PosBool> alt{cont[0], cont[1]};
                t.delta[0][l] = PosBool::all({std::move(db), PosBool::any(std::move(alt))});
            }
        }
    for (int q = 0; q < a.n_states; ++q)
        for (int l = 0; l < t.n_letters; ++l) t.delta[off_a + q][l] = shift_moves(a.delta[q][l], off_a);
    for (int q = 0; q < b.n_states; ++q)
        for (int l = 0; l < t.n_letters; ++l) t.delta[off_b + q][l] = shift_moves(b.delta[q][l], off_b);
    size_t k = std::max({a.chain.size(), b.chain.size(), until ? size_t{1} : size_t{2}});
    for (size_t i = 0; i < k; ++i) {
        std::set<int> level;
        add_contribution(level, a, i, off_a);
        add_contribution(level, b, i, off_b);
        // the unfolding state rejects infinite postponement of an until and
        // tolerates a release held forever
        if (until || i >= 1) level.insert(0);
        t.chain.push_back(std::move(level));
    }
    return t;
}

TreeAutomaton apt_project_var(const AptContext& cx, TreeAutomaton a, const std::string& x) {
    if (!std::count(cx.vars.begin(), cx.vars.end(), x))
        throw UndeclaredName("variable '" + x + "' is outside the alphabet");
    TreeAutomaton t = a;
    for (int q = 0; q < a.n_states; ++q)
        for (size_t vi = 0; vi < cx.vals.size(); ++vi)
            for (int s = 0; s < cx.n_dirs; ++s) {
                std::vector<PosBool> alts;
                for (int act = 0; act < cx.dsize; ++act) {
                    Valuation moved = cx.vals[vi];
                    moved[x] = act;
                    alts.push_back(a.delta[q][cx.letter(valuation_rank(moved, cx.dsize), s)]);
                }
                t.delta[q][cx.letter(static_cast<long>(vi), s)] = PosBool::any(std::move(alts));
            }
    return t;
}

TreeAutomaton apt_rec(const AptContext& cx, const FormulaPtr& f,
                      std::map<std::string, std::string> env) {
    switch (f->op) {
        case Op::True: return apt_atom(cx, [](int) { return true; });
        case Op::False: return apt_atom(cx, [](int) { return false; });
        case Op::Atom: {
            if (!cx.g->atoms.count(f->name))
                throw UndeclaredName("atom '" + f->name + "' is not in the model");
            return apt_atom(cx, [&](int s) { return cx.g->label[s].count(f->name) > 0; });
        }
        case Op::Not: return apt_dual(apt_rec(cx, f->lhs, env));
        case Op::And: return apt_binary(cx, true, apt_rec(cx, f->lhs, env), apt_rec(cx, f->rhs, env));
        case Op::Or: return apt_binary(cx, false, apt_rec(cx, f->lhs, env), apt_rec(cx, f->rhs, env));
        case Op::Next:
        case Op::Until:
        case Op::Release: return apt_temporal(cx, f, env);
        case Op::Bind: {
            if (!std::count(cx.g->agents.begin(), cx.g->agents.end(), f->agent))
                throw UndeclaredName("agent '" + f->agent + "' is not in the model");
            env[f->agent] = f->name;
            return apt_rec(cx, f->lhs, env);
        }
        case Op::Exists: {
            TreeAutomaton sub = apt_rec(cx, f->lhs, env);
            if (is_nondet_tree(sub)) return apt_project_var(cx, std::move(sub), f->name);
            bool conj = true;
            for (const auto& row : sub.delta)
                for (const PosBool& b : row) conj = conj && is_conjunctive(b);
            if (conj && sub.chain.size() <= 2)
                return apt_project_var(cx, nondeterminize_cobuchi(sub), f->name);
            throw Unsupported("existential projection over an alternating automaton for " +
                              to_string(f));
        }
        case Op::Forall:
            return apt_rec(cx, f_not(f_exists(f->name, f_not(f->lhs))), env);
        default:
            throw Unsupported("proposition quantifiers have no tree automaton translation");
    }
}

AptContext make_context(const Cgs& g, const std::vector<std::string>& vars) {
    AptContext cx;
    cx.g = &g;
    cx.vars = vars;
    cx.dsize = static_cast<int>(g.actions.size());
    cx.n_dirs = static_cast<int>(g.states.size());
    cx.vals = all_valuations(var_set(vars), cx.dsize);
    if (cx.vals.size() * g.states.size() > (1u << 16))
        throw DomainTooLarge("valuation alphabet beyond 2^16 letters");
    return cx;
}

void collect_quantified(const FormulaPtr& f, std::vector<std::string>& out) {
    if (!f) return;
    if (f->op == Op::Exists || f->op == Op::Forall) out.push_back(f->name);
    collect_quantified(f->lhs, out);
    collect_quantified(f->rhs, out);
}

bool pure_path_formula(const FormulaPtr& f) {
    switch (f->op) {
        case Op::True:
        case Op::False:
        case Op::Atom: return true;
        case Op::Not:
        case Op::Next: return pure_path_formula(f->lhs);
        case Op::And:
        case Op::Or:
        case Op::Until:
        case Op::Release: return pure_path_formula(f->lhs) && pure_path_formula(f->rhs);
        default: return false;
    }
}

} // namespace

TreeAutomaton formula_apt(const Cgs& g, const FormulaPtr& f, const std::vector<std::string>& vars) {
    g.validate();
    AptContext cx = make_context(g, vars);
    TreeAutomaton t = apt_rec(cx, f, {});
    t.validate();
    return t;
}

TreeAutomaton sentence_npt(const Cgs& g, StateId s, const FormulaPtr& sentence) {
    g.validate();
    if (s < 0 || s >= static_cast<int>(g.states.size()))
        throw ValidationError("state out of range");
    std::set<std::string> agents(g.agents.begin(), g.agents.end());
    if (!is_sentence(sentence, agents)) throw NotASentence("the automata route needs a sentence");

    // one-goal shape: prefix, complete binding block, pure path matrix
    bool one_goal = false;
    SplitFormula split;
    try {
        split = split_prenex(sentence);
        one_goal = pure_path_formula(split.matrix) &&
                   binding_fn(split.bindings).size() == g.agents.size() &&
                   !split.prefix.empty();
        if (one_goal) {
            std::set<std::string> used;
            for (const BindingPair& bp : split.bindings) used.insert(bp.var);
            std::set<std::string> quantified;
            for (const Quant& q : split.prefix) quantified.insert(q.var);
            one_goal = used == quantified;
        }
    } catch (const NotPrenex&) {
        one_goal = false;
    } catch (const ValidationError&) {
        one_goal = false;
    }
    if (one_goal) {
        std::vector<std::string> atoms(g.atoms.begin(), g.atoms.end());
        for (const std::string& p : atoms_of(split.matrix))
            if (!g.atoms.count(p))
                throw UndeclaredName("atom '" + p + "' is not in the model");
        WordAutomaton ucw = dualize_word(ltl_to_nbw(to_pnf(f_not(split.matrix)), atoms));
        std::vector<std::string> vars;
        for (const Quant& q : split.prefix) vars.push_back(q.var);
        std::sort(vars.begin(), vars.end());
        TreeAutomaton goal = goal_uct(g, split.bindings, ucw, vars);
        TreeAutomaton lifted = sentence_uct(g, goal, split.prefix, vars);
        return project_direction(nondeterminize_cobuchi(lifted), s);
    }

    std::vector<std::string> vars;
    collect_quantified(sentence, vars);
    std::sort(vars.begin(), vars.end());
    if (std::adjacent_find(vars.begin(), vars.end()) != vars.end())
        throw Unsupported("the structural route needs distinct quantified variables");
    FormulaPtr enf = to_enf(sentence);
    AptContext cx = make_context(g, vars);
    TreeAutomaton t = apt_rec(cx, enf, {});
    if (!is_nondet_tree(t)) {
        bool conj = true;
        for (const auto& row : t.delta)
            for (const PosBool& b : row) conj = conj && is_conjunctive(b);
        if (conj && t.chain.size() <= 2) t = nondeterminize_cobuchi(t);
        else throw Unsupported("no nondeterministic automaton for " + to_string(sentence));
    }
    return project_direction(t, s);
}

std::string dump_aut(const WordAutomaton& a) {
    std::ostringstream os;
    os << (a.universal ? "universal" : "nondeterministic") << ' '
       << (a.cobuchi ? "co-buchi" : "buchi") << " word automaton\n";
    os << "states " << a.n_states << " letters " << a.n_letters << "\ninitial";
    for (int q : a.initial) os << ' ' << q;
    os << "\nfin";
    for (int q : a.fin) os << ' ' << q;
    os << '\n';
    for (const auto& [key, succs] : a.delta) {
        os << key.first << " --" << key.second << "->";
        for (int t : succs) os << ' ' << t;
        os << '\n';
    }
    return os.str();
}

std::string dump_aut(const TreeAutomaton& a) {
    std::ostringstream os;
    os << "tree automaton: states " << a.n_states << " letters " << a.n_letters << " dirs "
       << a.n_dirs << " initial " << a.initial << '\n';
    for (int q = 0; q < a.n_states; ++q)
        for (int l = 0; l < a.n_letters; ++l)
            os << q << " --" << l << "-> " << to_string(a.delta[q][l]) << '\n';
    for (size_t i = 0; i < a.chain.size(); ++i) {
        os << "chain " << i + 1 << ":";
        for (int q : a.chain[i]) os << ' ' << q;
        os << '\n';
    }
    return os.str();
}

} // namespace slmc
