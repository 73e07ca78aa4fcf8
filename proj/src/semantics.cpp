#include "slmc/semantics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace slmc {

Truth truth_not(Truth a) {
    if (a == Truth::Unknown) return a;
    return a == Truth::True ? Truth::False : Truth::True;
}

Truth truth_and(Truth a, Truth b) {
    if (a == Truth::False || b == Truth::False) return Truth::False;
    if (a == Truth::Unknown || b == Truth::Unknown) return Truth::Unknown;
    return Truth::True;
}

Truth truth_or(Truth a, Truth b) {
    if (a == Truth::True || b == Truth::True) return Truth::True;
    if (a == Truth::Unknown || b == Truth::Unknown) return Truth::Unknown;
    return Truth::False;
}

std::string to_string(Truth t) {
    switch (t) {
    case Truth::False: return "false";
    case Truth::True: return "true";
    default: return "unknown";
    }
}

EvalMode EvalMode::exact_horizon(int h, bool use_skolem) {
    EvalMode m;
    m.kind = Kind::ExactHorizon;
    m.horizon = h;
    m.skolem = use_skolem;
    return m;
}

EvalMode EvalMode::bounded_memory(int mem) {
    EvalMode m;
    m.kind = Kind::BoundedMemory;
    m.memory = mem;
    return m;
}

std::optional<int> temporal_xdepth(const FormulaPtr& f) {
    if (!f) throw ValidationError("null formula");
    switch (f->op) {
    case Op::True:
    case Op::False:
    case Op::Atom: return 0;
    case Op::Until:
    case Op::Release: return std::nullopt;
    case Op::Next: {
        auto d = temporal_xdepth(f->lhs);
        if (!d) return std::nullopt;
        return *d + 1;
    }
    case Op::And:
    case Op::Or: {
        auto a = temporal_xdepth(f->lhs);
        auto b = temporal_xdepth(f->rhs);
        if (!a || !b) return std::nullopt;
        return std::max(*a, *b);
    }
    default: return temporal_xdepth(f->lhs);
    }
}

namespace {

// ------------------------------------------------------------------
// shared preconditions

void require_known_atoms(const Cgs& g, const FormulaPtr& f) {
    for (const std::string& a : atoms_of(f))
        if (g.atoms.count(a) == 0)
            throw UndeclaredName("atom " + a + " is not part of the structure");
}

void require_covered(const Cgs& g, const FormulaPtr& f, const Assignment& chi) {
    std::set<std::string> ag(g.agents.begin(), g.agents.end());
    for (const std::string& n : free_names(f, ag))
        if (!chi.has(n))
            throw FreeMismatch("no strategy assigned to the free name " + n);
}

// Mixed-radix odometer step; returns false once every digit has wrapped.
bool bump(std::vector<int>& digits, long radix) {
    for (size_t i = digits.size(); i-- > 0;) {
        if (++digits[i] < radix) return true;
        digits[i] = 0;
    }
    return false;
}

// ------------------------------------------------------------------
// exact-horizon evaluation
//
// All table strategies in play are anchored at the current state and cover
// the tracks of length up to the remaining budget. Crossing a next operator
// translates the whole assignment one step, which rebases every table and
// burns one unit of budget, so the invariant is maintained without ever
// looking back past the current anchor.

// Quantifier range at one point: every action table over the tracks from s of
// length 1..budget, indexed through a FunctionDomain so the dependence-map
// code and the search agree on which strategy an index denotes.
struct StrategyUniverse {
    std::vector<Track> tracks;
    FunctionDomain fd;
    std::vector<StrategyPtr> elems;
};

struct ExactCtx {
    const Cgs& g;
    bool skolem = false;
    std::map<std::pair<StateId, int>, std::shared_ptr<const StrategyUniverse>> universes;

    const StrategyUniverse& universe(StateId s, int budget) {
        auto key = std::make_pair(s, budget);
        auto it = universes.find(key);
        if (it != universes.end()) return *it->second;

        auto u = std::make_shared<StrategyUniverse>();
        u->tracks = tracks_from(g, s, 1, budget);
        const int nt = static_cast<int>(u->tracks.size());
        const int na = static_cast<int>(g.actions.size());
        if (nt > 0 && nt * std::log2(static_cast<double>(na)) > 15.0)
            throw DomainTooLarge("too many action tables to enumerate from state " +
                                 g.states[s]);
        u->fd = FunctionDomain{std::max(nt, 1), na};
        const int count = nt == 0 ? 1 : u->fd.size();
        u->elems.reserve(static_cast<size_t>(count));
        for (int i = 0; i < count; ++i) {
            TableStrategy t;
            t.anchor = s;
            t.horizon = budget;
            for (int j = 0; j < nt; ++j) t.act.emplace(u->tracks[j], u->fd.eval(i, j));
            u->elems.push_back(std::make_shared<Strategy>(Strategy{std::move(t)}));
        }
        it = universes.emplace(key, std::move(u)).first;
        return *it->second;
    }
};

Truth exact_rec(ExactCtx& ctx, const FormulaPtr& f, const Assignment& chi, StateId s,
                int budget);

// Decide a maximal quantifier block by recording, during the plain search,
// which strategy each existential picked as a function of the universal
// choices made before it. A successful search is then recast as a dependence
// map and replayed against every universal valuation; a failed one must admit
// the analogous map for the dual block with the body negated. Either replay
// disagreeing with the search would mean the search itself is unsound, so it
// is reported as an internal error rather than a verdict.
Truth skolem_block(ExactCtx& ctx, const FormulaPtr& f, const Assignment& chi, StateId s,
                   int budget) {
    QuantPrefix block;
    std::set<std::string> names;
    FormulaPtr body = f;
    while (body->op == Op::Exists || body->op == Op::Forall) {
        if (names.count(body->name) > 0) break; // rebound name: leave it to the body
        block.push_back(Quant{body->op == Op::Exists, body->name});
        names.insert(body->name);
        body = body->lhs;
    }

    const StrategyUniverse& uni = ctx.universe(s, budget);
    const int n = static_cast<int>(uni.elems.size());

    auto run = [&](const QuantPrefix& pfx, bool want) -> std::optional<DependenceMap> {
        std::map<std::string, std::map<Valuation, int>> picked;
        Valuation seen; // universal choices made so far, by variable
        std::function<bool(size_t, const Assignment&)> search =
            [&](size_t i, const Assignment& cc) -> bool {
            if (i == pfx.size())
                return (exact_rec(ctx, body, cc, s, budget) == Truth::True) == want;
            const Quant& q = pfx[i];
            if (q.existential) {
                for (int di = 0; di < n; ++di) {
                    if (search(i + 1, redefine(cc, q.var, uni.elems[di]))) {
                        picked[q.var][seen] = di;
                        return true;
                    }
                }
                return false;
            }
            for (int di = 0; di < n; ++di) {
                seen[q.var] = di;
                const bool ok = search(i + 1, redefine(cc, q.var, uni.elems[di]));
                seen.erase(q.var);
                if (!ok) return false;
            }
            return true;
        };
        if (!search(0, chi)) return std::nullopt;

        DependenceMap theta;
        theta.prefix = pfx;
        theta.dsize = n;
        for (const Quant& q : pfx) {
            if (!q.existential) continue;
            SkolemTable t;
            t.var = q.var;
            t.dep = prefix_dep(pfx, q.var);
            t.choice = picked.at(q.var);
            theta.tables.push_back(std::move(t));
        }
        theta.validate();
        return theta;
    };

    auto replay = [&](const DependenceMap& theta, bool want) {
        for (const Valuation& v : all_valuations(prefix_universals(theta.prefix), n)) {
            Valuation w = theta.apply(v);
            Assignment cc = chi;
            for (const auto& [var, di] : w) cc = redefine(cc, var, uni.elems[di]);
            if ((exact_rec(ctx, body, cc, s, budget) == Truth::True) != want)
                throw Error("dependence-map replay disagrees with the block search");
        }
    };

    if (auto theta = run(block, true)) {
        replay(*theta, true);
        return Truth::True;
    }
    auto bar = run(prefix_dual(block), false);
    if (!bar) throw Error("neither a quantifier block nor its dual has a witness map");
    replay(*bar, false);
    return Truth::False;
}

Truth exact_rec(ExactCtx& ctx, const FormulaPtr& f, const Assignment& chi, StateId s,
                int budget) {
    switch (f->op) {
    case Op::True: return Truth::True;
    case Op::False: return Truth::False;
    case Op::Atom: return ctx.g.label[static_cast<size_t>(s)].count(f->name) > 0
                              ? Truth::True
                              : Truth::False;
    case Op::Not: return truth_not(exact_rec(ctx, f->lhs, chi, s, budget));
    case Op::And: {
        const Truth a = exact_rec(ctx, f->lhs, chi, s, budget);
        if (a == Truth::False) return a;
        return truth_and(a, exact_rec(ctx, f->rhs, chi, s, budget));
    }
    case Op::Or: {
        const Truth a = exact_rec(ctx, f->lhs, chi, s, budget);
        if (a == Truth::True) return a;
        return truth_or(a, exact_rec(ctx, f->rhs, chi, s, budget));
    }
    case Op::Next: {
        if (budget <= 0) throw Error("internal: horizon budget exhausted under next");
        std::vector<int> d(ctx.g.agents.size());
        for (size_t i = 0; i < ctx.g.agents.size(); ++i)
            d[i] = strategy_action(ctx.g, *chi.at(ctx.g.agents[i]), Track{s});
        const StateId s2 = ctx.g.step(s, d);
        const Assignment chi2 = translate_assignment(ctx.g, chi, Track{s, s2});
        return exact_rec(ctx, f->lhs, chi2, s2, budget - 1);
    }
    case Op::Bind:
        return exact_rec(ctx, f->lhs, redefine(chi, f->agent, chi.at(f->name)), s, budget);
    case Op::Exists:
    case Op::Forall: {
        if (ctx.skolem) return skolem_block(ctx, f, chi, s, budget);
        const StrategyUniverse& uni = ctx.universe(s, budget);
        const bool ex = f->op == Op::Exists;
        Truth acc = ex ? Truth::False : Truth::True;
        for (const StrategyPtr& e : uni.elems) {
            const Truth v = exact_rec(ctx, f->lhs, redefine(chi, f->name, e), s, budget);
            acc = ex ? truth_or(acc, v) : truth_and(acc, v);
            if (acc == (ex ? Truth::True : Truth::False)) break;
        }
        return acc;
    }
    default:
        throw Unsupported("proposition quantifiers belong to the satisfiability layer");
    }
}

// ------------------------------------------------------------------
// bounded-memory evaluation
//
// Quantifiers range over transducers with a fixed memory size. A temporal
// operator is evaluated on the lasso the current (fully bound) assignment
// produces; positions are consistent because the lasso closes on state plus
// memory configuration, so a quantifier or binding met along the way can be
// evaluated from scratch at the translated point.

struct MemCtx {
    const Cgs& g;
    int memory = 1;
    std::vector<StrategyPtr> universe;
};

std::vector<StrategyPtr> transducer_universe(const Cgs& g, int m) {
    const int ns = static_cast<int>(g.states.size());
    const int na = static_cast<int>(g.actions.size());
    const int cells = m * ns;
    const double bits = cells * (std::log2(static_cast<double>(m)) +
                                 std::log2(static_cast<double>(na)));
    if (bits > 15.0)
        throw DomainTooLarge("too many transducers with " + std::to_string(m) +
                             " memory states to enumerate");

    std::vector<StrategyPtr> out;
    std::vector<int> upd(static_cast<size_t>(cells), 0);
    do {
        std::vector<int> act(static_cast<size_t>(cells), 0);
        do {
            TransducerStrategy t;
            t.mem = m;
            t.m0 = 0;
            t.upd.assign(static_cast<size_t>(m), std::vector<int>(static_cast<size_t>(ns)));
            t.out = t.upd;
            for (int mm = 0; mm < m; ++mm)
                for (int st = 0; st < ns; ++st) {
                    t.upd[static_cast<size_t>(mm)][static_cast<size_t>(st)] =
                        upd[static_cast<size_t>(mm * ns + st)];
                    t.out[static_cast<size_t>(mm)][static_cast<size_t>(st)] =
                        act[static_cast<size_t>(mm * ns + st)];
                }
            out.push_back(std::make_shared<Strategy>(Strategy{std::move(t)}));
        } while (bump(act, na));
    } while (bump(upd, m));
    return out;
}

Truth mem_rec(MemCtx& ctx, const FormulaPtr& f, const Assignment& chi, StateId s);

Truth lasso_eval(MemCtx& ctx, const FormulaPtr& f, const Assignment& chi, StateId s) {
    const Path pi = play_unbounded(ctx.g, chi, s);
    const long stem = static_cast<long>(pi.stem.size());
    const long len = stem + static_cast<long>(pi.loop.size());
    auto succ = [&](long i) { return i + 1 < len ? i + 1 : stem; };
    auto state_at = [&](long i) { return path_at(pi, i); };

    std::map<std::pair<const Formula*, long>, Truth> opaque;
    FormulaMap<std::vector<Truth>> fix;

    std::function<Truth(const FormulaPtr&, long)> ev = [&](const FormulaPtr& n,
                                                           long i) -> Truth {
        switch (n->op) {
        case Op::True: return Truth::True;
        case Op::False: return Truth::False;
        case Op::Atom:
            return ctx.g.label[static_cast<size_t>(state_at(i))].count(n->name) > 0
                       ? Truth::True
                       : Truth::False;
        case Op::Not: return truth_not(ev(n->lhs, i));
        case Op::And: return truth_and(ev(n->lhs, i), ev(n->rhs, i));
        case Op::Or: return truth_or(ev(n->lhs, i), ev(n->rhs, i));
        case Op::Next: return ev(n->lhs, succ(i));
        case Op::Until:
        case Op::Release: {
            auto it = fix.find(n);
            if (it == fix.end()) {
                const bool until = n->op == Op::Until;
                std::vector<Truth> cur(static_cast<size_t>(len),
                                       until ? Truth::False : Truth::True);
                for (bool changed = true; changed;) {
                    changed = false;
                    for (long k = 0; k < len; ++k) {
                        const Truth a = ev(n->lhs, k);
                        const Truth b = ev(n->rhs, k);
                        const Truth nxt = cur[static_cast<size_t>(succ(k))];
                        const Truth v = until ? truth_or(b, truth_and(a, nxt))
                                              : truth_and(b, truth_or(a, nxt));
                        if (v != cur[static_cast<size_t>(k)]) {
                            cur[static_cast<size_t>(k)] = v;
                            changed = true;
                        }
                    }
                }
                it = fix.emplace(n, std::move(cur)).first;
            }
            return it->second[static_cast<size_t>(i)];
        }
        default: {
            // strategy operator: close the play here and evaluate in full at
            // the translated point
            auto key = std::make_pair(n.get(), i);
            auto it = opaque.find(key);
            if (it != opaque.end()) return it->second;
            auto [chi2, s2] = global_translation(ctx.g, chi, s, static_cast<int>(i));
            const Truth v = mem_rec(ctx, n, chi2, s2);
            opaque.emplace(key, v);
            return v;
        }
        }
    };
    return ev(f, 0);
}

Truth mem_rec(MemCtx& ctx, const FormulaPtr& f, const Assignment& chi, StateId s) {
    switch (f->op) {
    case Op::True: return Truth::True;
    case Op::False: return Truth::False;
    case Op::Atom: return ctx.g.label[static_cast<size_t>(s)].count(f->name) > 0
                              ? Truth::True
                              : Truth::False;
    case Op::Not: return truth_not(mem_rec(ctx, f->lhs, chi, s));
    case Op::And: {
        const Truth a = mem_rec(ctx, f->lhs, chi, s);
        if (a == Truth::False) return a;
        return truth_and(a, mem_rec(ctx, f->rhs, chi, s));
    }
    case Op::Or: {
        const Truth a = mem_rec(ctx, f->lhs, chi, s);
        if (a == Truth::True) return a;
        return truth_or(a, mem_rec(ctx, f->rhs, chi, s));
    }
    case Op::Next:
    case Op::Until:
    case Op::Release: return lasso_eval(ctx, f, chi, s);
    case Op::Bind:
        return mem_rec(ctx, f->lhs, redefine(chi, f->agent, chi.at(f->name)), s);
    case Op::Exists:
    case Op::Forall: {
        if (ctx.universe.empty()) ctx.universe = transducer_universe(ctx.g, ctx.memory);
        const bool ex = f->op == Op::Exists;
        Truth acc = ex ? Truth::False : Truth::True;
        for (const StrategyPtr& e : ctx.universe) {
            const Truth v = mem_rec(ctx, f->lhs, redefine(chi, f->name, e), s);
            acc = ex ? truth_or(acc, v) : truth_and(acc, v);
            if (acc == (ex ? Truth::True : Truth::False)) break;
        }
        return acc;
    }
    default:
        throw Unsupported("proposition quantifiers belong to the satisfiability layer");
    }
}

// ------------------------------------------------------------------
// elementary evaluation
//
// A quantifier block holds when one family of per-track dependence maps
// resolves every existential from the actions its observable universals take
// at the same track, uniformly against all universal strategies. Nested
// subsentences are folded into fresh atoms first (their truth at a state is
// well defined and does not depend on the ambient assignment), so block
// bodies are quantifier-free by the time they are evaluated.

struct ElemCtx {
    Cgs g; // working copy, grows one atom per folded subsentence
    int horizon = 0;
};

Truth elem_rec(ElemCtx& ctx, const FormulaPtr& f, const Assignment& chi, StateId s);
Truth elem_entry(const Cgs& g, const FormulaPtr& f, const Assignment& chi, StateId s,
                 int horizon);

bool has_quantifier(const FormulaPtr& f) {
    if (!f) return false;
    if (f->op == Op::Exists || f->op == Op::Forall) return true;
    return has_quantifier(f->lhs) || has_quantifier(f->rhs);
}

FormulaPtr fold_subsentences(ElemCtx& ctx, const FormulaPtr& f, const FormulaPtr& root,
                             int& counter) {
    if (!f) return f;
    std::set<std::string> ag(ctx.g.agents.begin(), ctx.g.agents.end());
    if (f != root && (f->op == Op::Exists || f->op == Op::Forall) && is_sentence(f, ag)) {
        std::string name;
        do {
            name = "@e" + std::to_string(counter++);
        } while (ctx.g.atoms.count(name) > 0);
        std::vector<char> vals(ctx.g.states.size(), 0);
        for (size_t t = 0; t < ctx.g.states.size(); ++t) {
            const Truth v = elem_entry(ctx.g, f, Assignment{}, static_cast<StateId>(t),
                                       ctx.horizon);
            vals[t] = v == Truth::True ? 1 : 0;
        }
        ctx.g.atoms.insert(name);
        for (size_t t = 0; t < ctx.g.states.size(); ++t)
            if (vals[t]) ctx.g.label[t].insert(name);
        return f_atom(name);
    }
    const FormulaPtr l = fold_subsentences(ctx, f->lhs, root, counter);
    const FormulaPtr r = fold_subsentences(ctx, f->rhs, root, counter);
    if (l == f->lhs && r == f->rhs) return f;
    auto g2 = std::make_shared<Formula>(*f);
    g2->lhs = l;
    g2->rhs = r;
    return g2;
}

Truth elem_block(ElemCtx& ctx, const FormulaPtr& f, const Assignment& chi, StateId s) {
    QuantPrefix block;
    std::set<std::string> names;
    FormulaPtr body = f;
    while (body->op == Op::Exists || body->op == Op::Forall) {
        if (names.count(body->name) > 0)
            throw NotNgsl("a quantifier block rebinds " + body->name);
        block.push_back(Quant{body->op == Op::Exists, body->name});
        names.insert(body->name);
        body = body->lhs;
    }
    if (has_quantifier(body))
        throw NotNgsl("a quantifier under a goal is not a closed subsentence");

    ExactCtx bodyctx{ctx.g, false, {}};
    const int h = ctx.horizon;
    const std::vector<Track> tracks = tracks_from(ctx.g, s, 1, h);
    const int nt = static_cast<int>(tracks.size());
    const int na = static_cast<int>(ctx.g.actions.size());

    if (nt == 0) {
        // nothing is ever played: any one strategy per variable will do
        Assignment cc = chi;
        auto empty = std::make_shared<Strategy>(Strategy{TableStrategy{s, 0, {}}});
        for (const Quant& q : block) cc = redefine(cc, q.var, empty);
        return exact_rec(bodyctx, body, cc, s, h);
    }

    const FunctionDomain fd{nt, na};
    const std::vector<DependenceMap> maps =
        enumerate_dependence_maps(block, na, BigInt(1) << 14);
    const long m = static_cast<long>(maps.size());
    if (nt * std::log2(static_cast<double>(m)) > 24.0)
        throw DomainTooLarge("too many per-track map families to enumerate");

    std::vector<std::string> univ;
    for (const Quant& q : block)
        if (!q.existential) univ.push_back(q.var);
    if (static_cast<double>(univ.size()) * nt * std::log2(static_cast<double>(na)) > 24.0)
        throw DomainTooLarge("too many universal strategy profiles to enumerate");

    std::vector<int> family(static_cast<size_t>(nt), 0);
    do {
        bool covered = true;
        std::vector<int> uidx(univ.size(), 0);
        do {
            std::map<std::string, TableStrategy> tabs;
            for (const Quant& q : block) {
                TableStrategy t;
                t.anchor = s;
                t.horizon = h;
                tabs.emplace(q.var, std::move(t));
            }
            for (int j = 0; j < nt; ++j) {
                Valuation uval;
                for (size_t k = 0; k < univ.size(); ++k)
                    uval[univ[k]] = fd.eval(uidx[k], j);
                const Valuation w = maps[static_cast<size_t>(family[static_cast<size_t>(j)])]
                                        .apply(uval);
                for (const auto& [var, act] : w) tabs.at(var).act.emplace(tracks[j], act);
            }
            Assignment cc = chi;
            for (auto& [var, tab] : tabs)
                cc = redefine(cc, var, std::make_shared<Strategy>(Strategy{std::move(tab)}));
            if (exact_rec(bodyctx, body, cc, s, h) != Truth::True) {
                covered = false;
                break;
            }
        } while (bump(uidx, fd.size()));
        if (covered) return Truth::True;
    } while (bump(family, m));
    return Truth::False;
}

Truth elem_rec(ElemCtx& ctx, const FormulaPtr& f, const Assignment& chi, StateId s) {
    switch (f->op) {
    case Op::True: return Truth::True;
    case Op::False: return Truth::False;
    case Op::Atom: return ctx.g.label[static_cast<size_t>(s)].count(f->name) > 0
                              ? Truth::True
                              : Truth::False;
    case Op::Not: return truth_not(elem_rec(ctx, f->lhs, chi, s));
    case Op::And: {
        const Truth a = elem_rec(ctx, f->lhs, chi, s);
        if (a == Truth::False) return a;
        return truth_and(a, elem_rec(ctx, f->rhs, chi, s));
    }
    case Op::Or: {
        const Truth a = elem_rec(ctx, f->lhs, chi, s);
        if (a == Truth::True) return a;
        return truth_or(a, elem_rec(ctx, f->rhs, chi, s));
    }
    case Op::Exists:
    case Op::Forall: return elem_block(ctx, f, chi, s);
    default:
        throw NotNgsl("expected a boolean combination of atoms and quantifier blocks");
    }
}

Truth elem_entry(const Cgs& g, const FormulaPtr& f, const Assignment& chi, StateId s,
                 int horizon) {
    ElemCtx ctx{g, horizon};
    int counter = 0;
    const FormulaPtr folded = fold_subsentences(ctx, f, f, counter);
    return elem_rec(ctx, folded, chi, s);
}

} // namespace

Verdict eval_classic(const Cgs& g, const FormulaPtr& f, const Assignment& chi, StateId s,
                     const EvalMode& mode) {
    g.validate();
    if (s < 0 || static_cast<size_t>(s) >= g.states.size())
        throw ValidationError("state index out of range");
    require_known_atoms(g, f);
    require_covered(g, f, chi);

    if (mode.kind == EvalMode::Kind::BoundedMemory) {
        if (mode.memory < 1) throw ValidationError("the memory bound must be positive");
        MemCtx ctx{g, mode.memory, {}};
        const Truth v = mem_rec(ctx, f, chi, s);
        return Verdict{v, true,
                       "quantifiers restricted to transducers with " +
                           std::to_string(mode.memory) + " memory states"};
    }

    const auto xd = temporal_xdepth(f);
    if (!xd)
        throw ModeInsufficient("until or release present: no finite horizon is exact");
    if (*xd > mode.horizon)
        throw ModeInsufficient("next operators nest " + std::to_string(*xd) +
                               " deep, beyond the horizon " + std::to_string(mode.horizon));
    ExactCtx ctx{g, mode.skolem, {}};
    return Verdict{exact_rec(ctx, f, chi, s, mode.horizon), false, ""};
}

Verdict eval_elementary(const Cgs& g, const FormulaPtr& f, const Assignment& chi, StateId s,
                        const EvalMode& mode) {
    g.validate();
    if (s < 0 || static_cast<size_t>(s) >= g.states.size())
        throw ValidationError("state index out of range");
    require_known_atoms(g, f);
    require_covered(g, f, chi);

    std::set<std::string> ag(g.agents.begin(), g.agents.end());
    if (!classify(f, ag).ngsl)
        throw NotNgsl("elementary truth is defined on the nested-goal fragment");

    if (mode.kind == EvalMode::Kind::BoundedMemory)
        return Verdict{Truth::Unknown, true,
                       "elementary evaluation needs an exact horizon"};

    const auto xd = temporal_xdepth(f);
    if (!xd)
        throw ModeInsufficient("until or release present: no finite horizon is exact");
    if (*xd > mode.horizon)
        throw ModeInsufficient("next operators nest " + std::to_string(*xd) +
                               " deep, beyond the horizon " + std::to_string(mode.horizon));
    return Verdict{elem_entry(g, f, chi, s, mode.horizon), false, ""};
}

EquivalenceReport check_equivalence(const Cgs& g, const FormulaPtr& f, const Assignment& chi,
                                    StateId s, const EvalMode& mode) {
    EquivalenceReport r;
    r.classic = eval_classic(g, f, chi, s, mode);
    r.elementary = eval_elementary(g, f, chi, s, mode);
    r.agree = r.classic.value == r.elementary.value && r.classic.value != Truth::Unknown;
    return r;
}

} // namespace slmc
