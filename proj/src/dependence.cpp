#include "slmc/dependence.hpp"

#include <algorithm>

namespace slmc {

Valuation restrict_to(const Valuation& v, const std::set<std::string>& vars) {
    Valuation out;
    for (const std::string& x : vars) {
        auto it = v.find(x);
        if (it == v.end()) throw UndeclaredName("no value for variable '" + x + "'");
        out[x] = it->second;
    }
    return out;
}

std::vector<Valuation> all_valuations(const std::set<std::string>& vars, int dsize) {
    if (dsize < 1) throw ValidationError("domain must have at least one element");
    std::vector<std::string> names(vars.begin(), vars.end());
    std::vector<Valuation> out;
    Valuation cur;
    for (const std::string& x : names) cur[x] = 0;
    for (;;) {
        out.push_back(cur);
        // odometer with the last name fastest
        int i = static_cast<int>(names.size()) - 1;
        while (i >= 0) {
            if (++cur[names[i]] < dsize) break;
            cur[names[i]] = 0;
            --i;
        }
        if (i < 0) break;
    }
    return out;
}

long valuation_rank(const Valuation& v, int dsize) {
    long rank = 0;
    for (const auto& [name, val] : v) {
        if (val < 0 || val >= dsize)
            throw ValidationError("valuation entry for '" + name + "' out of domain");
        rank = rank * dsize + val;
    }
    return rank;
}

Valuation DependenceMap::apply(const Valuation& universals) const {
    Valuation out;
    size_t seen = 0;
    for (const Quant& q : prefix) {
        if (q.existential) continue;
        auto it = universals.find(q.var);
        if (it == universals.end())
            throw ValidationError("dependence map applied without universal '" + q.var + "'");
        out[q.var] = it->second;
        ++seen;
    }
    if (seen != universals.size())
        throw ValidationError("dependence map applied to a non-universal valuation");
    for (const SkolemTable& t : tables) {
        auto it = t.choice.find(restrict_to(out, t.dep));
        if (it == t.choice.end())
            throw ValidationError("skolem table for '" + t.var + "' misses an entry");
        out[t.var] = it->second;
    }
    return out;
}

void DependenceMap::validate() const {
    if (dsize < 1) throw ValidationError("domain must have at least one element");
    std::set<std::string> seen;
    for (const Quant& q : prefix)
        if (!seen.insert(q.var).second)
            throw ValidationError("variable '" + q.var + "' quantified twice");
    size_t ti = 0;
    for (const Quant& q : prefix) {
        if (!q.existential) continue;
        if (ti >= tables.size()) throw ValidationError("missing skolem table for '" + q.var + "'");
        const SkolemTable& t = tables[ti++];
        if (t.var != q.var)
            throw ValidationError("skolem tables out of prefix order at '" + t.var + "'");
        if (t.dep != prefix_dep(prefix, q.var))
            throw ValidationError("skolem table for '" + q.var + "' keyed on the wrong variables");
        auto keys = all_valuations(t.dep, dsize);
        if (t.choice.size() != keys.size())
            throw ValidationError("skolem table for '" + q.var + "' is not total");
        for (const Valuation& k : keys) {
            auto it = t.choice.find(k);
            if (it == t.choice.end())
                throw ValidationError("skolem table for '" + q.var + "' misses an entry");
            if (it->second < 0 || it->second >= dsize)
                throw ValidationError("skolem choice for '" + q.var + "' out of domain");
        }
    }
    if (ti != tables.size()) throw ValidationError("stray skolem table");
}

BigInt count_dependence_maps(const QuantPrefix& p, int dsize) {
    if (dsize < 1) throw ValidationError("domain must have at least one element");
    BigInt total = 1;
    for (const Quant& q : p) {
        if (!q.existential) continue;
        BigInt entries = boost::multiprecision::pow(
            BigInt(dsize), static_cast<unsigned>(prefix_dep(p, q.var).size()));
        if (entries > (BigInt(1) << 26))
            throw DomainTooLarge("skolem table for '" + q.var + "' would not fit in memory");
        total *= boost::multiprecision::pow(BigInt(dsize),
                                            entries.convert_to<unsigned>());
    }
    return total;
}

DepMapEnum::DepMapEnum(const QuantPrefix& p, int dsize) {
    base_.prefix = p;
    base_.dsize = dsize;
    size_t n_digits = 0;
    for (const Quant& q : p) {
        if (!q.existential) continue;
        SkolemTable t;
        t.var = q.var;
        t.dep = prefix_dep(p, q.var);
        for (const Valuation& k : all_valuations(t.dep, dsize)) t.choice[k] = 0;
        n_digits += t.choice.size();
        base_.tables.push_back(std::move(t));
    }
    digits_.assign(n_digits, 0);
}

std::optional<DependenceMap> DepMapEnum::next() {
    if (done_) return std::nullopt;
    // materialize the current digit string into the table skeleton
    DependenceMap out = base_;
    size_t d = 0;
    for (SkolemTable& t : out.tables)
        for (auto& [key, choice] : t.choice) choice = digits_[d++];
    // advance, least significant digit last
    int i = static_cast<int>(digits_.size()) - 1;
    while (i >= 0) {
        if (++digits_[i] < base_.dsize) break;
        digits_[i] = 0;
        --i;
    }
    if (i < 0) done_ = true;
    return out;
}

std::vector<DependenceMap> enumerate_dependence_maps(const QuantPrefix& p, int dsize,
                                                     const BigInt& bound) {
    if (count_dependence_maps(p, dsize) > bound)
        throw DomainTooLarge("dependence map space exceeds the enumeration bound");
    std::vector<DependenceMap> out;
    DepMapEnum en(p, dsize);
    while (auto m = en.next()) out.push_back(std::move(*m));
    return out;
}

int FunctionDomain::size() const {
    int s = 1;
    for (int t = 0; t < tsize; ++t) s *= dsize;
    return s;
}

int FunctionDomain::eval(int fidx, int t) const {
    if (t < 0 || t >= tsize) throw ValidationError("function domain index out of range");
    // t = 0 is the most significant digit
    for (int i = tsize - 1; i > t; --i) fidx /= dsize;
    return fidx % dsize;
}

int FunctionDomain::make(const std::vector<int>& values) const {
    if (static_cast<int>(values.size()) != tsize)
        throw ValidationError("function domain value list has the wrong length");
    int fidx = 0;
    for (int v : values) {
        if (v < 0 || v >= dsize) throw ValidationError("function value out of domain");
        fidx = fidx * dsize + v;
    }
    return fidx;
}

namespace {

const SkolemTable& table_for(const DependenceMap& m, const std::string& var) {
    for (const SkolemTable& t : m.tables)
        if (t.var == var) return t;
    throw UndeclaredName("no skolem table for '" + var + "'");
}

// the function constantly e, as an element of the function domain
int constant_fn(const FunctionDomain& fd, int e) {
    return fd.make(std::vector<int>(fd.tsize, e));
}

} // namespace

std::variant<AdjointMap, NotElementaryWitness> adjoint(const DependenceMap& theta,
                                                       const FunctionDomain& fd) {
    if (theta.dsize != fd.size())
        throw ValidationError("map domain is not the given function space");
    AdjointMap out;
    out.fd = fd;
    out.prefix = theta.prefix;
    out.per_index.assign(fd.tsize, DependenceMap{theta.prefix, fd.dsize, {}});

    for (const SkolemTable& tab : theta.tables) {
        for (int t = 0; t < fd.tsize; ++t) {
            SkolemTable slice;
            slice.var = tab.var;
            slice.dep = tab.dep;
            // group the table rows by their values at index t; each group must
            // choose consistently at t or the map is not elementary
            std::map<Valuation, std::pair<int, Valuation>> groups;
            for (const auto& [key, choice] : tab.choice) {
                Valuation at_t;
                for (const auto& [u, fidx] : key) at_t[u] = fd.eval(fidx, t);
                int out_t = fd.eval(choice, t);
                auto [it, fresh] = groups.emplace(at_t, std::make_pair(out_t, key));
                if (!fresh && it->second.first != out_t) {
                    NotElementaryWitness w;
                    // pad both rows to full universal valuations with a fixed
                    // filler so they agree everywhere at index t
                    w.g1 = it->second.second;
                    w.g2 = key;
                    for (const Quant& q : theta.prefix) {
                        if (q.existential) continue;
                        w.g1.emplace(q.var, 0);
                        w.g2.emplace(q.var, 0);
                    }
                    w.t = t;
                    w.var = tab.var;
                    return w;
                }
            }
            for (const auto& [at_t, row] : groups) slice.choice[at_t] = row.first;
            out.per_index[t].tables.push_back(std::move(slice));
        }
    }
    return out;
}

DependenceMap from_adjoint(const AdjointMap& a) {
    DependenceMap out;
    out.prefix = a.prefix;
    out.dsize = a.fd.size();
    if (static_cast<int>(a.per_index.size()) != a.fd.tsize)
        throw ValidationError("adjoint map must carry one slice per index");
    for (const Quant& q : a.prefix) {
        if (!q.existential) continue;
        SkolemTable t;
        t.var = q.var;
        t.dep = prefix_dep(a.prefix, q.var);
        for (const Valuation& key : all_valuations(t.dep, out.dsize)) {
            std::vector<int> vals(a.fd.tsize);
            for (int ti = 0; ti < a.fd.tsize; ++ti) {
                Valuation at_t;
                for (const auto& [u, fidx] : key) at_t[u] = a.fd.eval(fidx, ti);
                const SkolemTable& slice = table_for(a.per_index[ti], q.var);
                auto it = slice.choice.find(at_t);
                if (it == slice.choice.end())
                    throw ValidationError("adjoint slice for '" + q.var + "' is not total");
                vals[ti] = it->second;
            }
            t.choice[key] = a.fd.make(vals);
        }
        out.tables.push_back(std::move(t));
    }
    return out;
}

namespace {

// drop the tables of variables outside the head prefix
DependenceMap restrict_map(const DependenceMap& m, const QuantPrefix& head) {
    DependenceMap out;
    out.prefix = head;
    out.dsize = m.dsize;
    std::set<std::string> keep;
    for (const Quant& q : head) keep.insert(q.var);
    for (const SkolemTable& t : m.tables)
        if (keep.count(t.var)) out.tables.push_back(t);
    return out;
}

} // namespace

Valuation incidence(const QuantPrefix& p, int dsize, const DependenceMap& theta,
                    const DependenceMap& theta_bar) {
    if (p.empty()) return {};
    // peel off the maximal trailing block of one quantifier kind
    size_t cut = p.size() - 1;
    while (cut > 0 && p[cut - 1].existential == p.back().existential) --cut;
    QuantPrefix head(p.begin(), p.begin() + cut);
    Valuation nu = incidence(head, dsize, restrict_map(theta, head),
                             restrict_map(theta_bar, prefix_dual(head)));
    // the map quantifying the trailing block existentially extends nu; its
    // tables only read variables of the head, so the fixpoint equations of
    // the recursive result are preserved
    if (p.back().existential)
        return theta.apply(restrict_to(nu, prefix_universals(p)));
    return theta_bar.apply(restrict_to(nu, prefix_existentials(p)));
}

namespace {

DualizeResult dualize_rec(const QuantPrefix& p, size_t i, int dsize,
                          const std::set<Valuation>& target) {
    DualizeResult res;
    if (i == p.size()) {
        // only the empty valuation remains
        res.covered = target.count(Valuation{}) > 0;
        res.map.dsize = dsize;
        return res;
    }
    const Quant& q = p[i];
    std::vector<DualizeResult> sub;
    for (int e = 0; e < dsize; ++e) {
        std::set<Valuation> slice;
        for (const Valuation& v : target) {
            auto it = v.find(q.var);
            if (it == v.end()) throw ValidationError("target valuation misses '" + q.var + "'");
            if (it->second != e) continue;
            Valuation rest = v;
            rest.erase(q.var);
            slice.insert(std::move(rest));
        }
        sub.push_back(dualize_rec(p, i + 1, dsize, slice));
    }

    // fuse per-element sub-maps into one map whose tables additionally key on
    // q.var, used when the var ends up universal in the result
    auto merge = [&](bool covered) {
        DependenceMap m;
        m.dsize = dsize;
        const DependenceMap& skel = sub[0].map;
        for (size_t ti = 0; ti < skel.tables.size(); ++ti) {
            SkolemTable t;
            t.var = skel.tables[ti].var;
            t.dep = skel.tables[ti].dep;
            t.dep.insert(q.var);
            for (int e = 0; e < dsize; ++e)
                for (const auto& [key, choice] : sub[e].map.tables[ti].choice) {
                    Valuation k = key;
                    k[q.var] = e;
                    t.choice[std::move(k)] = choice;
                }
            m.tables.push_back(std::move(t));
        }
        res.covered = covered;
        res.map = std::move(m);
    };
    // prepend q.var as a leading existential choosing the constant e
    auto lead = [&](int e, bool covered) {
        DependenceMap m;
        m.dsize = dsize;
        SkolemTable t;
        t.var = q.var;
        t.choice[Valuation{}] = e;
        m.tables.push_back(std::move(t));
        for (const SkolemTable& rest : sub[e].map.tables) m.tables.push_back(rest);
        res.covered = covered;
        res.map = std::move(m);
    };

    if (q.existential) {
        // a map for the suffix fixes a constant here, so a counterexample
        // exists exactly when some element admits one
        for (int e = 0; e < dsize; ++e)
            if (!sub[e].covered) {
                lead(e, false);
                return res;
            }
        merge(true);
    } else {
        for (int e = 0; e < dsize; ++e)
            if (sub[e].covered) {
                lead(e, true);
                return res;
            }
        merge(false);
    }
    return res;
}

} // namespace

DualizeResult dualize_dependence(const QuantPrefix& p, int dsize,
                                 const std::set<Valuation>& target, const BigInt& bound) {
    if (dsize < 1) throw ValidationError("domain must have at least one element");
    if (boost::multiprecision::pow(BigInt(dsize), static_cast<unsigned>(p.size())) > bound)
        throw DomainTooLarge("valuation space exceeds the dualization bound");
    DualizeResult res = dualize_rec(p, 0, dsize, target);
    res.map.prefix = res.covered ? prefix_dual(p) : p;
    return res;
}

} // namespace slmc
