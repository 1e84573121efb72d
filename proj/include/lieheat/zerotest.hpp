#ifndef LIEHEAT_ZEROTEST_HPP
#define LIEHEAT_ZEROTEST_HPP

#include "normalize.hpp"

#include <cstdlib>
#include <random>
#include <sstream>
#include <unordered_map>

namespace lieheat {

/// Raised internally when a sample point turns out inadmissible (a
/// denominator vanished, a radicand failed to be rational, ...). The zero
/// test catches it and draws a fresh point.
struct InadmissibleSample {
    std::string reason;
};

/// Element of the rationals extended by formal square roots q_v with
/// q_v^2 = v for rational v. A term is a rational coefficient times a
/// product of distinct formal roots, keyed by their sorted radicand values.
/// This is an exact evaluation domain: no floating point anywhere.
class AlgVal {
public:
    using Key = std::vector<Rat>;

    static AlgVal rational(Rat v) {
        AlgVal a;
        if (!v.is_zero()) a.t_[Key{}] = std::move(v);
        return a;
    }
    static AlgVal root(const Rat& radicand) {
        if (radicand.is_zero()) return AlgVal(); // sqrt(0) = 0
        Rat exact;
        if (radicand.sign() > 0) {
            Rat r = radicand;
            if (r.sqrt_exact(exact)) return rational(exact);
        }
        AlgVal a;
        a.t_[Key{radicand}] = Rat(1);
        return a;
    }

    bool is_zero() const { return t_.empty(); }
    bool is_rational() const { return t_.empty() || (t_.size() == 1 && t_.begin()->first.empty()); }
    Rat rational_value() const {
        if (t_.empty()) return Rat(0);
        if (!is_rational()) throw InadmissibleSample{"value is not rational"};
        return t_.begin()->second;
    }

    AlgVal operator-() const {
        AlgVal out;
        for (const auto& [k, c] : t_) out.t_[k] = -c;
        return out;
    }
    AlgVal operator+(const AlgVal& o) const {
        AlgVal out = *this;
        for (const auto& [k, c] : o.t_) out.add_term(k, c);
        return out;
    }
    AlgVal operator-(const AlgVal& o) const { return *this + (-o); }
    AlgVal operator*(const AlgVal& o) const {
        AlgVal out;
        for (const auto& [ka, ca] : t_) {
            for (const auto& [kb, cb] : o.t_) {
                Key k;
                Rat c = ca * cb;
                std::size_t i = 0, j = 0;
                while (i < ka.size() || j < kb.size()) {
                    if (j == kb.size()) k.push_back(ka[i++]);
                    else if (i == ka.size()) k.push_back(kb[j++]);
                    else if (ka[i] < kb[j]) k.push_back(ka[i++]);
                    else if (kb[j] < ka[i]) k.push_back(kb[j++]);
                    else { // same formal root: q_v * q_v = v
                        c *= ka[i];
                        ++i;
                        ++j;
                    }
                }
                out.add_term(std::move(k), std::move(c));
            }
        }
        return out;
    }

    AlgVal inverse() const {
        if (t_.empty()) throw InadmissibleSample{"division by zero at sample point"};
        // Strip formal roots one at a time by conjugation.
        for (const auto& [k, c] : t_) {
            if (k.empty()) continue;
            Rat r = k.front();
            AlgVal a, B;
            for (const auto& [k2, c2] : t_) {
                bool has = !k2.empty() && k2.front() == r;
                if (has) {
                    Key rest(k2.begin() + 1, k2.end());
                    B.add_term(std::move(rest), c2);
                } else {
                    a.add_term(k2, c2);
                }
            }
            AlgVal q;
            q.t_[Key{r}] = Rat(1);
            AlgVal conj = a - B * q;
            AlgVal norm = a * a - B * B * rational(r);
            return conj * norm.inverse();
        }
        // purely rational
        return rational(Rat(1) / t_.begin()->second);
    }

    AlgVal pow_int(long e) const {
        AlgVal base = *this;
        if (e < 0) {
            base = base.inverse();
            e = -e;
        }
        AlgVal acc = rational(Rat(1));
        while (e > 0) {
            if (e & 1) acc = acc * base;
            base = base * base;
            e >>= 1;
        }
        return acc;
    }

    /// Deterministic serialization, used to key formal atom-value caches.
    std::string str() const {
        std::ostringstream os;
        for (const auto& [k, c] : t_) {
            os << c.str() << "*[";
            for (const auto& v : k) os << v.str() << ",";
            os << "];";
        }
        if (t_.empty()) os << "0";
        return os.str();
    }

    /// Sign of the leading term in key order; mirrors the structural
    /// convention that exp of a "negative" argument is stored reciprocally.
    int leading_sign() const { return t_.empty() ? 0 : t_.begin()->second.sign(); }

private:
    struct KeyLess {
        bool operator()(const Key& a, const Key& b) const {
            if (a.size() != b.size()) return a.size() < b.size();
            for (std::size_t i = 0; i < a.size(); ++i) {
                if (a[i] < b[i]) return true;
                if (b[i] < a[i]) return false;
            }
            return false;
        }
    };
    void add_term(Key k, Rat c) {
        if (c.is_zero()) return;
        auto it = t_.find(k);
        if (it == t_.end()) t_.emplace(std::move(k), std::move(c));
        else {
            it->second += c;
            if (it->second.is_zero()) t_.erase(it);
        }
    }
    std::map<Key, Rat, KeyLess> t_;
};

// ----- seed plumbing ---------------------------------------------------------

inline std::uint64_t& seed_slot() {
    static std::uint64_t s = [] {
        if (const char* env = std::getenv("LIEHEAT_SEED")) return std::strtoull(env, nullptr, 10);
        return 0x11E4EA75EEDULL;
    }();
    return s;
}
inline std::uint64_t global_seed() { return seed_slot(); }
inline void set_global_seed(std::uint64_t s) { seed_slot() = s; }

// ----- evaluation at a random exact point ------------------------------------

/// Evaluates an expression tree at one random rational point, independently
/// of the structural normal form: atoms become consistent formal values,
/// derivative rewrite rules are honored by expanding them, square roots
/// become formal roots keyed by their radicand value.
class PointEvaluator {
public:
    PointEvaluator(const SymbolTable& tab, std::mt19937_64& rng) : tab_(tab), rng_(rng) {}

    /// Draws values for every symbol in the table.
    void sample_point() {
        env_.clear();
        atom_cache_.clear();
        memo_.clear();
        for (SymbolId s = 0; s < tab_.symbol_count(); ++s) {
            if (tab_.info(s).kind == SymbolKind::Sign)
                env_[s] = AlgVal::rational(Rat(coin() ? 1 : -1));
            else
                env_[s] = AlgVal::rational(rand_rat(true));
        }
    }

    AlgVal eval(const ExprPtr& e) {
        switch (e->kind) {
        case ExprKind::Num: return AlgVal::rational(e->num);
        case ExprKind::Sym: return env_.at(e->sym);
        default: break;
        }
        // shared subtrees are evaluated once per sample point
        if (auto it = memo_.find(e); it != memo_.end()) return it->second;
        AlgVal v = eval_uncached(e);
        memo_.emplace(e, v);
        return v;
    }

    Rat rand_rat(bool nonzero) {
        std::uniform_int_distribution<long> num_d(-40, 40);
        std::uniform_int_distribution<long> den_d(1, 12);
        long n = num_d(rng_);
        while (nonzero && n == 0) n = num_d(rng_);
        return Rat(n, den_d(rng_));
    }

private:
    AlgVal eval_uncached(const ExprPtr& e) {
        switch (e->kind) {
        case ExprKind::Num: return AlgVal::rational(e->num);
        case ExprKind::Sym: return env_.at(e->sym);
        case ExprKind::Add: {
            AlgVal acc;
            for (const auto& k : e->kids) acc = acc + eval(k);
            return acc;
        }
        case ExprKind::Mul: {
            AlgVal acc = AlgVal::rational(Rat(1));
            for (const auto& k : e->kids) acc = acc * eval(k);
            return acc;
        }
        case ExprKind::Pow: {
            AlgVal b = eval(e->kids[0]);
            if (e->num.is_integer()) {
                long p = e->num.to_long();
                if (b.is_zero()) {
                    if (p > 0) return AlgVal();
                    if (p == 0) return AlgVal::rational(Rat(1));
                    throw InadmissibleSample{"zero base with negative exponent"};
                }
                return b.pow_int(p);
            }
            if (!(e->num.denominator() == Rat(2)))
                throw KernelError("unsupported fractional exponent " + e->num.str());
            long p = (e->num * Rat(2)).to_long();
            return half_power(b, p);
        }
        case ExprKind::Atom: return eval_atom(e);
        }
        throw KernelError("unreachable expression kind");
    }

    bool coin() { return std::uniform_int_distribution<int>(0, 1)(rng_) == 1; }

    AlgVal half_power(const AlgVal& base, long p) {
        if (base.is_zero()) {
            if (p > 0) return AlgVal();
            throw InadmissibleSample{"zero base with negative exponent"};
        }
        if (!base.is_rational())
            throw InadmissibleSample{"radicand not rational at sample point"};
        AlgVal q = AlgVal::root(base.rational_value());
        AlgVal val = base.pow_int((p >= 0 ? p : -p) / 2) * ((p >= 0 ? p : -p) % 2 ? q : AlgVal::rational(Rat(1)));
        if (p < 0) val = val.inverse();
        return val;
    }

    AlgVal eval_atom(const ExprPtr& e) {
        bool zero_dmi = true;
        for (int d : e->dmi)
            if (d) zero_dmi = false;
        Builtin b = builtin_of(e->atom);
        std::vector<AlgVal> args;
        args.reserve(e->kids.size());
        for (const auto& k : e->kids) args.push_back(eval(k));

        if (b == Builtin::Sqrt && zero_dmi && args.size() == 1) return half_power(args[0], 1);
        if (b == Builtin::Ln && zero_dmi && args.size() == 1 && args[0].is_rational() &&
            args[0].rational_value().is_one())
            return AlgVal();
        if (b == Builtin::Exp && zero_dmi && args.size() == 1 && args[0].is_zero())
            return AlgVal::rational(Rat(1));
        if (b == Builtin::Arctan && zero_dmi && args.size() == 1 && args[0].is_zero()) return AlgVal();

        if (b == Builtin::Exp && zero_dmi && args.size() == 1 && args[0].leading_sign() < 0) {
            // mirror of the structural convention exp(-w) = exp(w)^-1
            return formal_value("exp", e->dmi, {-args[0]}, /*nonzero=*/true).inverse();
        }
        if (b != Builtin::None) return formal_value(e->atom, e->dmi, args, b == Builtin::Exp);

        // derivative rewrite rules: evaluate the expansion instead
        if (!zero_dmi && tab_.has_atom(e->atom)) {
            if (const RewriteRule* rule = tab_.find_rule(e->atom, e->dmi)) {
                bool match = true;
                for (std::size_t i = 0; i < e->kids.size(); ++i)
                    if (e->kids[i]->kind != ExprKind::Sym || e->kids[i]->sym != rule->args[i])
                        match = false;
                if (match) {
                    if (rule_depth_ >= 64) {
                        throw KernelError("rewrite rule on '" + e->atom +
                                          "' does not terminate: its expansion keeps "
                                          "re-triggering itself");
                    }
                    ExprPtr expanded = rule->rhs;
                    for (std::size_t i = 0; i < e->kids.size(); ++i)
                        for (int k = rule->trigger[i]; k < e->dmi[i]; ++k)
                            expanded = diff(expanded, e->kids[i]->sym, tab_);
                    DepthGuard guard(rule_depth_);
                    return eval(expanded);
                }
            }
        }

        // atoms with a declared square evaluate to a formal root of it
        if (zero_dmi && tab_.has_atom(e->atom) && tab_.atom(e->atom).square) {
            AlgVal w = eval(tab_.atom(e->atom).square);
            return half_power(w, 1);
        }

        return formal_value(e->atom, e->dmi, args, false);
    }

    AlgVal formal_value(const std::string& name, const std::vector<int>& dmi,
                        const std::vector<AlgVal>& args, bool nonzero) {
        std::ostringstream key;
        key << name << "^(";
        for (int d : dmi) key << d << ",";
        key << ")(";
        for (const auto& a : args) key << a.str() << "|";
        key << ")";
        auto it = atom_cache_.find(key.str());
        if (it != atom_cache_.end()) return it->second;
        AlgVal v = AlgVal::rational(rand_rat(nonzero));
        atom_cache_.emplace(key.str(), v);
        return v;
    }

    struct DepthGuard {
        int& depth;
        explicit DepthGuard(int& d) : depth(d) { ++depth; }
        ~DepthGuard() { --depth; }
    };
    // The memo key owns the node, so an address is never recycled while its
    // cache entry is live; identity hashing then stays sound.
    struct PtrHash {
        std::size_t operator()(const ExprPtr& e) const {
            return std::hash<const Expr*>()(e.get());
        }
    };
    struct PtrEq {
        bool operator()(const ExprPtr& a, const ExprPtr& b) const { return a.get() == b.get(); }
    };

    const SymbolTable& tab_;
    std::mt19937_64& rng_;
    int rule_depth_ = 0;
    std::map<SymbolId, AlgVal> env_;
    std::map<std::string, AlgVal> atom_cache_;
    std::unordered_map<ExprPtr, AlgVal, PtrHash, PtrEq> memo_;
};

/// Evaluates e at `trials` random points; returns false as soon as one
/// evaluation is nonzero. Inadmissible points are redrawn (bounded).
inline bool numeric_zero(const ExprPtr& e, const SymbolTable& tab, std::uint64_t seed,
                         int trials = 24) {
    std::mt19937_64 rng(seed);
    PointEvaluator ev(tab, rng);
    int done = 0, attempts = 0;
    while (done < trials) {
        if (++attempts > trials + 60)
            throw KernelError("could not find admissible sample points for the numeric zero check");
        ev.sample_point();
        try {
            if (!ev.eval(e).is_zero()) return false;
        } catch (const InadmissibleSample&) {
            continue;
        }
        ++done;
    }
    return true;
}

/// The kernel's zero decision. Structural reduction decides; when it claims
/// zero, an independent numeric evaluation of the *original* tree must
/// agree, otherwise the disagreement is reported as an internal error (it
/// can only be a bug, never a property of the input).
inline bool is_zero(const ExprPtr& e, const SymbolTable& tab) {
    if (!Normalizer(tab).is_zero_structural(e)) return false;
    if (!numeric_zero(e, tab, global_seed()))
        throw KernelBugError("structural and numeric zero tests disagree on: " + to_string(e, tab));
    return true;
}

inline bool is_zero(const ExprPtr& e, const SymbolTable& tab, std::uint64_t seed) {
    if (!Normalizer(tab).is_zero_structural(e)) return false;
    if (!numeric_zero(e, tab, seed))
        throw KernelBugError("structural and numeric zero tests disagree on: " + to_string(e, tab));
    return true;
}

} // namespace lieheat

#endif // LIEHEAT_ZEROTEST_HPP
