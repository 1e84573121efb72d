#ifndef LIEHEAT_POLY_HPP
#define LIEHEAT_POLY_HPP

#include "expr.hpp"

#include <functional>
#include <map>
#include <set>
#include <utility>
#include <vector>

namespace lieheat {

/// Power product of generators. A generator is a canonical expression that
/// the polynomial layer treats as an opaque variable: a symbol, an atom
/// application, or a formal square root. Factors are sorted by expr_cmp and
/// exponents are strictly positive.
struct Monomial {
    std::vector<std::pair<ExprPtr, int>> f;

    int total_degree() const {
        int d = 0;
        for (const auto& [g, e] : f) d += e;
        return d;
    }
    bool empty() const { return f.empty(); }
};

/// Graded lexicographic order (total degree first, then lex with the
/// expr_cmp-smallest generator most significant). Multiplicative, so leading
/// terms multiply, which exact division and the PRS gcd rely on.
inline int mono_cmp(const Monomial& a, const Monomial& b) {
    int da = a.total_degree(), db = b.total_degree();
    if (da != db) return da < db ? -1 : 1;
    std::size_t i = 0, j = 0;
    while (i < a.f.size() && j < b.f.size()) {
        int c = expr_cmp(a.f[i].first, b.f[j].first);
        if (c < 0) return 1; // a carries the smaller generator with positive exponent
        if (c > 0) return -1;
        if (a.f[i].second != b.f[j].second) return a.f[i].second > b.f[j].second ? 1 : -1;
        ++i;
        ++j;
    }
    if (i < a.f.size()) return 1;
    if (j < b.f.size()) return -1;
    return 0;
}

struct MonoLess {
    bool operator()(const Monomial& a, const Monomial& b) const { return mono_cmp(a, b) < 0; }
};

inline Monomial mono_mul(const Monomial& a, const Monomial& b) {
    Monomial out;
    std::size_t i = 0, j = 0;
    while (i < a.f.size() || j < b.f.size()) {
        if (j == b.f.size()) out.f.push_back(a.f[i++]);
        else if (i == a.f.size()) out.f.push_back(b.f[j++]);
        else {
            int c = expr_cmp(a.f[i].first, b.f[j].first);
            if (c < 0) out.f.push_back(a.f[i++]);
            else if (c > 0) out.f.push_back(b.f[j++]);
            else {
                out.f.emplace_back(a.f[i].first, a.f[i].second + b.f[j].second);
                ++i;
                ++j;
            }
        }
    }
    return out;
}

inline bool mono_divides(const Monomial& a, const Monomial& b) {
    // does a divide b?
    std::size_t j = 0;
    for (const auto& [g, e] : a.f) {
        while (j < b.f.size() && expr_cmp(b.f[j].first, g) < 0) ++j;
        if (j == b.f.size() || expr_cmp(b.f[j].first, g) != 0 || b.f[j].second < e) return false;
    }
    return true;
}

inline Monomial mono_div(const Monomial& b, const Monomial& a) {
    // b / a, assuming divisibility
    Monomial out;
    std::size_t i = 0;
    for (const auto& [g, e] : b.f) {
        int sub = 0;
        if (i < a.f.size() && expr_cmp(a.f[i].first, g) == 0) {
            sub = a.f[i].second;
            ++i;
        }
        if (e - sub > 0) out.f.emplace_back(g, e - sub);
    }
    return out;
}

/// Sparse multivariate polynomial over exact rationals in the free
/// commutative ring on generator expressions. No algebraic relations are
/// applied here; relation rewriting is a separate explicit pass.
class Poly {
public:
    using Terms = std::map<Monomial, Rat, MonoLess>;

    Poly() = default;
    static Poly constant(Rat c) {
        Poly p;
        if (!c.is_zero()) p.t_[Monomial{}] = std::move(c);
        return p;
    }
    static Poly gen(ExprPtr g, int e = 1) {
        Poly p;
        Monomial m;
        if (e != 0) m.f.emplace_back(std::move(g), e);
        p.t_[std::move(m)] = Rat(1);
        return p;
    }

    bool is_zero() const { return t_.empty(); }
    bool is_constant() const { return t_.empty() || (t_.size() == 1 && t_.begin()->first.empty()); }
    Rat constant_value() const {
        if (t_.empty()) return Rat(0);
        if (!is_constant()) throw KernelError("Poly: not a constant");
        return t_.begin()->second;
    }

    const Terms& terms() const { return t_; }

    /// Leading term under graded lex.
    const std::pair<const Monomial, Rat>& leading() const {
        if (t_.empty()) throw KernelError("Poly: leading term of zero");
        return *t_.rbegin();
    }

    void add_term(Monomial m, Rat c) {
        if (c.is_zero()) return;
        auto it = t_.find(m);
        if (it == t_.end()) t_.emplace(std::move(m), std::move(c));
        else {
            it->second += c;
            if (it->second.is_zero()) t_.erase(it);
        }
    }

    Poly operator-() const {
        Poly out;
        for (const auto& [m, c] : t_) out.t_[m] = -c;
        return out;
    }
    Poly operator+(const Poly& o) const {
        Poly out = *this;
        for (const auto& [m, c] : o.t_) out.add_term(m, c);
        return out;
    }
    Poly operator-(const Poly& o) const {
        Poly out = *this;
        for (const auto& [m, c] : o.t_) out.add_term(m, -c);
        return out;
    }
    Poly operator*(const Poly& o) const {
        Poly out;
        for (const auto& [ma, ca] : t_)
            for (const auto& [mb, cb] : o.t_) out.add_term(mono_mul(ma, mb), ca * cb);
        return out;
    }
    Poly scaled(const Rat& c) const {
        Poly out;
        if (c.is_zero()) return out;
        for (const auto& [m, k] : t_) out.t_[m] = k * c;
        return out;
    }
    Poly pow_int(long e) const {
        if (e < 0) throw KernelError("Poly: negative power");
        Poly acc = Poly::constant(Rat(1));
        Poly base = *this;
        while (e > 0) {
            if (e & 1) acc = acc * base;
            base = base * base;
            e >>= 1;
        }
        return acc;
    }

    int degree_in(const ExprPtr& g) const {
        int d = 0;
        for (const auto& [m, c] : t_)
            for (const auto& [gen, e] : m.f)
                if (expr_cmp(gen, g) == 0) d = std::max(d, e);
        return d;
    }

    struct GenLess {
        bool operator()(const ExprPtr& a, const ExprPtr& b) const { return expr_cmp(a, b) < 0; }
    };

    void collect_generators(std::set<ExprPtr, GenLess>& out) const {
        for (const auto& [m, c] : t_)
            for (const auto& [g, e] : m.f) out.insert(g);
    }

    std::vector<ExprPtr> generators() const {
        std::set<ExprPtr, GenLess> s;
        collect_generators(s);
        return {s.begin(), s.end()};
    }

    bool operator==(const Poly& o) const {
        if (t_.size() != o.t_.size()) return false;
        auto i = t_.begin();
        auto j = o.t_.begin();
        for (; i != t_.end(); ++i, ++j) {
            if (mono_cmp(i->first, j->first) != 0 || !(i->second == j->second)) return false;
        }
        return true;
    }
    bool operator!=(const Poly& o) const { return !(*this == o); }

private:
    Terms t_;
};

/// Exact division in the free ring; throws KernelError when g does not
/// divide f. Correct because the monomial order is multiplicative: whenever
/// g | r, the leading term of g divides the leading term of r.
inline Poly divexact(const Poly& f, const Poly& g) {
    if (g.is_zero()) throw KernelError("Poly: division by zero polynomial");
    Poly q;
    Poly r = f;
    while (!r.is_zero()) {
        const auto& [rm, rc] = r.leading();
        const auto& [gm, gc] = g.leading();
        if (!mono_divides(gm, rm)) throw KernelError("Poly: inexact division");
        Monomial tm = mono_div(rm, gm);
        Rat tc = rc / gc;
        Poly t;
        t.add_term(tm, tc);
        q = q + t;
        r = r - t * g;
    }
    return q;
}

namespace detail {

/// Univariate view of a polynomial in one chosen generator, with
/// polynomial coefficients in the remaining generators.
inline std::map<int, Poly> univariate_view(const Poly& p, const ExprPtr& v) {
    std::map<int, Poly> out;
    for (const auto& [m, c] : p.terms()) {
        int dv = 0;
        Monomial rest;
        for (const auto& [g, e] : m.f) {
            if (expr_cmp(g, v) == 0) dv = e;
            else rest.f.emplace_back(g, e);
        }
        out[dv].add_term(std::move(rest), c);
    }
    return out;
}

inline Poly from_univariate(const std::map<int, Poly>& coeffs, const ExprPtr& v) {
    Poly out;
    for (const auto& [d, c] : coeffs) out = out + c * Poly::gen(v, d);
    return out;
}

} // namespace detail

Poly poly_gcd(Poly a, Poly b);

namespace detail {

/// Content of p viewed as univariate in v: gcd of its coefficients.
inline Poly content_in(const Poly& p, const ExprPtr& v) {
    Poly c;
    for (const auto& [d, coeff] : univariate_view(p, v)) c = poly_gcd(c, coeff);
    return c;
}

/// Pseudo-remainder of a by b in the variable v (up to content, which the
/// primitive PRS strips anyway).
inline Poly pseudo_rem(Poly a, const Poly& b, const ExprPtr& v) {
    auto bu = univariate_view(b, v);
    int db = bu.rbegin()->first;
    const Poly& lb = bu.rbegin()->second;
    while (!a.is_zero()) {
        auto au = univariate_view(a, v);
        int da = au.rbegin()->first;
        if (da < db) break;
        const Poly& la = au.rbegin()->second;
        a = a * lb - b * la * Poly::gen(v, da - db);
    }
    return a;
}

} // namespace detail

/// Gcd in the free commutative ring over the rationals, by primitive PRS
/// with recursion over generators. The result is normalized so its leading
/// coefficient is 1.
inline Poly poly_gcd(Poly a, Poly b) {
    if (a.is_zero() && b.is_zero()) return Poly();
    auto monic = [](Poly p) {
        if (p.is_zero()) return p;
        return p.scaled(Rat(1) / p.leading().second);
    };
    if (a.is_zero()) return monic(b);
    if (b.is_zero()) return monic(a);
    if (a.is_constant() || b.is_constant()) return Poly::constant(Rat(1));

    // Cheap common-monomial factor first.
    auto mono_gcd_all = [](const Poly& p) {
        Monomial g = p.terms().begin()->first;
        for (const auto& [m, c] : p.terms()) {
            Monomial next;
            std::size_t i = 0, j = 0;
            while (i < g.f.size() && j < m.f.size()) {
                int cgn = expr_cmp(g.f[i].first, m.f[j].first);
                if (cgn < 0) ++i;
                else if (cgn > 0) ++j;
                else {
                    next.f.emplace_back(g.f[i].first, std::min(g.f[i].second, m.f[j].second));
                    ++i;
                    ++j;
                }
            }
            g = std::move(next);
            if (g.empty()) break;
        }
        return g;
    };
    Monomial ma = mono_gcd_all(a), mb = mono_gcd_all(b);
    Monomial mg;
    {
        std::size_t i = 0, j = 0;
        while (i < ma.f.size() && j < mb.f.size()) {
            int c = expr_cmp(ma.f[i].first, mb.f[j].first);
            if (c < 0) ++i;
            else if (c > 0) ++j;
            else {
                mg.f.emplace_back(ma.f[i].first, std::min(ma.f[i].second, mb.f[j].second));
                ++i;
                ++j;
            }
        }
    }
    if (!ma.empty()) {
        Poly d;
        d.add_term(ma, Rat(1));
        a = divexact(a, d);
    }
    if (!mb.empty()) {
        Poly d;
        d.add_term(mb, Rat(1));
        b = divexact(b, d);
    }
    Poly monomial_part;
    monomial_part.add_term(mg, Rat(1));
    if (a.is_constant() || b.is_constant()) return monic(monomial_part);

    // Main variable: a generator of a's leading monomial that also occurs in b,
    // else recurse through contents.
    ExprPtr v;
    for (const auto& [g, e] : a.leading().first.f) {
        if (b.degree_in(g) > 0) {
            v = g;
            break;
        }
    }
    if (!v) {
        // No shared main variable via the leading monomial; fall back to any
        // shared generator, else the gcd is the shared monomial part times
        // the gcd of contents (which is constant here).
        for (const ExprPtr& g : a.generators()) {
            if (b.degree_in(g) > 0) {
                v = g;
                break;
            }
        }
        if (!v) return monic(monomial_part);
    }

    Poly ca = detail::content_in(a, v);
    Poly cb = detail::content_in(b, v);
    Poly cg = poly_gcd(ca, cb);
    Poly A = divexact(a, ca);
    Poly B = divexact(b, cb);
    if (detail::univariate_view(A, v).rbegin()->first < detail::univariate_view(B, v).rbegin()->first)
        std::swap(A, B);
    while (true) {
        Poly r = detail::pseudo_rem(A, B, v);
        if (r.is_zero()) break;
        if (r.degree_in(v) == 0) {
            B = Poly::constant(Rat(1));
            break;
        }
        A = B;
        B = divexact(r, detail::content_in(r, v));
    }
    if (B.is_constant()) return monic(monomial_part * cg);
    return monic(monomial_part * cg * divexact(B, detail::content_in(B, v)));
}

/// Algebraic relation provider: maps a generator to the polynomial its
/// square rewrites to (nullptr when the generator is free). Backed by the
/// normalizer, which knows about sign symbols and square-root generators.
class Relations {
public:
    virtual ~Relations() = default;
    virtual const Poly* square_of(const ExprPtr& gen) const = 0;
};

/// Rewrites every monomial so that, for each relation-bearing generator g
/// with g^2 = w, the exponent of g is 0 or 1. Terminates because w never
/// contains relation-bearing generators.
inline Poly reduce_relations(const Poly& p, const Relations& rel) {
    Poly out;
    for (const auto& [m, c] : p.terms()) {
        Poly term = Poly::constant(c);
        Monomial plain;
        for (const auto& [g, e] : m.f) {
            const Poly* sq = rel.square_of(g);
            if (!sq) {
                plain.f.emplace_back(g, e);
                continue;
            }
            term = term * sq->pow_int(e / 2);
            if (e % 2) plain.f.emplace_back(g, 1);
        }
        Poly mono;
        mono.add_term(std::move(plain), Rat(1));
        out = out + term * mono;
    }
    return out;
}

inline bool has_relation_gen(const Poly& p, const Relations& rel) {
    for (const ExprPtr& g : p.generators())
        if (rel.square_of(g)) return true;
    return false;
}

/// Finds a conjugate multiplier c such that p*c is free of relation-bearing
/// generators, and returns {c, reduce(p*c)}. Eliminates one relation
/// generator per step (squares of relation generators are plain, so none
/// reappear). If the product collapses to zero the radicand was a perfect
/// square in the coefficient field; that is reported, not mis-simplified.
inline std::pair<Poly, Poly> rationalize_plain(const Poly& p, const Relations& rel) {
    Poly mult = Poly::constant(Rat(1));
    Poly cur = reduce_relations(p, rel);
    while (true) {
        ExprPtr q;
        for (const ExprPtr& g : cur.generators()) {
            if (rel.square_of(g)) {
                q = g;
                break;
            }
        }
        if (!q) return {mult, cur};
        // split cur = A + B*q with deg_q <= 1 after reduction
        auto view = detail::univariate_view(cur, q);
        Poly A = view.count(0) ? view[0] : Poly();
        Poly B = view.count(1) ? view[1] : Poly();
        Poly conj = A - B * Poly::gen(q);
        Poly next = reduce_relations(cur * conj, rel); // = A^2 - B^2 * square_of(q)
        if (next.is_zero())
            throw KernelError("division by zero (radicand is a perfect square; use a sign symbol "
                              "times an exact root instead)");
        mult = reduce_relations(mult * conj, rel);
        cur = next;
    }
}

/// Rational function: num/den with den nonzero, free of relation-bearing
/// generators (denominators are rationalized), gcd-reduced, and den monic
/// under the graded-lex leading coefficient. With those invariants the
/// representation of a value is unique, so structural equality of reduced
/// forms decides equality. Construct only through make().
struct RatPoly {
    Poly num;
    Poly den = Poly::constant(Rat(1));

    static RatPoly make(Poly n, Poly d, const Relations& rel) {
        n = reduce_relations(n, rel);
        d = reduce_relations(d, rel);
        if (d.is_zero()) throw KernelError("division by zero");
        if (has_relation_gen(d, rel)) {
            auto [mult, plain] = rationalize_plain(d, rel);
            n = reduce_relations(n * mult, rel);
            d = std::move(plain);
        }
        if (n.is_zero()) return RatPoly{Poly(), Poly::constant(Rat(1))};
        Poly g = poly_gcd(n, d);
        if (!g.is_constant() || !(g.constant_value() == Rat(1))) {
            n = divexact(n, g);
            d = divexact(d, g);
        }
        Rat lc = d.leading().second;
        if (!(lc == Rat(1))) {
            Rat inv = Rat(1) / lc;
            n = n.scaled(inv);
            d = d.scaled(inv);
        }
        return RatPoly{std::move(n), std::move(d)};
    }

    static RatPoly constant(Rat c) { return RatPoly{Poly::constant(std::move(c)), Poly::constant(Rat(1))}; }

    bool is_zero() const { return num.is_zero(); }
    bool is_constant() const { return num.is_constant() && den.is_constant(); }
    Rat constant_value() const { return num.constant_value() / den.constant_value(); }

    RatPoly add(const RatPoly& o, const Relations& rel) const {
        return make(num * o.den + o.num * den, den * o.den, rel);
    }
    RatPoly sub(const RatPoly& o, const Relations& rel) const {
        return make(num * o.den - o.num * den, den * o.den, rel);
    }
    RatPoly mul(const RatPoly& o, const Relations& rel) const {
        return make(num * o.num, den * o.den, rel);
    }
    RatPoly inv(const Relations& rel) const {
        if (num.is_zero()) throw KernelError("division by zero");
        return make(den, num, rel);
    }
    RatPoly div(const RatPoly& o, const Relations& rel) const {
        if (o.num.is_zero()) throw KernelError("division by zero");
        return make(num * o.den, den * o.num, rel);
    }
    RatPoly neg() const { return RatPoly{-num, den}; }
    RatPoly pow_int(long e, const Relations& rel) const {
        if (e >= 0) return make(num.pow_int(e), den.pow_int(e), rel);
        if (num.is_zero()) throw KernelError("division by zero");
        return make(den.pow_int(-e), num.pow_int(-e), rel);
    }

    bool equals(const RatPoly& o) const { return num == o.num && den == o.den; }
};

} // namespace lieheat

#endif // LIEHEAT_POLY_HPP
