#ifndef LIEHEAT_NORMALIZE_HPP
#define LIEHEAT_NORMALIZE_HPP

#include "poly.hpp"

#include <optional>
#include <unordered_map>

namespace lieheat {

struct ExprLess {
    bool operator()(const ExprPtr& a, const ExprPtr& b) const { return expr_cmp(a, b) < 0; }
};

enum class Builtin { None, Ln, Exp, Sqrt, Arctan };

/// ln, exp, sqrt and arctan are recognized by name without declaration.
inline Builtin builtin_of(const std::string& name) {
    if (name == "ln") return Builtin::Ln;
    if (name == "exp") return Builtin::Exp;
    if (name == "sqrt") return Builtin::Sqrt;
    if (name == "arctan") return Builtin::Arctan;
    return Builtin::None;
}

// ----- partial differentiation ----------------------------------------------

/// Partial derivative with respect to one symbol. Jet symbols count as
/// independent coordinates here (total derivatives are built on top of this
/// in a separate operation). Sign symbols are locally constant, so their
/// derivative with respect to anything else is zero; this is what makes
/// sign-times-value encodings of absolute values differentiate correctly.
inline ExprPtr diff(const ExprPtr& e, SymbolId var, const SymbolTable& tab) {
    switch (e->kind) {
    case ExprKind::Num: return num(0);
    case ExprKind::Sym: return e->sym == var ? num(1) : num(0);
    case ExprKind::Add: {
        std::vector<ExprPtr> kids;
        kids.reserve(e->kids.size());
        for (const auto& k : e->kids) kids.push_back(diff(k, var, tab));
        return Expr::make_add(std::move(kids));
    }
    case ExprKind::Mul: {
        std::vector<ExprPtr> terms;
        for (std::size_t i = 0; i < e->kids.size(); ++i) {
            std::vector<ExprPtr> factors = e->kids;
            factors[i] = diff(e->kids[i], var, tab);
            terms.push_back(Expr::make_mul(std::move(factors)));
        }
        return Expr::make_add(std::move(terms));
    }
    case ExprKind::Pow: {
        // d(b^r) = r * b^(r-1) * db, exact for rational r
        ExprPtr db = diff(e->kids[0], var, tab);
        return num(e->num) * Expr::make_pow(e->kids[0], e->num - Rat(1)) * db;
    }
    case ExprKind::Atom: {
        bool zero_dmi = true;
        for (int d : e->dmi)
            if (d) zero_dmi = false;
        Builtin b = builtin_of(e->atom);
        if (b != Builtin::None && zero_dmi && e->kids.size() == 1) {
            ExprPtr da = diff(e->kids[0], var, tab);
            const ExprPtr& a = e->kids[0];
            switch (b) {
            case Builtin::Ln: return da / a;
            case Builtin::Exp: return e * da;
            case Builtin::Sqrt: return num(1, 2) * da * Expr::make_pow(e, Rat(-1));
            case Builtin::Arctan: return da / (num(1) + a * a);
            default: break;
            }
        }
        if (b == Builtin::None && zero_dmi && tab.has_atom(e->atom) && tab.atom(e->atom).square) {
            // g with g^2 = w differentiates like sqrt(w): dg = dw / (2 g)
            ExprPtr dw = diff(tab.atom(e->atom).square, var, tab);
            return num(1, 2) * dw * Expr::make_pow(e, Rat(-1));
        }
        std::vector<ExprPtr> terms;
        for (std::size_t i = 0; i < e->kids.size(); ++i) {
            ExprPtr da = diff(e->kids[i], var, tab);
            std::vector<int> dmi = e->dmi;
            ++dmi[i];
            terms.push_back(Expr::make_atom(e->atom, e->kids, std::move(dmi)) * da);
        }
        return Expr::make_add(std::move(terms));
    }
    }
    return num(0);
}

// ----- substitution -----------------------------------------------------------

inline ExprPtr subst_syms(const ExprPtr& e, const std::map<SymbolId, ExprPtr>& m) {
    switch (e->kind) {
    case ExprKind::Num: return e;
    case ExprKind::Sym: {
        auto it = m.find(e->sym);
        return it == m.end() ? e : it->second;
    }
    default: {
        std::vector<ExprPtr> kids;
        kids.reserve(e->kids.size());
        bool changed = false;
        for (const auto& k : e->kids) {
            kids.push_back(subst_syms(k, m));
            changed = changed || kids.back().get() != k.get();
        }
        if (!changed) return e;
        switch (e->kind) {
        case ExprKind::Add: return Expr::make_add(std::move(kids));
        case ExprKind::Mul: return Expr::make_mul(std::move(kids));
        case ExprKind::Pow: return Expr::make_pow(std::move(kids[0]), e->num);
        case ExprKind::Atom: return Expr::make_atom(e->atom, std::move(kids), e->dmi);
        default: return e;
        }
    }
    }
}

/// Rebuilds the tree bottom-up; after the children of an atom application
/// have been rewritten, offers the rebuilt node to the hook, which may
/// replace it wholesale.
inline ExprPtr subst_atoms(const ExprPtr& e,
                           const std::function<std::optional<ExprPtr>(const ExprPtr&)>& hook) {
    switch (e->kind) {
    case ExprKind::Num:
    case ExprKind::Sym: return e;
    default: {
        std::vector<ExprPtr> kids;
        kids.reserve(e->kids.size());
        for (const auto& k : e->kids) kids.push_back(subst_atoms(k, hook));
        ExprPtr rebuilt;
        switch (e->kind) {
        case ExprKind::Add: rebuilt = Expr::make_add(std::move(kids)); break;
        case ExprKind::Mul: rebuilt = Expr::make_mul(std::move(kids)); break;
        case ExprKind::Pow: rebuilt = Expr::make_pow(std::move(kids[0]), e->num); break;
        case ExprKind::Atom: rebuilt = Expr::make_atom(e->atom, std::move(kids), e->dmi); break;
        default: rebuilt = e; break;
        }
        if (rebuilt->kind == ExprKind::Atom) {
            if (auto r = hook(rebuilt)) return *r;
        }
        return rebuilt;
    }
    }
}

// ----- canonical form ---------------------------------------------------------

/// Converts expressions to reduced rational-function form and back. One
/// normalizer instance carries the algebraic context (which generators are
/// square roots and what their radicands are), so it must outlive the
/// polynomials produced with it.
class Normalizer : public Relations {
public:
    explicit Normalizer(const SymbolTable& tab) : tab_(tab), one_(Poly::constant(Rat(1))) {}

    const SymbolTable& table() const { return tab_; }

    const Poly* square_of(const ExprPtr& gen) const override {
        if (gen->kind == ExprKind::Sym) {
            if (tab_.info(gen->sym).kind == SymbolKind::Sign) return &one_;
            return nullptr;
        }
        if (gen->kind != ExprKind::Atom) return nullptr;
        if (builtin_of(gen->atom) == Builtin::Sqrt) {
            auto it = squares_.find(gen);
            if (it != squares_.end()) return &it->second;
            // Radicand polynomials are registered when the generator is
            // created; a cache miss means the generator arrived from outside
            // this normalizer, so derive the radicand from its argument.
            RatPoly r = convert(gen->kids[0]);
            if (!r.den.is_constant())
                throw KernelError("square root of a non-polynomial argument");
            Poly rad = r.num.scaled(Rat(1) / r.den.constant_value());
            return &squares_.emplace(gen, std::move(rad)).first->second;
        }
        if (tab_.has_atom(gen->atom) && tab_.atom(gen->atom).square) {
            auto it = squares_.find(gen);
            if (it != squares_.end()) return &it->second;
            RatPoly r = convert(tab_.atom(gen->atom).square);
            if (!r.den.is_constant())
                throw KernelError("declared square of '" + gen->atom + "' is not a polynomial");
            Poly sq = r.num.scaled(Rat(1) / r.den.constant_value());
            return &squares_.emplace(gen, std::move(sq)).first->second;
        }
        return nullptr;
    }

    RatPoly convert(const ExprPtr& e) const {
        auto it = memo_.find(e);
        if (it != memo_.end()) return it->second;
        RatPoly r = convert_uncached(e);
        memo_.emplace(e, r);
        return r;
    }

    ExprPtr back(const Poly& p) const {
        if (p.is_zero()) return num(0);
        std::vector<ExprPtr> terms;
        for (auto it = p.terms().rbegin(); it != p.terms().rend(); ++it) {
            const auto& [m, c] = *it;
            std::vector<ExprPtr> factors;
            if (m.empty() || !c.is_one()) factors.push_back(num(c));
            for (const auto& [g, e] : m.f)
                factors.push_back(e == 1 ? g : Expr::make_pow(g, Rat(e)));
            terms.push_back(Expr::make_mul(std::move(factors)));
        }
        return Expr::make_add(std::move(terms));
    }

    ExprPtr back(const RatPoly& r) const {
        if (r.num.is_zero()) return num(0);
        if (r.den.is_constant() && r.den.constant_value().is_one()) return back(r.num);
        return back(r.num) * Expr::make_pow(back(r.den), Rat(-1));
    }

    ExprPtr normalize(const ExprPtr& e) const { return back(convert(e)); }
    bool is_zero_structural(const ExprPtr& e) const { return convert(e).is_zero(); }

private:
    RatPoly convert_uncached(const ExprPtr& e) const {
        switch (e->kind) {
        case ExprKind::Num: return RatPoly::constant(e->num);
        case ExprKind::Sym: return RatPoly{Poly::gen(e), Poly::constant(Rat(1))};
        case ExprKind::Add: {
            RatPoly acc = RatPoly::constant(Rat(0));
            for (const auto& k : e->kids) acc = acc.add(convert(k), *this);
            return acc;
        }
        case ExprKind::Mul: {
            RatPoly acc = RatPoly::constant(Rat(1));
            for (const auto& k : e->kids) acc = acc.mul(convert(k), *this);
            return acc;
        }
        case ExprKind::Pow: return convert_pow(e->kids[0], e->num);
        case ExprKind::Atom: return convert_atom(e);
        }
        throw KernelError("unreachable expression kind");
    }

    RatPoly convert_pow(const ExprPtr& base, const Rat& exp) const {
        if (exp.is_integer()) return convert(base).pow_int(exp.to_long(), *this);
        if (!(exp.denominator() == Rat(2)))
            throw KernelError("unsupported fractional exponent " + exp.str() +
                              "; only halves are algebraic here (others should arrive as exp/ln)");
        long p = [&] {
            Rat doubled = exp * Rat(2);
            return doubled.to_long();
        }(); // odd numerator
        RatPoly b = convert(base);
        if (b.is_zero()) {
            if (p > 0) return RatPoly::constant(Rat(0));
            throw KernelError("division by zero");
        }
        if (b.is_constant()) {
            Rat v = b.constant_value();
            Rat root;
            if (v.sign() > 0 && v.sqrt_exact(root)) {
                return RatPoly::constant(root.pow(p));
            }
        }
        // base = n/d; sqrt(base) = sqrt(n*d)/d with a polynomial radicand, so
        // base^(|p|/2) = q^|p| / d^|p| = w^m * q / d^|p| where q^2 = w = n*d.
        Poly rad = reduce_relations(b.num * b.den, *this);
        ExprPtr gen = root_generator(rad);
        RatPoly q{Poly::gen(gen), Poly::constant(Rat(1))};
        RatPoly w{*square_of(gen), Poly::constant(Rat(1))};
        RatPoly d{b.den, Poly::constant(Rat(1))};
        long ap = p >= 0 ? p : -p;
        RatPoly val = w.pow_int(ap / 2, *this).mul(q, *this).div(d.pow_int(ap, *this), *this);
        if (p < 0) val = val.inv(*this);
        return val;
    }

    /// Canonical formal square root of a reduced polynomial radicand.
    ExprPtr root_generator(const Poly& rad) const {
        if (rad.is_zero()) throw KernelError("square root of zero polynomial");
        ExprPtr gen = Expr::make_atom("sqrt", {back(rad)});
        if (!squares_.count(gen)) squares_.emplace(gen, rad);
        return gen;
    }

    RatPoly convert_atom(const ExprPtr& e) const {
        if (e->atom == "abs")
            throw KernelError("unresolved absolute value: rewrite |w| as s*w with a sign symbol s "
                              "and verify each sign chart separately");
        // canonicalize arguments first so structurally equal applications merge
        std::vector<ExprPtr> args;
        args.reserve(e->kids.size());
        for (const auto& k : e->kids) args.push_back(normalize(k));
        Builtin b = builtin_of(e->atom);
        bool zero_dmi = true;
        for (int d : e->dmi)
            if (d) zero_dmi = false;

        if (b == Builtin::Sqrt && zero_dmi && args.size() == 1)
            return convert_pow(args[0], Rat(1, 2));

        if (b != Builtin::None && zero_dmi && args.size() == 1) {
            RatPoly a = convert(args[0]);
            if (b == Builtin::Exp) {
                if (a.is_zero()) return RatPoly::constant(Rat(1));
                // exp(-w) is represented as exp(w)^-1 so that reciprocal
                // exponentials cancel structurally
                if (a.num.leading().second.sign() < 0) {
                    ExprPtr gen = Expr::make_atom("exp", {back(a.neg())});
                    return RatPoly{Poly::constant(Rat(1)), Poly::gen(gen)};
                }
                return RatPoly{Poly::gen(Expr::make_atom("exp", {back(a)})), Poly::constant(Rat(1))};
            }
            if (b == Builtin::Ln && a.is_constant() && a.constant_value().is_one())
                return RatPoly::constant(Rat(0));
            if (b == Builtin::Arctan && a.is_zero()) return RatPoly::constant(Rat(0));
            ExprPtr gen = Expr::make_atom(e->atom, {back(a)});
            return RatPoly{Poly::gen(gen), Poly::constant(Rat(1))};
        }

        // user rewrite rules on derivatives of declared atoms; they apply
        // only to the exact plain arguments the rule was written for
        if (!zero_dmi && tab_.has_atom(e->atom)) {
            if (const RewriteRule* rule = tab_.find_rule(e->atom, e->dmi)) {
                bool match = true;
                for (std::size_t i = 0; i < args.size(); ++i)
                    if (args[i]->kind != ExprKind::Sym || args[i]->sym != rule->args[i]) match = false;
                if (match) {
                    if (rule_depth_ >= 64) {
                        throw KernelError("rewrite rule on '" + e->atom +
                                          "' does not terminate: its expansion keeps "
                                          "re-triggering itself");
                    }
                    ExprPtr expanded = rule->rhs;
                    for (std::size_t i = 0; i < args.size(); ++i)
                        for (int k = rule->trigger[i]; k < e->dmi[i]; ++k)
                            expanded = diff(expanded, args[i]->sym, tab_);
                    DepthGuard guard(rule_depth_);
                    return convert(expanded);
                }
            }
        }

        ExprPtr gen = Expr::make_atom(e->atom, std::move(args), e->dmi);
        return RatPoly{Poly::gen(gen), Poly::constant(Rat(1))};
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
    Poly one_;
    mutable int rule_depth_ = 0;
    mutable std::map<ExprPtr, Poly, ExprLess> squares_;
    mutable std::unordered_map<ExprPtr, RatPoly, PtrHash, PtrEq> memo_;
};

// ----- top-level helpers --------------------------------------------------------

inline ExprPtr normalize(const ExprPtr& e, const SymbolTable& tab) {
    return Normalizer(tab).normalize(e);
}

inline bool structurally_zero(const ExprPtr& e, const SymbolTable& tab) {
    return Normalizer(tab).is_zero_structural(e);
}

/// Collects the jet-bundle symbols (dependent variables and their jets)
/// occurring in an expression.
inline void collect_jet_symbols(const ExprPtr& e, const SymbolTable& tab, std::set<SymbolId>& out) {
    if (e->kind == ExprKind::Sym) {
        SymbolKind k = tab.info(e->sym).kind;
        if (k == SymbolKind::Jet || k == SymbolKind::Dependent) out.insert(e->sym);
        return;
    }
    for (const auto& k : e->kids) collect_jet_symbols(k, tab, out);
}

/// Total derivative along the independent variable with the given index:
/// D = d/dx_i + sum over jets u_J of u_{J+e_i} * d/du_J. Raises
/// "prolongation order exceeded" only when a jet past the supported order
/// actually enters with a nonzero coefficient.
inline ExprPtr total_diff(const ExprPtr& e, std::size_t indep_index, const SymbolTable& tab) {
    if (indep_index >= tab.independents().size())
        throw KernelError("total_diff: no such independent variable");
    Normalizer nz(tab);
    ExprPtr out = diff(e, tab.independents()[indep_index], tab);
    std::set<SymbolId> jets;
    collect_jet_symbols(e, tab, jets);
    for (SymbolId js : jets) {
        ExprPtr c = diff(e, js, tab);
        if (nz.is_zero_structural(c)) continue;
        const SymbolInfo& info = tab.info(js);
        std::vector<int> mi = info.jet;
        ++mi[indep_index];
        SymbolId next = tab.jet(info.dep, mi); // may throw "prolongation order exceeded"
        out = out + c * sym(next);
    }
    return out;
}

} // namespace lieheat

#endif // LIEHEAT_NORMALIZE_HPP
