#ifndef LIEHEAT_FIELDS_HPP
#define LIEHEAT_FIELDS_HPP

#include "zerotest.hpp"

namespace lieheat {

/// Infinitesimal point transformation Q = tau*d/dt + xi*d/dx + eta*d/du.
/// Components are functions on the base space (t, x, u); jets may not enter.
struct VectorField {
    ExprPtr tau;
    ExprPtr xi;
    ExprPtr eta;
};

/// Declares the standard jet-space variables t, x, u (with jets to order
/// three). The caller adds parameters, sign symbols and operators before
/// freezing the table.
inline void declare_heat_vars(SymbolTable& tab) {
    tab.declare_independent("t");
    tab.declare_independent("x");
    tab.declare_dependent("u");
}

namespace detail {
inline void require_point_components(const VectorField& q, const SymbolTable& tab,
                                     const char* who) {
    std::set<SymbolId> jets;
    collect_jet_symbols(q.tau, tab, jets);
    collect_jet_symbols(q.xi, tab, jets);
    collect_jet_symbols(q.eta, tab, jets);
    for (SymbolId s : jets) {
        const SymbolInfo& info = tab.info(s);
        int total = 0;
        for (int k : info.jet) total += k;
        if (total > 0)
            throw KernelError(std::string(who) +
                              ": vector field components must be point functions of (t, x, u)");
    }
}
} // namespace detail

/// Action of the field on a function of (t, x, u):
/// Q(f) = tau*f_t + xi*f_x + eta*f_u.
inline ExprPtr apply_field(const VectorField& q, const ExprPtr& f, const SymbolTable& tab) {
    SymbolId t = tab.independents()[0], x = tab.independents()[1], u = tab.dependents()[0];
    return q.tau * diff(f, t, tab) + q.xi * diff(f, x, tab) + q.eta * diff(f, u, tab);
}

/// Lie bracket of two point fields, computed componentwise as
/// [P, Q]^c = P(Q^c) - Q(P^c).
inline VectorField commutator(const VectorField& p, const VectorField& q, const SymbolTable& tab) {
    detail::require_point_components(p, tab, "commutator");
    detail::require_point_components(q, tab, "commutator");
    return VectorField{
        normalize(apply_field(p, q.tau, tab) - apply_field(q, p.tau, tab), tab),
        normalize(apply_field(p, q.xi, tab) - apply_field(q, p.xi, tab), tab),
        normalize(apply_field(p, q.eta, tab) - apply_field(q, p.eta, tab), tab),
    };
}

inline VectorField field_add(const VectorField& a, const VectorField& b) {
    return {a.tau + b.tau, a.xi + b.xi, a.eta + b.eta};
}
inline VectorField field_scale(const ExprPtr& c, const VectorField& a) {
    return {c * a.tau, c * a.xi, c * a.eta};
}
inline bool field_is_zero(const VectorField& a, const SymbolTable& tab) {
    return is_zero(a.tau, tab) && is_zero(a.xi, tab) && is_zero(a.eta, tab);
}

/// First and second prolongation coefficients of a point field:
/// phi^t, phi^x extend eta to u_t, u_x and phi^xx to u_xx, via
///   phi^x  = D_x(eta) - u_t D_x(tau) - u_x D_x(xi)
///   phi^t  = D_t(eta) - u_t D_t(tau) - u_x D_t(xi)
///   phi^xx = D_x(phi^x) - u_tx D_x(tau) - u_xx D_x(xi).
struct Prolongation {
    ExprPtr phi_t;
    ExprPtr phi_x;
    ExprPtr phi_xx;
};

inline Prolongation prolong2(const VectorField& q, const SymbolTable& tab) {
    detail::require_point_components(q, tab, "prolong2");
    ExprPtr phi_x = total_diff(q.eta, 1, tab) - sym(tab, "u_t") * total_diff(q.tau, 1, tab) -
                    sym(tab, "u_x") * total_diff(q.xi, 1, tab);
    ExprPtr phi_t = total_diff(q.eta, 0, tab) - sym(tab, "u_t") * total_diff(q.tau, 0, tab) -
                    sym(tab, "u_x") * total_diff(q.xi, 0, tab);
    ExprPtr phi_xx = total_diff(phi_x, 1, tab) - sym(tab, "u_tx") * total_diff(q.tau, 1, tab) -
                     sym(tab, "u_xx") * total_diff(q.xi, 1, tab);
    return {normalize(phi_t, tab), normalize(phi_x, tab), normalize(phi_xx, tab)};
}

/// Invariance residual of the evolution equation u_t = u_xx + F(t, x, u, u_x)
/// under the field Q: the prolonged action of Q on (u_t - u_xx - F),
/// restricted to solutions. The equation and its x-derivative eliminate u_t
/// and u_tx; what remains is a function of (t, x, u, u_x, u_xx, u_xxx) that
/// vanishes identically exactly when Q is an infinitesimal symmetry.
/// (u_xxx survives only when tau depends on x or u.)
inline ExprPtr invariance_residual(const VectorField& q, const ExprPtr& F, const SymbolTable& tab) {
    detail::require_point_components(q, tab, "invariance_residual");
    SymbolId t = tab.independents()[0], x = tab.independents()[1], u = tab.dependents()[0];
    SymbolId u_x = tab.id("u_x"), u_t = tab.id("u_t"), u_tx = tab.id("u_tx");
    {
        std::set<SymbolId> jets;
        collect_jet_symbols(F, tab, jets);
        for (SymbolId s : jets)
            if (s != u_x && s != u)
                throw KernelError("invariance_residual: the source term may depend on t, x, u, u_x only");
    }

    Prolongation pr = prolong2(q, tab);
    ExprPtr raw = pr.phi_t - pr.phi_xx - q.tau * diff(F, t, tab) - q.xi * diff(F, x, tab) -
                  q.eta * diff(F, u, tab) - pr.phi_x * diff(F, u_x, tab);

    // Restrict to solutions: u_tx = D_x(u_xx + F), then u_t = u_xx + F.
    ExprPtr rhs = sym(tab, "u_xx") + F;
    ExprPtr u_tx_sub = sym(tab, "u_xxx") + total_diff(F, 1, tab);
    raw = subst_syms(raw, {{u_tx, u_tx_sub}});
    raw = subst_syms(raw, {{u_t, rhs}});
    return normalize(raw, tab);
}

/// Residual of the reduced determining identity for fields of the class form
///   Q = 2a(t) d/dt + (a'(t) x + b(t)) d/dx + f(t, x, u) d/du:
///   f_t - u_x (a'' x + b') + (f_u - 2a') F
///     = f_xx + 2 u_x f_xu + u_x^2 f_uu + 2a F_t + (a'x + b) F_x + f F_u
///       + f_x F_ux + u_x (f_u - a') F_ux.
/// Coded directly from that identity, independent of the prolongation
/// machinery, so the two routes check each other.
inline ExprPtr determining_residual(const ExprPtr& a, const ExprPtr& b, const ExprPtr& f,
                                    const ExprPtr& F, const SymbolTable& tab) {
    SymbolId t = tab.independents()[0], x = tab.independents()[1], u = tab.dependents()[0];
    SymbolId u_x = tab.id("u_x");
    ExprPtr xs = sym(tab, "x"), ux = sym(tab, "u_x");

    auto dt = [&](const ExprPtr& e) { return diff(e, t, tab); };
    auto dx = [&](const ExprPtr& e) { return diff(e, x, tab); };
    auto du = [&](const ExprPtr& e) { return diff(e, u, tab); };

    ExprPtr ad = dt(a), add = dt(dt(a)), bd = dt(b);
    ExprPtr lhs = dt(f) - ux * (add * xs + bd) + (du(f) - num(2) * ad) * F;
    ExprPtr rhs = dx(dx(f)) + num(2) * ux * du(dx(f)) + ux * ux * du(du(f)) + num(2) * a * dt(F) +
                  (ad * xs + b) * dx(F) + f * du(F) + dx(f) * diff(F, u_x, tab) +
                  ux * (du(f) - ad) * diff(F, u_x, tab);
    return normalize(lhs - rhs, tab);
}

/// Splits an expression, viewed as the numerator polynomial of its reduced
/// form, by monomials in the positive-order jet variables. When
/// `include_u_dependent` is set, order-zero factors that depend on u (u
/// itself, or operator applications whose arguments involve u) also count
/// as key factors; this separates shapes like e^u u_x^2, e^u u_x, e^u.
/// The result maps each canonical key monomial to its coefficient;
/// sum(key * coeff) equals the numerator.
inline std::map<ExprPtr, ExprPtr, ExprLess>
split_by_jet_monomials(const ExprPtr& e, const SymbolTable& tab, bool include_u_dependent = false) {
    Normalizer nz(tab);
    RatPoly r = nz.convert(e);

    auto depends_on_u = [&](const ExprPtr& g) {
        std::set<SymbolId> jets;
        collect_jet_symbols(g, tab, jets);
        return !jets.empty();
    };
    auto is_key_gen = [&](const ExprPtr& g) {
        if (g->kind == ExprKind::Sym) {
            const SymbolInfo& info = tab.info(g->sym);
            if (info.kind == SymbolKind::Jet) return true;
            if (info.kind == SymbolKind::Dependent) return include_u_dependent;
            return false;
        }
        return include_u_dependent && depends_on_u(g);
    };

    std::map<Monomial, Poly, MonoLess> buckets;
    for (const auto& [m, c] : r.num.terms()) {
        Monomial key, rest;
        for (const auto& [g, ex] : m.f)
            (is_key_gen(g) ? key : rest).f.emplace_back(g, ex);
        buckets[key].add_term(std::move(rest), c);
    }
    std::map<ExprPtr, ExprPtr, ExprLess> out;
    for (const auto& [key, coeff] : buckets) {
        Poly kp;
        kp.add_term(key, Rat(1));
        out[nz.back(kp)] = nz.back(coeff);
    }
    return out;
}

} // namespace lieheat

#endif // LIEHEAT_FIELDS_HPP
