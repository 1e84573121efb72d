#ifndef LIEHEAT_ALGEBRA_HPP
#define LIEHEAT_ALGEBRA_HPP

#include "fields.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

/// Structure analysis of finite-dimensional real Lie algebras.
///
/// An algebra is given either by a basis of vector fields on (t, x, u) or by
/// an abstract structure-constant tensor. All linear algebra runs over the
/// exact field F of rational functions of the declared parameters; nothing
/// here is ever numeric-approximate.
///
/// The classifier names low-dimensional algebras by the following catalog
/// nomenclature (only nonzero brackets are listed; q, p are real parameters):
///
///   A1            one-dimensional
///   2A1, 3A1, ... abelian of the stated dimension
///   A2.2   : [Q1,Q2] = Q2
///   A3.2   : A2.2 + A1 (central direct summand)
///   A3.3   : [Q1,Q3] = -2 Q2, [Q1,Q2] = Q1, [Q2,Q3] = Q3   (simple, noncompact)
///   A3.4   : [Q1,Q2] = Q3, [Q2,Q3] = Q1, [Q3,Q1] = Q2      (simple, compact)
///   A3.5   : [Q2,Q3] = Q1                                   (nilpotent)
///   A3.6   : [Q1,Q3] = Q1, [Q2,Q3] = Q1 + Q2
///   A3.7   : [Q1,Q3] = Q1, [Q2,Q3] = Q2
///   A3.8   : [Q1,Q3] = Q1, [Q2,Q3] = -Q2
///   A3.9(q): [Q1,Q3] = Q1, [Q2,Q3] = q Q2,        0 < |q| < 1
///   A3.10  : [Q1,Q3] = -Q2, [Q2,Q3] = Q1
///   A3.11(q): [Q1,Q3] = q Q1 - Q2, [Q2,Q3] = Q1 + q Q2,  q > 0
///   A4.1   : [Q2,Q4] = Q1, [Q3,Q4] = Q2
///   A4.2(q): [Q1,Q4] = q Q1, [Q2,Q4] = Q2, [Q3,Q4] = Q2 + Q3,  q != 0
///   A4.3   : [Q1,Q4] = Q1, [Q3,Q4] = Q2
///   A4.4   : [Q1,Q4] = Q1, [Q2,Q4] = Q1 + Q2, [Q3,Q4] = Q2 + Q3
///   A4.5(q,p): [Q1,Q4] = Q1, [Q2,Q4] = q Q2, [Q3,Q4] = p Q3,
///              -1 <= p <= q <= 1, p q != 0
///   A4.6(q,p): [Q1,Q4] = q Q1, [Q2,Q4] = p Q2 - Q3, [Q3,Q4] = Q2 + p Q3,
///              q != 0, p >= 0
///   A4.7   : [Q2,Q3] = Q1, [Q1,Q4] = 2 Q1, [Q2,Q4] = Q2, [Q3,Q4] = Q2 + Q3
///   A4.8(q): [Q2,Q3] = Q1, [Q1,Q4] = (1+q) Q1, [Q2,Q4] = Q2, [Q3,Q4] = q Q3,
///            |q| <= 1
///   A4.9(q): [Q2,Q3] = Q1, [Q1,Q4] = 2q Q1, [Q2,Q4] = q Q2 - Q3,
///            [Q3,Q4] = Q2 + q Q3,  q >= 0
///   A4.10  : [Q1,Q3] = Q1, [Q2,Q3] = Q2, [Q1,Q4] = -Q2, [Q2,Q4] = Q1
///
/// Sums like "A3.5+A1" denote central direct summands split off by the
/// classifier.

namespace lieheat {

// ----- structure-constant tensor ----------------------------------------------

/// Tensor c with [e_i, e_j] = sum_k c(i,j,k) e_k; entries are exact rational
/// functions of the declared parameters (constants when none occur).
struct StructureConstants {
    std::size_t dim = 0;
    std::vector<RatPoly> c; ///< flattened, index (i*dim + j)*dim + k

    static StructureConstants zero(std::size_t n) {
        StructureConstants sc;
        sc.dim = n;
        sc.c.assign(n * n * n, RatPoly::constant(Rat(0)));
        return sc;
    }

    const RatPoly& at(std::size_t i, std::size_t j, std::size_t k) const {
        return c[(i * dim + j) * dim + k];
    }
    RatPoly& at(std::size_t i, std::size_t j, std::size_t k) {
        return c[(i * dim + j) * dim + k];
    }

    bool has_parameters() const {
        for (const auto& e : c)
            if (!e.is_constant()) return true;
        return false;
    }
};

/// One term "coeff * Q_k" on the right-hand side of a bracket relation.
/// Indices are 1-based, matching the printed form [Q_i, Q_j] = ... .
struct BracketTerm {
    std::size_t k;
    ExprPtr coeff;
};

/// [Q_i, Q_j] = sum of terms (1-based indices, i != j).
struct BracketRelation {
    std::size_t i, j;
    std::vector<BracketTerm> terms;
};

/// Builds the antisymmetric tensor from a list of nonzero brackets. The
/// coefficients may involve declared parameters but no geometric variables.
inline StructureConstants abstract_algebra(std::size_t n,
                                           const std::vector<BracketRelation>& rels,
                                           const SymbolTable& tab) {
    Normalizer nz(tab);
    StructureConstants sc = StructureConstants::zero(n);
    std::vector<bool> seen(n * n, false);
    for (const auto& r : rels) {
        if (r.i < 1 || r.i > n || r.j < 1 || r.j > n || r.i == r.j)
            throw KernelError("abstract_algebra: bracket indices out of range");
        std::size_t i = r.i - 1, j = r.j - 1;
        if (seen[i * n + j]) throw KernelError("abstract_algebra: duplicate bracket relation");
        seen[i * n + j] = seen[j * n + i] = true;
        for (const auto& t : r.terms) {
            if (t.k < 1 || t.k > n)
                throw KernelError("abstract_algebra: basis index out of range");
            RatPoly v = nz.convert(t.coeff);
            sc.at(i, j, t.k - 1) = sc.at(i, j, t.k - 1).add(v, nz);
            sc.at(j, i, t.k - 1) = sc.at(j, i, t.k - 1).sub(v, nz);
        }
    }
    return sc;
}

// ----- exact linear algebra over the parameter field ---------------------------

using FVec = std::vector<RatPoly>;
using FMat = std::vector<FVec>;

namespace detail {

inline FVec fvec_zero(std::size_t n) { return FVec(n, RatPoly::constant(Rat(0))); }

inline FVec fvec_unit(std::size_t n, std::size_t i) {
    FVec v = fvec_zero(n);
    v[i] = RatPoly::constant(Rat(1));
    return v;
}

inline bool fvec_is_zero(const FVec& v) {
    for (const auto& e : v)
        if (!e.is_zero()) return false;
    return true;
}

/// In-place reduction to reduced row echelon form; zero rows are dropped.
/// Returns the pivot column of each remaining row, in order.
inline std::vector<std::size_t> rref(FMat& m, const Relations& rel) {
    std::vector<std::size_t> pivots;
    if (m.empty()) return pivots;
    std::size_t cols = m[0].size(), row = 0;
    for (std::size_t col = 0; col < cols && row < m.size(); ++col) {
        std::size_t sel = row;
        while (sel < m.size() && m[sel][col].is_zero()) ++sel;
        if (sel == m.size()) continue;
        std::swap(m[row], m[sel]);
        RatPoly inv = m[row][col].inv(rel);
        for (auto& e : m[row]) e = e.mul(inv, rel);
        for (std::size_t r = 0; r < m.size(); ++r) {
            if (r == row || m[r][col].is_zero()) continue;
            RatPoly f = m[r][col];
            for (std::size_t cidx = 0; cidx < cols; ++cidx)
                m[r][cidx] = m[r][cidx].sub(f.mul(m[row][cidx], rel), rel);
        }
        pivots.push_back(col);
        ++row;
    }
    m.resize(row, FVec());
    return pivots;
}

inline std::size_t rank(FMat m, const Relations& rel) { return rref(m, rel).size(); }

/// Basis of { x : M x = 0 } for an m-row, `cols`-column matrix.
inline FMat nullspace(FMat m, std::size_t cols, const Relations& rel) {
    std::vector<std::size_t> pivots = rref(m, rel);
    std::vector<bool> is_pivot(cols, false);
    for (std::size_t p : pivots) is_pivot[p] = true;
    FMat basis;
    for (std::size_t f = 0; f < cols; ++f) {
        if (is_pivot[f]) continue;
        FVec v = fvec_zero(cols);
        v[f] = RatPoly::constant(Rat(1));
        for (std::size_t r = 0; r < pivots.size(); ++r)
            v[pivots[r]] = m[r][f].neg();
        basis.push_back(std::move(v));
    }
    return basis;
}

/// Subspace of F^n maintained as reduced row echelon rows.
struct Subspace {
    std::size_t ambient = 0;
    FMat rows;
    std::vector<std::size_t> pivots;

    explicit Subspace(std::size_t n) : ambient(n) {}

    static Subspace full(std::size_t n, const Relations&) {
        Subspace s(n);
        for (std::size_t i = 0; i < n; ++i) {
            s.rows.push_back(fvec_unit(n, i));
            s.pivots.push_back(i);
        }
        return s;
    }

    std::size_t dim() const { return rows.size(); }

    FVec residual(FVec v, const Relations& rel) const {
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (v[pivots[r]].is_zero()) continue;
            RatPoly f = v[pivots[r]];
            for (std::size_t c = 0; c < ambient; ++c)
                v[c] = v[c].sub(f.mul(rows[r][c], rel), rel);
        }
        return v;
    }

    bool contains(const FVec& v, const Relations& rel) const {
        return fvec_is_zero(residual(v, rel));
    }

    /// Adds v to the span; returns true when the dimension grew.
    bool insert(const FVec& v, const Relations& rel) {
        FVec r = residual(v, rel);
        std::size_t p = 0;
        while (p < ambient && r[p].is_zero()) ++p;
        if (p == ambient) return false;
        RatPoly inv = r[p].inv(rel);
        for (auto& e : r) e = e.mul(inv, rel);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i][p].is_zero()) continue;
            RatPoly f = rows[i][p];
            for (std::size_t c = 0; c < ambient; ++c)
                rows[i][c] = rows[i][c].sub(f.mul(r[c], rel), rel);
        }
        std::size_t pos = 0;
        while (pos < pivots.size() && pivots[pos] < p) ++pos;
        rows.insert(rows.begin() + static_cast<std::ptrdiff_t>(pos), std::move(r));
        pivots.insert(pivots.begin() + static_cast<std::ptrdiff_t>(pos), p);
        return true;
    }

    /// Coordinates of v in this subspace's row basis; errors when v is
    /// outside the span.
    FVec coords(const FVec& v, const Relations& rel) const {
        if (!contains(v, rel))
            throw KernelBugError("Subspace::coords: vector lies outside the subspace");
        FVec out;
        out.reserve(rows.size());
        for (std::size_t r = 0; r < rows.size(); ++r) out.push_back(v[pivots[r]]);
        return out;
    }
};

/// Intersection of two subspaces, via the nullspace of the stacked
/// column matrix [U^T | -V^T].
inline Subspace intersect(const Subspace& a, const Subspace& b, const Relations& rel) {
    std::size_t n = a.ambient;
    FMat m(n, fvec_zero(a.dim() + b.dim()));
    for (std::size_t c = 0; c < a.dim(); ++c)
        for (std::size_t r = 0; r < n; ++r) m[r][c] = a.rows[c][r];
    for (std::size_t c = 0; c < b.dim(); ++c)
        for (std::size_t r = 0; r < n; ++r) m[r][a.dim() + c] = b.rows[c][r].neg();
    FMat null = nullspace(std::move(m), a.dim() + b.dim(), rel);
    Subspace out(n);
    for (const auto& coeffs : null) {
        FVec v = fvec_zero(n);
        for (std::size_t c = 0; c < a.dim(); ++c)
            for (std::size_t r = 0; r < n; ++r)
                v[r] = v[r].add(coeffs[c].mul(a.rows[c][r], rel), rel);
        out.insert(v, rel);
    }
    return out;
}

} // namespace detail

/// Bracket of coordinate vectors: w_k = sum_{i,j} u_i v_j c(i,j,k).
inline FVec bracket_coords(const StructureConstants& sc, const FVec& u, const FVec& v,
                           const Relations& rel) {
    FVec w = detail::fvec_zero(sc.dim);
    for (std::size_t i = 0; i < sc.dim; ++i) {
        if (u[i].is_zero()) continue;
        for (std::size_t j = 0; j < sc.dim; ++j) {
            if (v[j].is_zero()) continue;
            RatPoly uv = u[i].mul(v[j], rel);
            for (std::size_t k = 0; k < sc.dim; ++k) {
                if (sc.at(i, j, k).is_zero()) continue;
                w[k] = w[k].add(uv.mul(sc.at(i, j, k), rel), rel);
            }
        }
    }
    return w;
}

// ----- structure constants from a vector-field basis ---------------------------

namespace detail {

/// True when the expression depends on parameters and signs only (no
/// geometric variables, dependents, or jets anywhere inside).
inline bool param_only(const ExprPtr& e, const SymbolTable& tab) {
    switch (e->kind) {
    case ExprKind::Num: return true;
    case ExprKind::Sym: {
        SymbolKind k = tab.info(e->sym).kind;
        return k == SymbolKind::Parameter || k == SymbolKind::Sign || k == SymbolKind::Plain;
    }
    default:
        for (const auto& kid : e->kids)
            if (!param_only(kid, tab)) return false;
        return true;
    }
}

/// Splits a polynomial into buckets keyed by the geometric part of each
/// monomial; the bucket values collect the parameter-only parts.
inline std::map<Monomial, Poly, MonoLess> split_geometric(const Poly& p, const SymbolTable& tab) {
    std::map<Monomial, Poly, MonoLess> out;
    for (const auto& [m, coef] : p.terms()) {
        Monomial geo, par;
        for (const auto& [gen, exp] : m.f) {
            if (param_only(gen, tab))
                par.f.emplace_back(gen, exp);
            else
                geo.f.emplace_back(gen, exp);
        }
        out[geo].add_term(par, coef);
    }
    return out;
}

/// Appends the linear conditions "sum_k c_k A_k = B identically in the
/// geometric variables" as rows over the parameter field. Each row is one
/// geometric monomial of one component.
inline void append_component_rows(const std::vector<RatPoly>& A, const RatPoly& B,
                                  const SymbolTable& tab, const Normalizer& nz, FMat& m,
                                  FVec& rhs) {
    Poly denom = Poly::constant(Rat(1));
    for (const auto& a : A) denom = denom * a.den;
    denom = denom * B.den;
    RatPoly clear{denom, Poly::constant(Rat(1))};

    auto cleared_num = [&](const RatPoly& r) {
        RatPoly e = r.mul(clear, nz);
        if (!e.den.is_constant())
            throw KernelBugError("structure_constants: denominator survived clearing");
        return e.num.scaled(Rat(1) / e.den.constant_value());
    };

    std::vector<std::map<Monomial, Poly, MonoLess>> cols;
    cols.reserve(A.size());
    for (const auto& a : A) cols.push_back(split_geometric(cleared_num(a), tab));
    std::map<Monomial, Poly, MonoLess> rhs_split = split_geometric(cleared_num(B), tab);

    std::set<Monomial, MonoLess> keys;
    for (const auto& c : cols)
        for (const auto& [k, v] : c) keys.insert(k);
    for (const auto& [k, v] : rhs_split) keys.insert(k);

    for (const auto& key : keys) {
        FVec row;
        row.reserve(A.size());
        for (const auto& c : cols) {
            auto it = c.find(key);
            row.push_back(it == c.end() ? RatPoly::constant(Rat(0))
                                        : RatPoly::make(it->second, Poly::constant(Rat(1)), nz));
        }
        auto it = rhs_split.find(key);
        rhs.push_back(it == rhs_split.end()
                          ? RatPoly::constant(Rat(0))
                          : RatPoly::make(it->second, Poly::constant(Rat(1)), nz));
        m.push_back(std::move(row));
    }
}

inline std::array<RatPoly, 3> field_components(const VectorField& q, const Normalizer& nz) {
    return {nz.convert(q.tau), nz.convert(q.xi), nz.convert(q.eta)};
}

/// Solves M x = rhs over the parameter field; x has `unknowns` entries.
/// Returns nothing when the system is inconsistent; throws when the solution
/// is not unique.
inline std::optional<FVec> solve_unique(FMat m, FVec rhs, std::size_t unknowns,
                                        const Relations& rel) {
    for (std::size_t r = 0; r < m.size(); ++r) m[r].push_back(rhs[r]);
    std::vector<std::size_t> pivots = rref(m, rel);
    for (std::size_t p : pivots)
        if (p == unknowns) return std::nullopt; // a row reads 0 = 1
    if (pivots.size() < unknowns)
        throw KernelError("structure_constants: basis fields are linearly dependent, so the "
                          "coefficient tensor is not unique");
    FVec x = fvec_zero(unknowns);
    for (std::size_t r = 0; r < pivots.size(); ++r) x[pivots[r]] = m[r][unknowns];
    return x;
}

} // namespace detail

/// Computes the structure constants of a basis of point-symmetry fields.
/// Every pairwise commutator must lie in the exact span of the basis over
/// the parameter field; otherwise "not closed under bracket" is reported
/// with the offending pair and the escaped field.
inline StructureConstants structure_constants(const std::vector<VectorField>& basis,
                                              const SymbolTable& tab) {
    if (basis.empty()) throw KernelError("structure_constants: empty basis");
    Normalizer nz(tab);
    std::size_t n = basis.size();

    std::vector<std::array<RatPoly, 3>> comp;
    comp.reserve(n);
    for (const auto& q : basis) comp.push_back(detail::field_components(q, nz));

    auto build_rows = [&](const std::array<RatPoly, 3>& target, FMat& m, FVec& rhs) {
        for (int c = 0; c < 3; ++c) {
            std::vector<RatPoly> col;
            col.reserve(n);
            for (std::size_t k = 0; k < n; ++k) col.push_back(comp[k][c]);
            detail::append_component_rows(col, target[c], tab, nz, m, rhs);
        }
    };

    // independence of the basis itself (uniqueness of all later solves)
    {
        FMat m;
        FVec rhs;
        build_rows({RatPoly::constant(Rat(0)), RatPoly::constant(Rat(0)),
                    RatPoly::constant(Rat(0))},
                   m, rhs);
        if (detail::rank(std::move(m), nz) < n)
            throw KernelError("structure_constants: basis fields are linearly dependent, so the "
                              "coefficient tensor is not unique");
    }

    StructureConstants sc = StructureConstants::zero(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            VectorField br = commutator(basis[i], basis[j], tab);
            FMat m;
            FVec rhs;
            build_rows(detail::field_components(br, nz), m, rhs);
            std::optional<FVec> sol = detail::solve_unique(std::move(m), std::move(rhs), n, nz);
            if (!sol) {
                throw KernelError(
                    "not closed under bracket: [Q_" + std::to_string(i + 1) + ", Q_" +
                    std::to_string(j + 1) + "] = (" + to_string(br.tau, tab) + ", " +
                    to_string(br.xi, tab) + ", " + to_string(br.eta, tab) +
                    ") is not in the span of the basis");
            }
            for (std::size_t k = 0; k < n; ++k) {
                sc.at(i, j, k) = (*sol)[k];
                sc.at(j, i, k) = (*sol)[k].neg();
            }
        }
    }
    return sc;
}

// ----- invariants ---------------------------------------------------------------

/// True iff the Jacobi identity holds for all basis triples.
inline bool jacobi_check(const StructureConstants& sc, const SymbolTable& tab) {
    Normalizer nz(tab);
    std::size_t n = sc.dim;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            for (std::size_t k = j + 1; k < n; ++k) {
                FVec ei = detail::fvec_unit(n, i), ej = detail::fvec_unit(n, j),
                     ek = detail::fvec_unit(n, k);
                FVec s = bracket_coords(sc, bracket_coords(sc, ei, ej, nz), ek, nz);
                FVec t = bracket_coords(sc, bracket_coords(sc, ej, ek, nz), ei, nz);
                FVec u = bracket_coords(sc, bracket_coords(sc, ek, ei, nz), ej, nz);
                for (std::size_t l = 0; l < n; ++l) {
                    RatPoly sum = s[l].add(t[l], nz).add(u[l], nz);
                    if (!sum.is_zero()) return false;
                }
            }
        }
    }
    return true;
}

namespace detail {

inline Subspace bracket_span(const StructureConstants& sc, const Subspace& a, const Subspace& b,
                             const Relations& rel) {
    Subspace out(sc.dim);
    for (const auto& u : a.rows)
        for (const auto& v : b.rows) out.insert(bracket_coords(sc, u, v, rel), rel);
    return out;
}

} // namespace detail

/// Dimensions of L, [L,L], [[L,L],[L,L]], ... until 0 or stabilization.
inline std::vector<std::size_t> derived_series(const StructureConstants& sc,
                                               const SymbolTable& tab) {
    Normalizer nz(tab);
    detail::Subspace cur = detail::Subspace::full(sc.dim, nz);
    std::vector<std::size_t> dims{sc.dim};
    for (;;) {
        detail::Subspace next = detail::bracket_span(sc, cur, cur, nz);
        dims.push_back(next.dim());
        if (next.dim() == 0 || next.dim() == cur.dim()) break;
        cur = std::move(next);
    }
    return dims;
}

/// Dimensions of L, [L,L], [L,[L,L]], ... until 0 or stabilization.
inline std::vector<std::size_t> lower_central_series(const StructureConstants& sc,
                                                     const SymbolTable& tab) {
    Normalizer nz(tab);
    detail::Subspace full = detail::Subspace::full(sc.dim, nz);
    detail::Subspace cur = full;
    std::vector<std::size_t> dims{sc.dim};
    for (;;) {
        detail::Subspace next = detail::bracket_span(sc, full, cur, nz);
        dims.push_back(next.dim());
        if (next.dim() == 0 || next.dim() == cur.dim()) break;
        cur = std::move(next);
    }
    return dims;
}

namespace detail {

inline Subspace center_subspace(const StructureConstants& sc, const Relations& rel) {
    std::size_t n = sc.dim;
    FMat m;
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < n; ++k) {
            FVec row = fvec_zero(n);
            for (std::size_t i = 0; i < n; ++i) row[i] = sc.at(i, j, k);
            m.push_back(std::move(row));
        }
    }
    FMat null = nullspace(std::move(m), n, rel);
    Subspace out(n);
    for (auto& v : null) out.insert(v, rel);
    return out;
}

/// Killing matrix K(a,b) = tr(ad e_a . ad e_b) over the parameter field.
inline FMat killing_matrix(const StructureConstants& sc, const Relations& rel) {
    std::size_t n = sc.dim;
    FMat k(n, fvec_zero(n));
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a; b < n; ++b) {
            RatPoly acc = RatPoly::constant(Rat(0));
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    acc = acc.add(sc.at(a, j, i).mul(sc.at(b, i, j), rel), rel);
            k[a][b] = acc;
            k[b][a] = std::move(acc);
        }
    }
    return k;
}

} // namespace detail

/// Center dimension.
inline std::size_t center_dim(const StructureConstants& sc, const SymbolTable& tab) {
    Normalizer nz(tab);
    return detail::center_subspace(sc, nz).dim();
}

/// Killing form of a parameter-free tensor, with exact rank and signature
/// obtained by congruent diagonalization over the rationals.
struct KillingData {
    std::vector<std::vector<Rat>> matrix;
    int rank = 0;
    int positive = 0; ///< inertia: count of positive squares
    int negative = 0; ///< inertia: count of negative squares
};

inline KillingData killing_form(const StructureConstants& sc, const SymbolTable& tab) {
    if (sc.has_parameters())
        throw KernelError("killing_form: symbolic parameters present; instantiate them first");
    Normalizer nz(tab);
    FMat kf = detail::killing_matrix(sc, nz);
    std::size_t n = sc.dim;
    KillingData out;
    out.matrix.assign(n, std::vector<Rat>(n, Rat(0)));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) out.matrix[i][j] = kf[i][j].constant_value();

    // congruent diagonalization: A -> S A S^T step by step
    std::vector<std::vector<Rat>> a = out.matrix;
    auto add_row_col = [&](std::size_t dst, std::size_t src, const Rat& f) {
        for (std::size_t c = 0; c < n; ++c) a[dst][c] = a[dst][c] + f * a[src][c];
        for (std::size_t r = 0; r < n; ++r) a[r][dst] = a[r][dst] + f * a[r][src];
    };
    auto swap_row_col = [&](std::size_t i, std::size_t j) {
        std::swap(a[i], a[j]);
        for (std::size_t r = 0; r < n; ++r) std::swap(a[r][i], a[r][j]);
    };
    for (std::size_t i = 0; i < n; ++i) {
        if (a[i][i].is_zero()) {
            for (std::size_t j = i + 1; j < n; ++j)
                if (!a[j][j].is_zero()) {
                    swap_row_col(i, j);
                    break;
                }
        }
        if (a[i][i].is_zero()) {
            for (std::size_t j = i + 1; j < n; ++j)
                if (!a[i][j].is_zero()) {
                    add_row_col(i, j, Rat(1));
                    break;
                }
        }
        if (a[i][i].is_zero()) continue;
        for (std::size_t j = i + 1; j < n; ++j) {
            if (a[i][j].is_zero()) continue;
            add_row_col(j, i, -(a[i][j] / a[i][i]));
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        int s = a[i][i].sign();
        if (s > 0) ++out.positive;
        if (s < 0) ++out.negative;
    }
    out.rank = out.positive + out.negative;
    return out;
}

namespace detail {

/// Radical = Killing-orthogonal complement of the derived algebra
/// (Cartan's solvability criterion).
inline Subspace radical_subspace(const StructureConstants& sc, const Relations& rel) {
    std::size_t n = sc.dim;
    Subspace full = Subspace::full(n, rel);
    Subspace derived = bracket_span(sc, full, full, rel);
    FMat kf = killing_matrix(sc, rel);
    FMat m;
    for (const auto& d : derived.rows) {
        FVec row = fvec_zero(n);
        for (std::size_t i = 0; i < n; ++i) {
            RatPoly acc = RatPoly::constant(Rat(0));
            for (std::size_t j = 0; j < n; ++j) acc = acc.add(kf[i][j].mul(d[j], rel), rel);
            row[i] = std::move(acc);
        }
        m.push_back(std::move(row));
    }
    FMat null = m.empty() ? Subspace::full(n, rel).rows : nullspace(std::move(m), n, rel);
    Subspace out(n);
    for (auto& v : null) out.insert(v, rel);
    return out;
}

inline bool subspace_nilpotent(const StructureConstants& sc, const Subspace& s,
                               const Relations& rel) {
    Subspace cur = s;
    for (;;) {
        Subspace next = bracket_span(sc, s, cur, rel);
        if (next.dim() == 0) return true;
        if (next.dim() == cur.dim()) return false;
        cur = std::move(next);
    }
}

/// Nilradical as the intersection of the radical with the Killing-orthogonal
/// complement of the whole algebra. The nilradical is always contained in
/// that intersection; when the intersection is itself a nilpotent ideal the
/// two coincide, which is verified here rather than assumed.
inline Subspace nilradical_subspace(const StructureConstants& sc, const Relations& rel) {
    std::size_t n = sc.dim;
    Subspace full = Subspace::full(n, rel);
    if (subspace_nilpotent(sc, full, rel)) return full;

    Subspace rad = radical_subspace(sc, rel);
    FMat kf = killing_matrix(sc, rel);
    FMat null = nullspace(std::move(kf), n, rel);
    Subspace perp(n);
    for (auto& v : null) perp.insert(v, rel);
    Subspace cand = intersect(rad, perp, rel);

    for (std::size_t i = 0; i < n; ++i)
        for (const auto& v : cand.rows)
            if (!cand.contains(bracket_coords(sc, fvec_unit(n, i), v, rel), rel))
                throw KernelBugError("nilradical: candidate subspace is not an ideal");
    if (!subspace_nilpotent(sc, cand, rel))
        throw KernelError("nilradical: the Killing-orthogonal candidate is not nilpotent; "
                          "this tensor is outside the method's scope");
    return cand;
}

} // namespace detail

inline std::size_t nilradical_dim(const StructureConstants& sc, const SymbolTable& tab) {
    Normalizer nz(tab);
    return detail::nilradical_subspace(sc, nz).dim();
}

// ----- parameter instantiation and basis change --------------------------------

/// Substitutes rational values for parameter symbols in every entry.
inline StructureConstants instantiate_parameters(const StructureConstants& sc,
                                                 const std::map<SymbolId, ExprPtr>& values,
                                                 const SymbolTable& tab) {
    Normalizer nz(tab);
    StructureConstants out = StructureConstants::zero(sc.dim);
    for (std::size_t idx = 0; idx < sc.c.size(); ++idx)
        out.c[idx] = nz.convert(subst_syms(nz.back(sc.c[idx]), values));
    return out;
}

/// Rewrites the tensor in the basis f_a = sum_i S[a][i] e_i; S must be
/// invertible over the rationals.
inline StructureConstants transform_tensor(const StructureConstants& sc,
                                           const std::vector<std::vector<Rat>>& S,
                                           const SymbolTable& tab) {
    Normalizer nz(tab);
    std::size_t n = sc.dim;
    if (S.size() != n) throw KernelError("transform_tensor: matrix size mismatch");

    // exact inverse by Gauss-Jordan over the rationals
    std::vector<std::vector<Rat>> a(n, std::vector<Rat>(2 * n, Rat(0)));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) a[i][j] = S[i][j];
        a[i][n + i] = Rat(1);
    }
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t sel = col;
        while (sel < n && a[sel][col].is_zero()) ++sel;
        if (sel == n) throw KernelError("transform_tensor: matrix is singular");
        std::swap(a[col], a[sel]);
        Rat inv = Rat(1) / a[col][col];
        for (auto& e : a[col]) e = e * inv;
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col || a[r][col].is_zero()) continue;
            Rat f = a[r][col];
            for (std::size_t c = 0; c < 2 * n; ++c) a[r][c] = a[r][c] - f * a[col][c];
        }
    }
    std::vector<std::vector<Rat>> T(n, std::vector<Rat>(n, Rat(0))); // T = S^-1
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) T[i][j] = a[i][n + j];

    StructureConstants out = StructureConstants::zero(n);
    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t q = 0; q < n; ++q) {
            // bracket [f_p, f_q] in the old basis
            FVec w = detail::fvec_zero(n);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) {
                    Rat f = S[p][i] * S[q][j];
                    if (f.is_zero()) continue;
                    for (std::size_t k = 0; k < n; ++k) {
                        if (sc.at(i, j, k).is_zero()) continue;
                        w[k] = w[k].add(sc.at(i, j, k).mul(RatPoly::constant(f), nz), nz);
                    }
                }
            for (std::size_t m = 0; m < n; ++m) {
                RatPoly acc = RatPoly::constant(Rat(0));
                for (std::size_t k = 0; k < n; ++k) {
                    if (w[k].is_zero() || T[k][m].is_zero()) continue;
                    acc = acc.add(w[k].mul(RatPoly::constant(T[k][m]), nz), nz);
                }
                out.at(p, q, m) = std::move(acc);
            }
        }
    }
    return out;
}

// ----- classification -----------------------------------------------------------

/// Invariant data of an algebra, plus the label when the invariants pin it
/// down. `label` is empty when no identification was attempted, an exact
/// name when unique, or "ambiguous among {...}" when the fingerprint does
/// not separate candidates. `note` carries exact invariant data for cases
/// with irrational canonical parameters.
struct AlgebraFingerprint {
    std::size_t dim = 0;
    std::vector<std::size_t> derived;
    std::vector<std::size_t> lower_central;
    std::size_t center = 0;
    int killing_rank = 0;
    bool has_signature = false;
    int killing_positive = 0;
    int killing_negative = 0;
    std::size_t nilradical = 0;
    std::string label;
    std::vector<std::pair<std::string, Rat>> params;
    std::string note;
};

namespace detail {

inline Rat rp_const(const RatPoly& r) {
    if (!r.is_constant())
        throw KernelError("classification requires numeric entries; instantiate parameters");
    return r.constant_value();
}

/// The adjoint action of z restricted to an invariant subspace, as a matrix
/// over the subspace's row basis: column a holds coords([s_a, z]).
inline FMat restricted_ad(const StructureConstants& sc, const Subspace& s, const FVec& z,
                          const Relations& rel) {
    FMat m(s.dim(), fvec_zero(s.dim()));
    for (std::size_t a = 0; a < s.dim(); ++a) {
        FVec img = bracket_coords(sc, s.rows[a], z, rel);
        FVec co = s.coords(img, rel);
        for (std::size_t r = 0; r < s.dim(); ++r) m[r][a] = co[r];
    }
    return m;
}

/// First unit vector outside the subspace.
inline FVec complement_unit(const Subspace& s, const Relations& rel) {
    for (std::size_t i = 0; i < s.ambient; ++i) {
        FVec e = fvec_unit(s.ambient, i);
        if (!s.contains(e, rel)) return e;
    }
    throw KernelBugError("complement_unit: subspace is the whole space");
}

/// Rational roots (with multiplicity) of a monic-clearable polynomial with
/// rational coefficients, lowest degree first in `coeffs` (c0 + c1 z + ...).
/// Returns nullopt when divisor enumeration would be unreasonably large.
inline std::optional<std::vector<Rat>> rational_roots(std::vector<Rat> coeffs) {
    while (!coeffs.empty() && coeffs.back().is_zero()) coeffs.pop_back();
    if (coeffs.size() <= 1) return std::vector<Rat>{};
    std::vector<Rat> roots;
    auto divisors_of = [](const Rat& v) -> std::optional<std::vector<long>> {
        long x;
        try {
            x = v.to_long();
        } catch (...) {
            return std::nullopt;
        }
        if (x < 0) x = -x;
        if (x == 0 || x > 1000000000000L) return std::nullopt;
        std::vector<long> out;
        for (long d = 1; d * d <= x; ++d) {
            if (x % d) continue;
            out.push_back(d);
            out.push_back(x / d);
        }
        return out;
    };
    for (;;) {
        std::size_t deg = coeffs.size() - 1;
        if (deg == 0) break;
        // zero roots come off directly
        if (coeffs[0].is_zero()) {
            roots.push_back(Rat(0));
            coeffs.erase(coeffs.begin());
            continue;
        }
        if (deg == 1) {
            roots.push_back(-coeffs[0] / coeffs[1]);
            break;
        }
        // clear denominators to integer coefficients
        Rat scale(1);
        for (const auto& cf : coeffs) {
            Rat d = cf.denominator();
            if (!(d == Rat(1))) scale = scale * d;
        }
        std::vector<Rat> ic;
        ic.reserve(coeffs.size());
        for (const auto& cf : coeffs) ic.push_back(cf * scale);
        auto p_divs = divisors_of(ic[0]);
        auto q_divs = divisors_of(ic.back());
        if (!p_divs || !q_divs) return std::nullopt;
        bool found = false;
        Rat root;
        for (long p : *p_divs) {
            for (long q : *q_divs) {
                for (int sgn : {1, -1}) {
                    Rat cand(sgn * p, q);
                    Rat val(0), pw(1);
                    for (const auto& cf : ic) {
                        val = val + cf * pw;
                        pw = pw * cand;
                    }
                    if (val.is_zero()) {
                        root = cand;
                        found = true;
                        break;
                    }
                }
                if (found) break;
            }
            if (found) break;
        }
        if (!found) break; // remaining factor has no rational root
        roots.push_back(root);
        // synthetic division by (z - root)
        std::vector<Rat> next(deg, Rat(0));
        Rat carry(0);
        for (std::size_t i = deg; i >= 1; --i) {
            carry = coeffs[i] + carry * root;
            next[i - 1] = carry;
        }
        coeffs = std::move(next);
    }
    return roots;
}

inline std::string fmt_rat(const Rat& r) { return r.str(); }

inline std::optional<Rat> sqrt_opt(const Rat& v) {
    Rat out(0);
    if (v.sqrt_exact(out)) return out;
    return std::nullopt;
}

/// Labels for dimension 3. Complete for numeric tensors: the derived
/// dimension splits the list, and within each case the stated invariants
/// separate all members (trace/determinant data of the adjoint action on
/// the derived algebra for the solvable families, Killing signature for the
/// simple ones, centrality of the derived line for A3.2 vs A3.5).
inline void label_dim3(const StructureConstants& sc, const Normalizer& nz, bool numeric,
                       AlgebraFingerprint& f) {
    std::size_t d = f.derived.size() > 1 ? f.derived[1] : 0;
    if (d == 0) {
        f.label = "3A1";
        return;
    }
    if (d == 3) {
        if (!numeric) {
            f.label = "ambiguous among {A3.3, A3.4}";
            f.note = "simple algebra with symbolic parameters; instantiate to fix the real form";
            return;
        }
        if (f.killing_positive == 2 && f.killing_negative == 1) {
            f.label = "A3.3";
            return;
        }
        if (f.killing_positive == 0 && f.killing_negative == 3) {
            f.label = "A3.4";
            return;
        }
        throw KernelBugError("label_dim3: impossible Killing signature for a simple algebra");
    }
    Subspace full = Subspace::full(3, nz);
    Subspace derived = bracket_span(sc, full, full, nz);
    if (d == 1) {
        bool central = true;
        for (std::size_t j = 0; j < 3 && central; ++j)
            central = fvec_is_zero(
                bracket_coords(sc, derived.rows[0], fvec_unit(3, j), nz));
        f.label = central ? "A3.5" : "A3.2";
        return;
    }
    // d == 2: the derived algebra is abelian and the adjoint action of any
    // complement element on it is invertible; both facts follow from the
    // Jacobi identity and are asserted rather than assumed.
    if (!fvec_is_zero(bracket_coords(sc, derived.rows[0], derived.rows[1], nz)))
        throw KernelBugError("label_dim3: two-dimensional derived algebra is not abelian");
    if (!numeric) {
        f.note = "solvable family with symbolic parameters; instantiate to classify";
        return;
    }
    FVec z = complement_unit(derived, nz);
    FMat m = restricted_ad(sc, derived, z, nz);
    Rat m00 = rp_const(m[0][0]), m01 = rp_const(m[0][1]);
    Rat m10 = rp_const(m[1][0]), m11 = rp_const(m[1][1]);
    Rat tr = m00 + m11;
    Rat det = m00 * m11 - m01 * m10;
    if (det.is_zero())
        throw KernelBugError("label_dim3: adjoint action on the derived algebra is singular");
    Rat disc = tr * tr - Rat(4) * det;
    if (tr.is_zero()) {
        f.label = det.sign() > 0 ? "A3.10" : "A3.8";
        return;
    }
    if (disc.is_zero()) {
        // repeated eigenvalue tr/2: diagonal action is A3.7, Jordan is A3.6
        Rat half = tr / Rat(2);
        bool diagonal = (m00 == half) && (m11 == half) && m01.is_zero() && m10.is_zero();
        f.label = diagonal ? "A3.7" : "A3.6";
        return;
    }
    if (disc.sign() > 0) {
        // eigenvalue ratio q with |q| < 1 solves q^2 - s q + 1 = 0, s = tr^2/det - 2
        f.label = "A3.9";
        Rat s = tr * tr / det - Rat(2);
        std::optional<Rat> rt = sqrt_opt(s * s - Rat(4));
        if (rt) {
            Rat q1 = (s - *rt) / Rat(2), q2 = (s + *rt) / Rat(2);
            Rat q = (q1 * q1 < Rat(1)) ? q1 : q2;
            f.params.emplace_back("q", q);
        } else {
            f.note = "eigenvalue ratio q is irrational; exactly, q + 1/q = " + fmt_rat(s);
        }
        return;
    }
    // complex pair: canonical form has eigenvalues q +- i with q > 0
    f.label = "A3.11";
    Rat qsq = tr * tr / (Rat(4) * det - tr * tr);
    std::optional<Rat> q = sqrt_opt(qsq);
    if (q)
        f.params.emplace_back("q", *q);
    else
        f.note = "parameter q is irrational; exactly, q^2 = " + fmt_rat(qsq);
}

inline AlgebraFingerprint classify_impl(const StructureConstants& sc, const SymbolTable& tab);

/// Splits off a central direct summand: a central element outside the
/// derived algebra spans an A1 factor, and any hyperplane ideal containing
/// the derived algebra but not that element is a complement.
inline bool try_central_split(const StructureConstants& sc, const SymbolTable& tab,
                              const Normalizer& nz, AlgebraFingerprint& f) {
    std::size_t n = sc.dim;
    Subspace full = Subspace::full(n, nz);
    Subspace derived = bracket_span(sc, full, full, nz);
    Subspace center = center_subspace(sc, nz);
    FVec z;
    bool found = false;
    for (const auto& v : center.rows)
        if (!derived.contains(v, nz)) {
            z = v;
            found = true;
            break;
        }
    if (!found) return false;

    Subspace ideal = derived;
    Subspace excl = derived;
    excl.insert(z, nz);
    for (std::size_t i = 0; i < n && ideal.dim() < n - 1; ++i) {
        FVec e = fvec_unit(n, i);
        if (excl.contains(e, nz)) continue;
        ideal.insert(e, nz);
        excl.insert(e, nz);
    }
    if (ideal.dim() != n - 1)
        throw KernelBugError("try_central_split: failed to build a complement ideal");

    StructureConstants sub = StructureConstants::zero(n - 1);
    for (std::size_t a = 0; a < n - 1; ++a)
        for (std::size_t b = 0; b < n - 1; ++b) {
            FVec w = bracket_coords(sc, ideal.rows[a], ideal.rows[b], nz);
            FVec co = ideal.coords(w, nz);
            for (std::size_t k = 0; k < n - 1; ++k) sub.at(a, b, k) = co[k];
        }
    AlgebraFingerprint inner = classify_impl(sub, tab);
    if (inner.label.empty() || inner.label.rfind("ambiguous", 0) == 0) return false;
    // fold "kA1 + A1" into "(k+1)A1"
    if (inner.label == "2A1")
        f.label = "3A1";
    else if (inner.label == "3A1")
        f.label = "4A1";
    else if (inner.label == "4A1")
        f.label = "5A1";
    else
        f.label = inner.label + "+A1";
    f.params = inner.params;
    if (!inner.note.empty()) f.note = inner.note;
    return true;
}

/// Labels for dimension 4 solvable tensors with a 3-dimensional nilradical.
inline void label_dim4_nilrad3(const StructureConstants& sc, const Normalizer& nz,
                               AlgebraFingerprint& f, const Subspace& nil) {
    FVec z = complement_unit(nil, nz);
    FMat m = restricted_ad(sc, nil, z, nz);
    bool nil_abelian = true;
    for (std::size_t a = 0; a < 3 && nil_abelian; ++a)
        for (std::size_t b = a + 1; b < 3 && nil_abelian; ++b)
            nil_abelian = fvec_is_zero(bracket_coords(sc, nil.rows[a], nil.rows[b], nz));

    // 3x3 rational matrix of the complement action
    std::vector<std::vector<Rat>> M(3, std::vector<Rat>(3, Rat(0)));
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t c = 0; c < 3; ++c) M[r][c] = rp_const(m[r][c]);

    auto mat_rank = [&](std::vector<std::vector<Rat>> A) {
        std::size_t rank = 0;
        for (std::size_t col = 0; col < 3 && rank < 3; ++col) {
            std::size_t sel = rank;
            while (sel < 3 && A[sel][col].is_zero()) ++sel;
            if (sel == 3) continue;
            std::swap(A[rank], A[sel]);
            for (std::size_t r = 0; r < 3; ++r) {
                if (r == rank || A[r][col].is_zero()) continue;
                Rat fac = A[r][col] / A[rank][col];
                for (std::size_t c = 0; c < 3; ++c) A[r][c] = A[r][c] - fac * A[rank][c];
            }
            ++rank;
        }
        return rank;
    };
    auto shifted = [&](const Rat& lam) {
        std::vector<std::vector<Rat>> A = M;
        for (std::size_t i = 0; i < 3; ++i) A[i][i] = A[i][i] - lam;
        return A;
    };

    if (nil_abelian) {
        // char poly z^3 - tr z^2 + c2 z - det
        Rat tr = M[0][0] + M[1][1] + M[2][2];
        Rat c2 = M[0][0] * M[1][1] - M[0][1] * M[1][0] + M[0][0] * M[2][2] -
                 M[0][2] * M[2][0] + M[1][1] * M[2][2] - M[1][2] * M[2][1];
        Rat det = M[0][0] * (M[1][1] * M[2][2] - M[1][2] * M[2][1]) -
                  M[0][1] * (M[1][0] * M[2][2] - M[1][2] * M[2][0]) +
                  M[0][2] * (M[1][0] * M[2][1] - M[1][1] * M[2][0]);
        auto roots = rational_roots({-det, c2, -tr, Rat(1)});
        if (!roots) {
            f.label = "ambiguous among {A4.5, A4.6}";
            f.note = "eigenvalue extraction exceeded the divisor bound";
            return;
        }
        std::vector<Rat> rs = *roots;
        std::sort(rs.begin(), rs.end(), [](const Rat& a, const Rat& b) { return a < b; });
        if (rs.size() == 3) {
            std::size_t zeros = 0;
            for (const auto& r : rs) zeros += r.is_zero();
            if (zeros == 2) {
                // double zero eigenvalue with a Jordan block (a diagonalizable
                // one would have split off a central A1 already)
                if (mat_rank(M) == 2) {
                    f.label = "A4.3";
                    return;
                }
                throw KernelBugError("label_dim4: unexpected diagonalizable zero pair");
            }
            if (zeros != 0) throw KernelBugError("label_dim4: unexpected single zero eigenvalue");
            if (rs[0] == rs[2]) {
                std::size_t rk = mat_rank(shifted(rs[0]));
                if (rk == 0) {
                    f.label = "A4.5";
                    f.params.emplace_back("q", Rat(1));
                    f.params.emplace_back("p", Rat(1));
                } else if (rk == 1) {
                    f.label = "A4.2";
                    f.params.emplace_back("q", Rat(1));
                } else {
                    f.label = "A4.4";
                }
                return;
            }
            if (rs[0] == rs[1] || rs[1] == rs[2]) {
                Rat rep = (rs[0] == rs[1]) ? rs[0] : rs[2];
                Rat single = (rs[0] == rs[1]) ? rs[2] : rs[0];
                if (mat_rank(shifted(rep)) == 2) {
                    f.label = "A4.2";
                    f.params.emplace_back("q", single / rep);
                    return;
                }
            }
            // diagonalizable with eigenvalues {a, b, c}: scale so that the
            // remaining two ratios lie in [-1, 1]; among valid scalings the
            // lexicographically largest (q, p) is the canonical choice
            f.label = "A4.5";
            bool have = false;
            Rat bq, bp;
            for (const Rat& lam : rs) {
                if (lam.is_zero()) continue;
                std::vector<Rat> ratios;
                bool self_used = false;
                for (const Rat& r : rs) {
                    if (!self_used && r == lam) {
                        self_used = true;
                        continue;
                    }
                    ratios.push_back(r / lam);
                }
                Rat q = std::max(ratios[0], ratios[1]);
                Rat p = std::min(ratios[0], ratios[1]);
                if (q * q <= Rat(1) && p * p <= Rat(1)) {
                    if (!have || q > bq || (q == bq && p > bp)) {
                        bq = q;
                        bp = p;
                        have = true;
                    }
                }
            }
            if (!have) throw KernelBugError("label_dim4: no admissible eigenvalue scaling");
            f.params.emplace_back("q", bq);
            f.params.emplace_back("p", bp);
            return;
        }
        if (rs.size() == 1) {
            // one rational eigenvalue r plus a complex pair mu +- i nu
            Rat r = rs[0];
            if (r.is_zero())
                throw KernelBugError("label_dim4: zero eigenvalue beside a complex pair");
            // deflate: z^3 - tr z^2 + c2 z - det = (z - r)(z^2 - s z + t)
            Rat s = tr - r, t = det / r;
            Rat mu = s / Rat(2);
            Rat nusq = t - mu * mu;
            if (nusq.sign() <= 0) {
                f.label = "ambiguous among {A4.5, A4.6}";
                f.note = "irrational real eigenvalues; exactly, the quadratic factor is z^2 - (" +
                         fmt_rat(s) + ") z + (" + fmt_rat(t) + ")";
                return;
            }
            f.label = "A4.6";
            std::optional<Rat> nu = sqrt_opt(nusq);
            if (!nu) {
                f.note = "parameters are irrational; exactly, the complex pair is mu +- i nu "
                         "with mu = " + fmt_rat(mu) + ", nu^2 = " + fmt_rat(nusq) +
                         ", real eigenvalue " + fmt_rat(r);
                return;
            }
            // scale by 1/nu, flipping the sign so p >= 0; if p == 0 pick q > 0
            Rat q = r / *nu, p = mu / *nu;
            if (p.sign() < 0 || (p.is_zero() && q.sign() < 0)) {
                q = -q;
                p = -p;
            }
            f.params.emplace_back("q", q);
            f.params.emplace_back("p", p);
            return;
        }
        f.label = "ambiguous among {A4.5, A4.6}";
        f.note = "characteristic polynomial has no rational root";
        return;
    }

    // nilradical is the Heisenberg algebra: classify by the induced action
    // on nil / center(nil)
    Subspace nil_center(3);
    {
        // center of the nilradical in its own coordinates
        StructureConstants nsc = StructureConstants::zero(3);
        for (std::size_t a = 0; a < 3; ++a)
            for (std::size_t b = 0; b < 3; ++b) {
                FVec w = bracket_coords(sc, nil.rows[a], nil.rows[b], nz);
                FVec co = nil.coords(w, nz);
                for (std::size_t k = 0; k < 3; ++k) nsc.at(a, b, k) = co[k];
            }
        nil_center = center_subspace(nsc, nz);
    }
    if (nil_center.dim() != 1)
        throw KernelBugError("label_dim4: Heisenberg nilradical without a line center");
    // quotient action on the two non-central coordinates
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < 3; ++i)
        if (i != nil_center.pivots[0]) keep.push_back(i);
    Rat a00 = rp_const(m[keep[0]][keep[0]]), a01 = rp_const(m[keep[0]][keep[1]]);
    Rat a10 = rp_const(m[keep[1]][keep[0]]), a11 = rp_const(m[keep[1]][keep[1]]);
    Rat tr = a00 + a11, det = a00 * a11 - a01 * a10;
    Rat disc = tr * tr - Rat(4) * det;
    if (disc.is_zero()) {
        Rat half = tr / Rat(2);
        if (half.is_zero())
            throw KernelBugError("label_dim4: nilpotent quotient action in a non-nilpotent case");
        bool diagonal = (a00 == half) && (a11 == half) && a01.is_zero() && a10.is_zero();
        if (diagonal) {
            f.label = "A4.8";
            f.params.emplace_back("q", Rat(1));
        } else {
            f.label = "A4.7";
        }
        return;
    }
    if (disc.sign() > 0) {
        f.label = "A4.8";
        std::optional<Rat> rt = sqrt_opt(disc);
        if (!rt) {
            f.note = "parameter q is irrational; exactly, the eigenvalue pair solves z^2 - (" +
                     fmt_rat(tr) + ") z + (" + fmt_rat(det) + ") = 0";
            return;
        }
        Rat l1 = (tr + *rt) / Rat(2), l2 = (tr - *rt) / Rat(2);
        if (l1 * l1 < l2 * l2) std::swap(l1, l2); // |l1| >= |l2|
        if (l1.is_zero()) throw KernelBugError("label_dim4: zero quotient action");
        f.params.emplace_back("q", l2 / l1);
        return;
    }
    f.label = "A4.9";
    Rat qsq = tr * tr / (Rat(4) * det - tr * tr);
    std::optional<Rat> q = sqrt_opt(qsq);
    if (q)
        f.params.emplace_back("q", *q);
    else
        f.note = "parameter q is irrational; exactly, q^2 = " + fmt_rat(qsq);
}

inline void label_dim45(const StructureConstants& sc, const SymbolTable& tab,
                        const Normalizer& nz, bool numeric, AlgebraFingerprint& f) {
    std::size_t n = sc.dim;
    std::size_t d = f.derived.size() > 1 ? f.derived[1] : 0;
    if (d == 0) {
        f.label = n == 4 ? "4A1" : "5A1";
        return;
    }
    if (!numeric) {
        f.note = "symbolic parameters; instantiate to classify";
        return;
    }
    if (try_central_split(sc, tab, nz, f)) return;

    bool solvable = f.derived.back() == 0;
    bool nilpotent = f.lower_central.back() == 0;
    if (!solvable) {
        // a Levi decomposition with central radical is a direct sum
        Subspace rad = radical_subspace(sc, nz);
        Subspace cz = center_subspace(sc, nz);
        if (rad.dim() == cz.dim() && n - rad.dim() == 3) {
            // the central-split path above already handles radical vectors
            // outside the derived algebra, so reaching here means the
            // summand decomposition is not visible; report the data instead
            f.note = "reductive with semisimple part of dimension 3";
        } else {
            f.note = "nonsolvable; Levi subalgebra acts nontrivially on the radical";
        }
        return;
    }
    if (nilpotent) {
        if (n == 4 && f.lower_central == std::vector<std::size_t>{4, 2, 1, 0}) {
            f.label = "A4.1";
            return;
        }
        f.note = "nilpotent";
        return;
    }
    Subspace nil = nilradical_subspace(sc, nz);
    if (n == 4) {
        if (nil.dim() == 3) {
            label_dim4_nilrad3(sc, nz, f, nil);
            return;
        }
        if (nil.dim() == 2) {
            if (f.killing_positive == 1 && f.killing_negative == 1) {
                f.label = "A4.10";
                return;
            }
            if (f.killing_positive == 2 && f.killing_negative == 0) {
                f.label = "A2.2+A2.2";
                return;
            }
            f.note = "solvable, nilradical of dimension 2, unrecognized signature";
            return;
        }
        f.note = "solvable, nilradical of dimension " + std::to_string(nil.dim());
        return;
    }
    // dimension 5, solvable, non-nilpotent, no central summand
    if (nil.dim() == 3) {
        bool nil_abelian = true;
        for (std::size_t a = 0; a < 3 && nil_abelian; ++a)
            for (std::size_t b = a + 1; b < 3 && nil_abelian; ++b)
                nil_abelian = fvec_is_zero(bracket_coords(sc, nil.rows[a], nil.rows[b], nz));
        f.label = nil_abelian ? "ambiguous among {L1, L2, L3, L6, L7}"
                              : "ambiguous among {L4, L5}";
        return;
    }
    f.note = "solvable, nilradical of dimension " + std::to_string(nil.dim());
}

inline AlgebraFingerprint classify_impl(const StructureConstants& sc, const SymbolTable& tab) {
    if (sc.dim == 0 || sc.dim > 5)
        throw KernelError("classification is implemented for dimensions 1 to 5");
    Normalizer nz(tab);
    AlgebraFingerprint f;
    f.dim = sc.dim;
    f.derived = derived_series(sc, tab);
    f.lower_central = lower_central_series(sc, tab);
    f.center = center_dim(sc, tab);
    bool numeric = !sc.has_parameters();
    if (numeric) {
        KillingData k = killing_form(sc, tab);
        f.killing_rank = k.rank;
        f.killing_positive = k.positive;
        f.killing_negative = k.negative;
        f.has_signature = true;
    } else {
        FMat kf = detail::killing_matrix(sc, nz);
        f.killing_rank = static_cast<int>(detail::rank(std::move(kf), nz));
    }
    try {
        f.nilradical = nilradical_dim(sc, tab);
    } catch (const KernelError&) {
        f.nilradical = 0;
        f.note = "nilradical undetermined by the Killing-orthogonal criterion";
    }

    switch (sc.dim) {
    case 1: f.label = "A1"; break;
    case 2: {
        std::size_t d = f.derived.size() > 1 ? f.derived[1] : 0;
        f.label = d == 0 ? "2A1" : "A2.2";
        break;
    }
    case 3: label_dim3(sc, nz, numeric, f); break;
    default: label_dim45(sc, tab, nz, numeric, f); break;
    }
    return f;
}

} // namespace detail

/// Computes the invariant fingerprint and, where the invariants decide it,
/// the catalog label. Dimensions 1-3 are labeled completely (for numeric
/// tensors); dimensions 4-5 get a best-effort label with ambiguity reported
/// explicitly, never guessed.
inline AlgebraFingerprint classify(const StructureConstants& sc, const SymbolTable& tab) {
    return detail::classify_impl(sc, tab);
}

} // namespace lieheat

#endif // LIEHEAT_ALGEBRA_HPP
