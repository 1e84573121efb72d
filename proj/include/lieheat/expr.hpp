#ifndef LIEHEAT_EXPR_HPP
#define LIEHEAT_EXPR_HPP

#include "rational.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace lieheat {

class Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Thrown for all semantic errors raised by kernel operations.
class KernelError : public std::runtime_error {
public:
    explicit KernelError(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown when the structural zero test and the independent numeric
/// evaluation disagree: that is never a property of the input, always a bug.
class KernelBugError : public std::logic_error {
public:
    explicit KernelBugError(const std::string& what) : std::logic_error(what) {}
};

using SymbolId = std::uint32_t;

enum class SymbolKind {
    Independent, ///< t, x
    Dependent,   ///< u (the order-0 jet)
    Jet,         ///< u_t, u_x, u_xx, ... up to total order 3
    Parameter,   ///< lam, q, ... generic transcendental constants
    Sign,        ///< two-valued symbol with s*s -> 1
    Plain        ///< anything else (markers, scratch symbols)
};

struct SymbolInfo {
    std::string name;
    SymbolKind kind = SymbolKind::Plain;
    int dep = -1;         ///< for Jet/Dependent: index into dependents()
    std::vector<int> jet; ///< for Jet/Dependent: derivative counts per independent variable
};

struct AtomInfo {
    std::string name;
    int arity = 1;
    enum class Builtin { None, Ln, Exp, Sqrt, Arctan } builtin = Builtin::None;
    /// Optional algebraic property: (atom applied to its declared args)^2
    /// rewrites to this expression. Used for helper square-root atoms.
    ExprPtr square;
};

/// Rewrite rule for a derivative of a named atom: declares
///   atom^(trigger)(args...) = rhs
/// where `args` are the exact plain symbols the rule's right side is written
/// in; applications to anything else are left alone. Higher derivatives
/// rewrite by differentiating rhs; the derivative order of the rewritten
/// atom strictly decreases, which bounds every rewrite.
struct RewriteRule {
    std::string atom;
    std::vector<int> trigger; ///< multi-index over the atom's argument slots
    ExprPtr rhs;
    std::vector<SymbolId> args; ///< the symbols rhs is written in, slot by slot
};

/// Declares the variables, atoms, parameters and rewrite rules one
/// computation works with. Frozen after declaration; all operations on
/// expressions are pure functions over a frozen table.
class SymbolTable {
public:
    static constexpr int kMaxJetOrder = 3;

    SymbolTable() = default;

    SymbolId declare_independent(const std::string& name) {
        require_open();
        independents_.push_back(intern(name, SymbolKind::Independent));
        return independents_.back();
    }

    /// Declares a dependent variable together with all its jet symbols up to
    /// total order kMaxJetOrder (named e.g. u, u_t, u_x, u_tx, u_xxx).
    SymbolId declare_dependent(const std::string& name) {
        require_open();
        if (independents_.empty())
            throw KernelError("SymbolTable: declare independents before dependents");
        int dep = static_cast<int>(dependents_.size());
        SymbolId base = intern(name, SymbolKind::Dependent);
        symbols_[base].dep = dep;
        symbols_[base].jet.assign(independents_.size(), 0);
        dependents_.push_back(base);
        std::vector<int> mi(independents_.size(), 0);
        declare_jets_rec(name, dep, mi, 0, 0);
        return base;
    }

    SymbolId declare_parameter(const std::string& name) {
        require_open();
        return intern(name, SymbolKind::Parameter);
    }

    SymbolId declare_sign(const std::string& name) {
        require_open();
        return intern(name, SymbolKind::Sign);
    }

    SymbolId declare_plain(const std::string& name) {
        require_open();
        return intern(name, SymbolKind::Plain);
    }

    void declare_atom(const std::string& name, int arity) {
        require_open();
        if (atom_index_.count(name)) throw KernelError("SymbolTable: atom '" + name + "' redeclared");
        if (by_name_.count(name)) throw KernelError("SymbolTable: '" + name + "' already names a symbol");
        AtomInfo a;
        a.name = name;
        a.arity = arity;
        atom_index_[name] = atoms_.size();
        atoms_.push_back(std::move(a));
    }

    /// Declares a helper atom whose square rewrites to `square` (for example
    /// the square-root-of-Tdot helper in equivalence transformations).
    void declare_atom_with_square(const std::string& name, int arity, ExprPtr square) {
        declare_atom(name, arity);
        atoms_.back().square = std::move(square);
    }

    void add_rule(RewriteRule rule) {
        require_open();
        const AtomInfo& a = atom(rule.atom);
        if (static_cast<int>(rule.trigger.size()) != a.arity ||
            static_cast<int>(rule.args.size()) != a.arity)
            throw KernelError("SymbolTable: rule trigger/argument arity mismatch for '" + rule.atom +
                              "'");
        rules_.push_back(std::move(rule));
    }

    void freeze() { frozen_ = true; }
    bool frozen() const { return frozen_; }

    bool has_symbol(const std::string& name) const { return by_name_.count(name) != 0; }
    bool has_atom(const std::string& name) const { return atom_index_.count(name) != 0; }

    SymbolId id(const std::string& name) const {
        auto it = by_name_.find(name);
        if (it == by_name_.end()) throw KernelError("SymbolTable: unknown symbol '" + name + "'");
        return it->second;
    }

    const SymbolInfo& info(SymbolId s) const { return symbols_.at(s); }
    const std::string& name(SymbolId s) const { return symbols_.at(s).name; }

    const AtomInfo& atom(const std::string& name) const {
        auto it = atom_index_.find(name);
        if (it == atom_index_.end()) throw KernelError("SymbolTable: unknown atom '" + name + "'");
        return atoms_[it->second];
    }

    const std::vector<SymbolId>& independents() const { return independents_; }
    const std::vector<SymbolId>& dependents() const { return dependents_; }
    std::size_t symbol_count() const { return symbols_.size(); }

    /// Jet symbol of dependent `dep` with derivative multi-index `mi`
    /// (aligned with independents()). Throws past kMaxJetOrder.
    SymbolId jet(int dep, const std::vector<int>& mi) const {
        int total = 0;
        for (int k : mi) total += k;
        if (total > kMaxJetOrder) throw KernelError("prolongation order exceeded");
        auto it = jets_.find(jet_key(dep, mi));
        if (it == jets_.end()) throw KernelError("SymbolTable: jet symbol not declared");
        return it->second;
    }

    const RewriteRule* find_rule(const std::string& atom_name, const std::vector<int>& dmi) const {
        for (const RewriteRule& r : rules_) {
            if (r.atom != atom_name) continue;
            bool ge = true;
            for (std::size_t i = 0; i < dmi.size(); ++i)
                if (dmi[i] < r.trigger[i]) { ge = false; break; }
            if (ge) return &r;
        }
        return nullptr;
    }

    /// All candidate names, for diagnostics (identifier suggestions).
    std::vector<std::string> all_names() const {
        std::vector<std::string> out;
        for (const auto& s : symbols_) out.push_back(s.name);
        for (const auto& a : atoms_) out.push_back(a.name);
        return out;
    }

private:
    void require_open() const {
        if (frozen_) throw KernelError("SymbolTable: frozen; declarations are closed");
    }

    SymbolId intern(const std::string& name, SymbolKind kind) {
        if (by_name_.count(name)) throw KernelError("SymbolTable: symbol '" + name + "' redeclared");
        if (atom_index_.count(name)) throw KernelError("SymbolTable: '" + name + "' already names an atom");
        SymbolId id = static_cast<SymbolId>(symbols_.size());
        SymbolInfo info;
        info.name = name;
        info.kind = kind;
        symbols_.push_back(std::move(info));
        by_name_[name] = id;
        return id;
    }

    static std::string jet_key(int dep, const std::vector<int>& mi) {
        std::string k = std::to_string(dep);
        for (int v : mi) k += "," + std::to_string(v);
        return k;
    }

    void declare_jets_rec(const std::string& base, int dep, std::vector<int>& mi, std::size_t from,
                          int total) {
        jets_[jet_key(dep, mi)] = total == 0 ? by_name_[base] : make_jet(base, dep, mi);
        if (total == kMaxJetOrder) return;
        for (std::size_t i = from; i < mi.size(); ++i) {
            ++mi[i];
            declare_jets_rec(base, dep, mi, i, total + 1);
            --mi[i];
        }
    }

    SymbolId make_jet(const std::string& base, int dep, const std::vector<int>& mi) {
        std::string name = base + "_";
        for (std::size_t i = 0; i < mi.size(); ++i)
            name.append(static_cast<std::size_t>(mi[i]), symbols_[independents_[i]].name[0]);
        SymbolId id = intern(name, SymbolKind::Jet);
        symbols_[id].dep = dep;
        symbols_[id].jet = mi;
        return id;
    }

    bool frozen_ = false;
    std::vector<SymbolInfo> symbols_;
    std::map<std::string, SymbolId> by_name_;
    std::vector<SymbolId> independents_;
    std::vector<SymbolId> dependents_;
    std::map<std::string, SymbolId> jets_;
    std::vector<AtomInfo> atoms_;
    std::map<std::string, std::size_t> atom_index_;
    std::vector<RewriteRule> rules_;
};

enum class ExprKind { Num, Sym, Atom, Pow, Mul, Add };

/// Immutable expression node. Shared freely; never mutated after creation.
/// Kinds: exact rational constant, symbol, atom application (with an
/// optional derivative multi-index over its argument slots), rational power,
/// product, sum.
class Expr {
public:
    ExprKind kind;
    Rat num;                   ///< Num: value. Pow: exponent.
    SymbolId sym = 0;          ///< Sym
    std::string atom;          ///< Atom: name
    std::vector<int> dmi;      ///< Atom: derivative multi-index (size == args)
    std::vector<ExprPtr> kids; ///< Atom args / Pow{base} / Mul factors / Add terms

    std::size_t hash() const { return hash_; }

    static ExprPtr make_num(Rat v) {
        Expr e(ExprKind::Num);
        e.num = std::move(v);
        return finish(std::move(e));
    }
    static ExprPtr make_sym(SymbolId s) {
        Expr e(ExprKind::Sym);
        e.sym = s;
        return finish(std::move(e));
    }
    static ExprPtr make_atom(std::string name, std::vector<ExprPtr> args, std::vector<int> dmi = {}) {
        Expr e(ExprKind::Atom);
        e.atom = std::move(name);
        if (dmi.empty()) dmi.assign(args.size(), 0);
        if (dmi.size() != args.size()) throw KernelError("Expr: atom derivative index arity mismatch");
        e.kids = std::move(args);
        e.dmi = std::move(dmi);
        return finish(std::move(e));
    }
    static ExprPtr make_pow(ExprPtr base, Rat exp) {
        Expr e(ExprKind::Pow);
        e.kids = {std::move(base)};
        e.num = std::move(exp);
        return finish(std::move(e));
    }
    static ExprPtr make_mul(std::vector<ExprPtr> kids) {
        // Identity folding: a literal zero factor annihilates the product and
        // literal one factors drop out. Derivative trees rely on this to prune
        // chain-rule branches whose inner derivative is zero; without it,
        // rewrite rules on derivative atoms can re-trigger inside dead
        // branches and recurse without bound.
        std::vector<ExprPtr> kept;
        kept.reserve(kids.size());
        for (auto& k : kids) {
            if (k->kind == ExprKind::Num) {
                if (k->num.is_zero()) return make_num(Rat(0));
                if (k->num.is_one()) continue;
            }
            kept.push_back(std::move(k));
        }
        if (kept.empty()) return make_num(Rat(1));
        if (kept.size() == 1) return kept[0];
        Expr e(ExprKind::Mul);
        e.kids = std::move(kept);
        return finish(std::move(e));
    }
    static ExprPtr make_add(std::vector<ExprPtr> kids) {
        std::vector<ExprPtr> kept;
        kept.reserve(kids.size());
        for (auto& k : kids) {
            if (k->kind == ExprKind::Num && k->num.is_zero()) continue;
            kept.push_back(std::move(k));
        }
        if (kept.empty()) return make_num(Rat(0));
        if (kept.size() == 1) return kept[0];
        Expr e(ExprKind::Add);
        e.kids = std::move(kept);
        return finish(std::move(e));
    }

private:
    explicit Expr(ExprKind k) : kind(k) {}

    static ExprPtr finish(Expr&& e) {
        e.compute_hash();
        return std::make_shared<const Expr>(std::move(e));
    }

    void compute_hash() {
        std::size_t h = static_cast<std::size_t>(kind) * 0x9E3779B97F4A7C15ull + 0x2545F4914F6CDD1Dull;
        auto mix = [&h](std::size_t v) {
            h ^= v + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
        };
        switch (kind) {
        case ExprKind::Num: mix(num.hash()); break;
        case ExprKind::Sym: mix(sym); break;
        case ExprKind::Atom: {
            for (char c : atom) mix(static_cast<std::size_t>(c));
            for (int d : dmi) mix(static_cast<std::size_t>(d) + 17);
            for (const auto& k : kids) mix(k->hash());
            break;
        }
        case ExprKind::Pow:
            mix(num.hash());
            mix(kids[0]->hash());
            break;
        case ExprKind::Mul:
        case ExprKind::Add:
            for (const auto& k : kids) mix(k->hash());
            break;
        }
        hash_ = h;
    }

    std::size_t hash_ = 0;
};

/// Deterministic structural total order; pointer identity never matters.
inline int expr_cmp(const ExprPtr& a, const ExprPtr& b) {
    if (a.get() == b.get()) return 0;
    if (a->kind != b->kind)
        return static_cast<int>(a->kind) < static_cast<int>(b->kind) ? -1 : 1;
    auto rat_cmp = [](const Rat& x, const Rat& y) { return x < y ? -1 : (y < x ? 1 : 0); };
    switch (a->kind) {
    case ExprKind::Num: return rat_cmp(a->num, b->num);
    case ExprKind::Sym: return a->sym < b->sym ? -1 : (b->sym < a->sym ? 1 : 0);
    case ExprKind::Atom: {
        if (int c = a->atom.compare(b->atom)) return c < 0 ? -1 : 1;
        if (a->dmi != b->dmi) return a->dmi < b->dmi ? -1 : 1;
        if (a->kids.size() != b->kids.size()) return a->kids.size() < b->kids.size() ? -1 : 1;
        for (std::size_t i = 0; i < a->kids.size(); ++i)
            if (int c = expr_cmp(a->kids[i], b->kids[i])) return c;
        return 0;
    }
    case ExprKind::Pow: {
        if (int c = expr_cmp(a->kids[0], b->kids[0])) return c;
        return rat_cmp(a->num, b->num);
    }
    case ExprKind::Mul:
    case ExprKind::Add: {
        if (a->kids.size() != b->kids.size()) return a->kids.size() < b->kids.size() ? -1 : 1;
        for (std::size_t i = 0; i < a->kids.size(); ++i)
            if (int c = expr_cmp(a->kids[i], b->kids[i])) return c;
        return 0;
    }
    }
    return 0;
}

inline bool expr_eq(const ExprPtr& a, const ExprPtr& b) {
    if (a.get() == b.get()) return true;
    if (a->hash() != b->hash()) return false;
    return expr_cmp(a, b) == 0;
}

// ----- convenience builders ------------------------------------------------

inline ExprPtr num(long n) { return Expr::make_num(Rat(n)); }
inline ExprPtr num(long n, long d) { return Expr::make_num(Rat(n, d)); }
inline ExprPtr num(Rat r) { return Expr::make_num(std::move(r)); }
inline ExprPtr sym(SymbolId s) { return Expr::make_sym(s); }
inline ExprPtr sym(const SymbolTable& tab, const std::string& name) { return Expr::make_sym(tab.id(name)); }

inline ExprPtr operator+(const ExprPtr& a, const ExprPtr& b) { return Expr::make_add({a, b}); }
inline ExprPtr operator*(const ExprPtr& a, const ExprPtr& b) { return Expr::make_mul({a, b}); }
inline ExprPtr operator-(const ExprPtr& a) { return Expr::make_mul({num(-1), a}); }
inline ExprPtr operator-(const ExprPtr& a, const ExprPtr& b) { return a + (-b); }
inline ExprPtr pow(const ExprPtr& b, long e) { return Expr::make_pow(b, Rat(e)); }
inline ExprPtr pow(const ExprPtr& b, Rat e) { return Expr::make_pow(b, std::move(e)); }
inline ExprPtr operator/(const ExprPtr& a, const ExprPtr& b) { return a * Expr::make_pow(b, Rat(-1)); }

inline ExprPtr atom(const std::string& name, std::vector<ExprPtr> args, std::vector<int> dmi = {}) {
    return Expr::make_atom(name, std::move(args), std::move(dmi));
}

// ----- printing -------------------------------------------------------------

namespace detail {
inline void print(std::ostream& os, const ExprPtr& e, const SymbolTable& tab, int parent_prec);

inline bool is_neg_one(const ExprPtr& e) { return e->kind == ExprKind::Num && e->num == Rat(-1); }

inline void print_atom(std::ostream& os, const ExprPtr& e, const SymbolTable& tab) {
    int total = 0;
    for (int d : e->dmi) total += d;
    bool single = e->kids.size() == 1;
    if (total > 0 && single && total <= 3) {
        os << e->atom;
        for (int i = 0; i < total; ++i) os << '\'';
    } else if (total > 0) {
        os << "D[" << e->atom << "(";
        for (std::size_t i = 0; i < e->kids.size(); ++i) {
            if (i) os << ", ";
            print(os, e->kids[i], tab, 0);
        }
        os << ")";
        for (std::size_t i = 0; i < e->dmi.size(); ++i)
            for (int k = 0; k < e->dmi[i]; ++k) os << ", " << (i + 1);
        os << "]";
        return;
    } else {
        os << e->atom;
    }
    os << "(";
    for (std::size_t i = 0; i < e->kids.size(); ++i) {
        if (i) os << ", ";
        print(os, e->kids[i], tab, 0);
    }
    os << ")";
}

// precedence: add 1, mul 2, unary minus 1.5 (treated as mul), pow 3, primary 4
inline void print(std::ostream& os, const ExprPtr& e, const SymbolTable& tab, int parent_prec) {
    switch (e->kind) {
    case ExprKind::Num: {
        bool neg = e->num.sign() < 0;
        bool frac = !e->num.is_integer();
        bool wrap = (neg && parent_prec >= 2) || (frac && parent_prec >= 3);
        if (wrap) os << "(";
        if (frac)
            os << e->num.numerator().str() << "/" << e->num.denominator().str();
        else
            os << e->num.str();
        if (wrap) os << ")";
        break;
    }
    case ExprKind::Sym: os << tab.name(e->sym); break;
    case ExprKind::Atom: print_atom(os, e, tab); break;
    case ExprKind::Pow: {
        if (parent_prec >= 4) os << "(";
        print(os, e->kids[0], tab, 4);
        os << "^";
        if (e->num.is_integer() && e->num.sign() >= 0)
            os << e->num.str();
        else {
            os << "(";
            os << e->num.numerator().str();
            if (!e->num.is_integer()) os << "/" << e->num.denominator().str();
            os << ")";
        }
        if (parent_prec >= 4) os << ")";
        break;
    }
    case ExprKind::Mul: {
        // print a leading -1 factor as unary minus
        std::size_t start = 0;
        bool neg = !e->kids.empty() && is_neg_one(e->kids[0]) && e->kids.size() > 1;
        if (neg) start = 1;
        bool wrap = parent_prec >= 3 || (neg && parent_prec >= 2);
        if (wrap) os << "(";
        if (neg) os << "-";
        for (std::size_t i = start; i < e->kids.size(); ++i) {
            if (i > start) os << "*";
            print(os, e->kids[i], tab, 3);
        }
        if (wrap) os << ")";
        break;
    }
    case ExprKind::Add: {
        if (parent_prec >= 2) os << "(";
        for (std::size_t i = 0; i < e->kids.size(); ++i) {
            if (i) os << " + ";
            print(os, e->kids[i], tab, 2);
        }
        if (parent_prec >= 2) os << ")";
        break;
    }
    }
}
} // namespace detail

inline std::string to_string(const ExprPtr& e, const SymbolTable& tab) {
    std::ostringstream os;
    detail::print(os, e, tab, 0);
    return os.str();
}

} // namespace lieheat

#endif // LIEHEAT_EXPR_HPP
