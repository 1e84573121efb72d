#ifndef LIEHEAT_PARSE_HPP
#define LIEHEAT_PARSE_HPP

#include "expr.hpp"

#include <cctype>
#include <string>
#include <vector>

namespace lieheat {

/// Half-open byte range into the source string, for diagnostics.
struct SourceSpan {
    std::size_t begin = 0;
    std::size_t end = 0;
};

class ParseError : public std::runtime_error {
public:
    ParseError(std::string message, SourceSpan span, std::string source)
        : std::runtime_error(message), span_(span), source_(std::move(source)) {}

    const SourceSpan& span() const { return span_; }

    /// Two-line rendering: the source and a caret marker under the span.
    std::string pretty() const {
        std::string out = source_ + "\n";
        for (std::size_t i = 0; i < span_.begin; ++i) out += ' ';
        out += '^';
        for (std::size_t i = span_.begin + 1; i < span_.end; ++i) out += '~';
        out += "  ";
        out += what();
        return out;
    }

private:
    SourceSpan span_;
    std::string source_;
};

namespace detail {

inline std::size_t edit_distance(const std::string& a, const std::string& b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

inline std::string suggest(const std::string& name, const SymbolTable& tab) {
    std::string best;
    std::size_t best_d = 3; // suggest only within edit distance 2
    for (const std::string& cand : tab.all_names()) {
        std::size_t d = edit_distance(name, cand);
        if (d < best_d) {
            best_d = d;
            best = cand;
        }
    }
    return best;
}

enum class Tok { Num, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, LBrack, RBrack, Comma, Prime, End };

struct Token {
    Tok kind;
    std::string text;
    SourceSpan span;
};

class Lexer {
public:
    Lexer(const std::string& src) : src_(src) {}

    Token next() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        std::size_t start = pos_;
        if (pos_ >= src_.size()) return {Tok::End, "", {start, start}};
        char c = src_[pos_];
        auto one = [&](Tok k) {
            ++pos_;
            return Token{k, std::string(1, c), {start, pos_}};
        };
        switch (c) {
        case '+': return one(Tok::Plus);
        case '-': return one(Tok::Minus);
        case '*': return one(Tok::Star);
        case '/': return one(Tok::Slash);
        case '^': return one(Tok::Caret);
        case '(': return one(Tok::LParen);
        case ')': return one(Tok::RParen);
        case '[': return one(Tok::LBrack);
        case ']': return one(Tok::RBrack);
        case ',': return one(Tok::Comma);
        case '\'': return one(Tok::Prime);
        default: break;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
            if (pos_ < src_.size() && src_[pos_] == '.') {
                std::size_t dot = pos_;
                ++pos_;
                std::size_t frac = pos_;
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
                if (pos_ == frac)
                    throw ParseError("a decimal point needs digits after it", {start, pos_}, src_);
                // decimals are read exactly: digits over the matching power of ten
                std::string text = src_.substr(start, dot - start) +
                                   src_.substr(frac, pos_ - frac) + "/1" +
                                   std::string(pos_ - frac, '0');
                return {Tok::Num, text, {start, pos_}};
            }
            return {Tok::Num, src_.substr(start, pos_ - start), {start, pos_}};
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                ++pos_;
            return {Tok::Ident, src_.substr(start, pos_ - start), {start, pos_}};
        }
        throw ParseError(std::string("unexpected character '") + c + "'", {start, start + 1}, src_);
    }

private:
    const std::string& src_;
    std::size_t pos_ = 0;
};

/// Recursive-descent parser with precedence climbing.
/// Binding powers: + - (10), * / (20), unary minus (25), ^ (30, right
/// associative, binding tighter than unary minus: -x^2 is -(x^2)).
class Parser {
public:
    Parser(const std::string& src, const SymbolTable& tab) : src_(src), tab_(tab), lex_(src) {
        advance();
    }

    ExprPtr parse() {
        ExprPtr e = expression(0);
        if (cur_.kind != Tok::End) throw err("expected end of input or an operator", cur_.span);
        return e;
    }

private:
    ParseError err(const std::string& msg, SourceSpan span) const { return ParseError(msg, span, src_); }

    void advance() { cur_ = lex_.next(); }

    bool accept(Tok k) {
        if (cur_.kind != k) return false;
        advance();
        return true;
    }

    Token expect(Tok k, const std::string& what) {
        if (cur_.kind != k) throw err("expected " + what, cur_.span);
        Token t = cur_;
        advance();
        return t;
    }

    static int precedence_of(Tok k) {
        switch (k) {
        case Tok::Plus:
        case Tok::Minus: return 10;
        case Tok::Star:
        case Tok::Slash: return 20;
        case Tok::Caret: return 30;
        default: return -1;
        }
    }

    ExprPtr expression(int min_bp) {
        ExprPtr lhs;
        if (cur_.kind == Tok::Minus) {
            Token m = cur_;
            advance();
            // unary minus binds looser than ^ and tighter than * /
            lhs = -expression(26);
        } else {
            lhs = primary();
        }
        while (true) {
            int bp = precedence_of(cur_.kind);
            if (bp < 0 || bp < min_bp) break;
            Tok op = cur_.kind;
            Token opt = cur_;
            advance();
            if (op == Tok::Caret) {
                // right associative
                ExprPtr rhs = (cur_.kind == Tok::Minus) ? [&] {
                    advance();
                    return -expression(30);
                }() : expression(30);
                lhs = make_power(lhs, rhs, opt.span);
            } else {
                ExprPtr rhs = expression(bp + 1);
                switch (op) {
                case Tok::Plus: lhs = lhs + rhs; break;
                case Tok::Minus: lhs = lhs - rhs; break;
                case Tok::Star: lhs = lhs * rhs; break;
                case Tok::Slash: lhs = lhs / rhs; break;
                default: break;
                }
            }
        }
        return lhs;
    }

    /// Exact constant folding of an exponent expression; nullopt when it
    /// involves symbols or anything non-arithmetic.
    static std::optional<Rat> fold_const(const ExprPtr& e) {
        switch (e->kind) {
        case ExprKind::Num: return e->num;
        case ExprKind::Add: {
            Rat acc(0);
            for (const auto& k : e->kids) {
                auto v = fold_const(k);
                if (!v) return std::nullopt;
                acc += *v;
            }
            return acc;
        }
        case ExprKind::Mul: {
            Rat acc(1);
            for (const auto& k : e->kids) {
                auto v = fold_const(k);
                if (!v) return std::nullopt;
                acc *= *v;
            }
            return acc;
        }
        case ExprKind::Pow: {
            auto b = fold_const(e->kids[0]);
            if (!b || !e->num.is_integer()) return std::nullopt;
            if (b->is_zero() && e->num.sign() < 0) return std::nullopt;
            return b->pow(e->num.to_long());
        }
        default: return std::nullopt;
        }
    }

    /// b^e: integer and half-integer exponents stay algebraic; every other
    /// exponent is desugared to exp(e*ln(b)).
    ExprPtr make_power(const ExprPtr& base, const ExprPtr& exponent, SourceSpan span) {
        if (auto c = fold_const(exponent)) {
            if (c->is_integer() || c->denominator() == Rat(2)) return Expr::make_pow(base, *c);
            return Expr::make_atom("exp", {num(*c) * Expr::make_atom("ln", {base})});
        }
        (void)span;
        return Expr::make_atom("exp", {exponent * Expr::make_atom("ln", {base})});
    }

    ExprPtr primary() {
        switch (cur_.kind) {
        case Tok::Num: {
            Token t = cur_;
            advance();
            return num(Rat::parse(t.text));
        }
        case Tok::LParen: {
            advance();
            ExprPtr e = expression(0);
            expect(Tok::RParen, "')'");
            return e;
        }
        case Tok::Ident: return identifier();
        default: throw err("expected a number, name or '('", cur_.span);
        }
    }

    ExprPtr identifier() {
        Token name = cur_;
        advance();
        if (name.text == "D" && cur_.kind == Tok::LBrack) return derivative_bracket(name);

        int primes = 0;
        SourceSpan pspan = name.span;
        while (cur_.kind == Tok::Prime) {
            ++primes;
            pspan.end = cur_.span.end;
            advance();
        }
        if (primes > 0) {
            if (cur_.kind != Tok::LParen)
                throw err("a prime derivative needs an argument list, like a'(t)", pspan);
            if (!tab_.has_atom(name.text)) throw unknown_atom(name);
            std::vector<ExprPtr> args = arg_list();
            check_arity(name, args.size());
            if (args.size() != 1)
                throw err("prime derivatives are for one-argument operators; use D[...] instead",
                          pspan);
            return Expr::make_atom(name.text, std::move(args), {primes});
        }

        if (cur_.kind == Tok::LParen) {
            if (name.text == "abs") {
                std::vector<ExprPtr> args = arg_list();
                if (args.size() != 1) throw err("abs takes one argument", name.span);
                return Expr::make_atom("abs", std::move(args));
            }
            if (builtin_call(name.text)) {
                std::vector<ExprPtr> args = arg_list();
                if (args.size() != 1)
                    throw err(name.text + " takes one argument", name.span);
                if (name.text == "sqrt") return Expr::make_pow(args[0], Rat(1, 2));
                return Expr::make_atom(name.text, std::move(args));
            }
            if (!tab_.has_atom(name.text)) throw unknown_atom(name);
            std::vector<ExprPtr> args = arg_list();
            check_arity(name, args.size());
            return Expr::make_atom(name.text, std::move(args));
        }

        if (tab_.has_symbol(name.text)) return sym(tab_, name.text);
        if (tab_.has_atom(name.text) || builtin_call(name.text))
            throw err("'" + name.text + "' is an operator and needs arguments", name.span);
        std::string s = suggest(name.text, tab_);
        throw err("unknown name '" + name.text + "'" + (s.empty() ? "" : "; did you mean '" + s + "'?"),
                  name.span);
    }

    static bool builtin_call(const std::string& n) {
        return n == "ln" || n == "exp" || n == "sqrt" || n == "arctan";
    }

    ParseError unknown_atom(const Token& name) const {
        std::string s = suggest(name.text, tab_);
        return err("unknown operator '" + name.text + "'" +
                       (s.empty() ? "" : "; did you mean '" + s + "'?"),
                   name.span);
    }

    void check_arity(const Token& name, std::size_t n) const {
        int want = tab_.atom(name.text).arity;
        if (static_cast<std::size_t>(want) != n)
            throw err("'" + name.text + "' takes " + std::to_string(want) + " argument(s), got " +
                          std::to_string(n),
                      name.span);
    }

    std::vector<ExprPtr> arg_list() {
        expect(Tok::LParen, "'('");
        std::vector<ExprPtr> args;
        if (cur_.kind != Tok::RParen) {
            args.push_back(expression(0));
            while (accept(Tok::Comma)) args.push_back(expression(0));
        }
        expect(Tok::RParen, "')'");
        return args;
    }

    /// D[target, spec...]: target is an operator name (one-argument form,
    /// D[f, t, 2] with f applied to t) or an explicit application
    /// (D[F(a,b,c), 2] differentiates in argument slot 2). A name in the
    /// spec selects the slot holding that symbol; an integer directly after
    /// a name or slot sets that slot's total derivative count; a leading
    /// integer is a slot index.
    ExprPtr derivative_bracket(const Token& dtok) {
        expect(Tok::LBrack, "'['");
        Token name = expect(Tok::Ident, "an operator name");
        if (!tab_.has_atom(name.text)) throw unknown_atom(name);
        std::vector<ExprPtr> args;
        if (cur_.kind == Tok::LParen) {
            args = arg_list();
            check_arity(name, args.size());
        } else {
            if (tab_.atom(name.text).arity != 1)
                throw err("'" + name.text + "' takes several arguments; spell them out, like D[" +
                              name.text + "(...), 1]",
                          name.span);
        }

        std::vector<int> dmi;
        int last_slot = -1;
        bool any = false;
        while (accept(Tok::Comma)) {
            any = true;
            if (cur_.kind == Tok::Ident) {
                Token var = cur_;
                advance();
                if (!tab_.has_symbol(var.text))
                    throw err("unknown name '" + var.text + "'", var.span);
                SymbolId v = tab_.id(var.text);
                if (args.empty()) {
                    // one-argument form: the variable names the single slot
                    args = {sym(v)};
                    dmi.assign(1, 0);
                    last_slot = 0;
                } else {
                    last_slot = -1;
                    for (std::size_t i = 0; i < args.size(); ++i)
                        if (args[i]->kind == ExprKind::Sym && args[i]->sym == v) {
                            if (last_slot >= 0)
                                throw err("'" + var.text + "' appears in several argument slots; use a slot number",
                                          var.span);
                            last_slot = static_cast<int>(i);
                        }
                    if (last_slot < 0)
                        throw err("'" + var.text + "' is not an argument of '" + name.text + "' here",
                                  var.span);
                }
                if (dmi.empty()) dmi.assign(args.size(), 0);
                ++dmi[last_slot];
            } else if (cur_.kind == Tok::Num) {
                Token n = cur_;
                advance();
                long v = Rat::parse(n.text).to_long();
                if (last_slot >= 0) {
                    // repeat count for the preceding slot
                    if (v < 1) throw err("derivative count must be at least 1", n.span);
                    dmi[last_slot] += static_cast<int>(v) - 1;
                    last_slot = -1;
                } else {
                    if (args.empty())
                        throw err("slot numbers need an explicit argument list, like D[" + name.text +
                                      "(...), " + n.text + "]",
                                  n.span);
                    if (v < 1 || v > static_cast<long>(args.size()))
                        throw err("slot number out of range", n.span);
                    if (dmi.empty()) dmi.assign(args.size(), 0);
                    last_slot = static_cast<int>(v) - 1;
                    ++dmi[last_slot];
                }
            } else {
                throw err("expected a variable name or slot number", cur_.span);
            }
        }
        expect(Tok::RBrack, "']'");
        if (!any) throw err("D[...] needs at least one derivative specification", dtok.span);
        if (args.empty())
            throw err("could not infer the argument of '" + name.text + "'; use D[" + name.text +
                          "(...), ...]",
                      name.span);
        if (dmi.empty()) dmi.assign(args.size(), 0);
        return Expr::make_atom(name.text, std::move(args), std::move(dmi));
    }

    const std::string& src_;
    const SymbolTable& tab_;
    Lexer lex_;
    Token cur_;
};

} // namespace detail

/// Parses one expression against a symbol table. All names must be declared
/// (ln, exp, sqrt, arctan and abs are built in); juxtaposition is not
/// multiplication; '^' is right-associative and binds tighter than unary
/// minus; non-integer exponents other than halves are read as exp(e*ln(b)).
inline ExprPtr parse_expr(const std::string& src, const SymbolTable& tab) {
    return detail::Parser(src, tab).parse();
}

} // namespace lieheat

#endif // LIEHEAT_PARSE_HPP
