#ifndef LIEHEAT_RATIONAL_HPP
#define LIEHEAT_RATIONAL_HPP

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace lieheat {

/// Exact rational number. Thin value wrapper over GMP's mpq_class that keeps
/// every value canonical (lowest terms, positive denominator).
class Rat {
public:
    Rat() : v_(0) {}
    Rat(long n) : v_(n) {}
    Rat(long n, long d) : v_(n, d) {
        if (d == 0) throw std::domain_error("Rat: zero denominator");
        v_.canonicalize();
    }
    explicit Rat(const mpq_class& q) : v_(q) { v_.canonicalize(); }

    /// Parses "123", "-4/7". Throws std::invalid_argument on malformed input.
    static Rat parse(const std::string& s) {
        mpq_class q;
        if (q.set_str(s, 10) != 0) throw std::invalid_argument("Rat: cannot parse '" + s + "'");
        if (q.get_den() == 0) throw std::domain_error("Rat: zero denominator in '" + s + "'");
        q.canonicalize();
        return Rat(q);
    }

    bool is_zero() const { return v_ == 0; }
    bool is_one() const { return v_ == 1; }
    bool is_integer() const { return v_.get_den() == 1; }
    int sign() const { return sgn(v_); }

    /// Integer value; throws if not an integer or out of long range.
    long to_long() const {
        if (!is_integer()) throw std::domain_error("Rat: not an integer");
        if (!v_.get_num().fits_slong_p()) throw std::overflow_error("Rat: integer too large");
        return v_.get_num().get_si();
    }

    Rat numerator() const { return Rat(mpq_class(v_.get_num())); }
    Rat denominator() const { return Rat(mpq_class(v_.get_den())); }

    Rat operator-() const { return Rat(mpq_class(-v_)); }
    Rat operator+(const Rat& o) const { return Rat(mpq_class(v_ + o.v_)); }
    Rat operator-(const Rat& o) const { return Rat(mpq_class(v_ - o.v_)); }
    Rat operator*(const Rat& o) const { return Rat(mpq_class(v_ * o.v_)); }
    Rat operator/(const Rat& o) const {
        if (o.is_zero()) throw std::domain_error("Rat: division by zero");
        return Rat(mpq_class(v_ / o.v_));
    }
    Rat& operator+=(const Rat& o) { v_ += o.v_; return *this; }
    Rat& operator-=(const Rat& o) { v_ -= o.v_; return *this; }
    Rat& operator*=(const Rat& o) { v_ *= o.v_; return *this; }
    Rat& operator/=(const Rat& o) { *this = *this / o; return *this; }

    bool operator==(const Rat& o) const { return v_ == o.v_; }
    bool operator!=(const Rat& o) const { return v_ != o.v_; }
    bool operator<(const Rat& o) const { return v_ < o.v_; }
    bool operator<=(const Rat& o) const { return v_ <= o.v_; }
    bool operator>(const Rat& o) const { return v_ > o.v_; }
    bool operator>=(const Rat& o) const { return v_ >= o.v_; }

    /// Integer power (exponent may be negative; base must be nonzero then).
    Rat pow(long e) const {
        if (e == 0) return Rat(1);
        if (is_zero()) {
            if (e < 0) throw std::domain_error("Rat: 0 to negative power");
            return Rat(0);
        }
        mpq_class base = e < 0 ? mpq_class(1 / v_) : v_;
        unsigned long n = static_cast<unsigned long>(e < 0 ? -e : e);
        mpq_class acc(1);
        while (n) {
            if (n & 1) acc *= base;
            base *= base;
            n >>= 1;
        }
        acc.canonicalize();
        return Rat(acc);
    }

    /// Exact square root if the value is a perfect square of a rational.
    bool sqrt_exact(Rat& out) const {
        if (sign() < 0) return false;
        mpz_class num = v_.get_num(), den = v_.get_den();
        if (!mpz_perfect_square_p(num.get_mpz_t()) || !mpz_perfect_square_p(den.get_mpz_t()))
            return false;
        mpz_class rn, rd;
        mpz_sqrt(rn.get_mpz_t(), num.get_mpz_t());
        mpz_sqrt(rd.get_mpz_t(), den.get_mpz_t());
        out = Rat(mpq_class(rn) / mpq_class(rd));
        return true;
    }

    std::string str() const { return v_.get_str(); }
    const mpq_class& raw() const { return v_; }

    /// Total order hash (used by expression interning).
    std::size_t hash() const {
        std::size_t h = 1469598103934665603ull;
        auto mix = [&h](const mpz_class& z) {
            for (std::size_t i = 0, n = mpz_size(z.get_mpz_t()); i < n; ++i) {
                h ^= static_cast<std::size_t>(mpz_getlimbn(z.get_mpz_t(), i));
                h *= 1099511628211ull;
            }
            h ^= static_cast<std::size_t>(sgn(z) + 2);
            h *= 1099511628211ull;
        };
        mix(v_.get_num());
        mix(v_.get_den());
        return h;
    }

private:
    mpq_class v_;
};

inline Rat operator*(long a, const Rat& b) { return Rat(a) * b; }

} // namespace lieheat

#endif // LIEHEAT_RATIONAL_HPP
