#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <memory>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace kis {

// Exact rational. Values whose reduced numerator and denominator fit in
// int64 stay inline; anything larger is promoted to an mpq_class and demoted
// again as soon as it fits.
class Rational {
public:
    Rational() = default;
    Rational(long long n) : n_(n), d_(1) {}  // NOLINT: implicit by design
    Rational(long long n, long long d) { assign128(n, d); }
    explicit Rational(const mpq_class& q) { assign_big(q); }

    Rational(const Rational& o) : n_(o.n_), d_(o.d_) {
        if (o.big_) big_ = std::make_unique<mpq_class>(*o.big_);
    }
    Rational(Rational&&) noexcept = default;
    Rational& operator=(const Rational& o) {
        if (this != &o) {
            n_ = o.n_;
            d_ = o.d_;
            big_ = o.big_ ? std::make_unique<mpq_class>(*o.big_) : nullptr;
        }
        return *this;
    }
    Rational& operator=(Rational&&) noexcept = default;

    static Rational parse(std::string_view s) {
        std::string t(s);
        if (t.empty()) throw std::invalid_argument("empty rational literal");
        mpq_class q;
        if (q.set_str(t, 10) != 0 || q.get_den() == 0)
            throw std::invalid_argument("bad rational literal '" + t + "'");
        q.canonicalize();
        return Rational(q);
    }

    bool is_zero() const { return !big_ && n_ == 0; }
    bool is_one() const { return !big_ && n_ == 1 && d_ == 1; }
    bool is_small() const { return !big_; }
    int sign() const {
        if (big_) return sgn(*big_);
        return (n_ > 0) - (n_ < 0);
    }
    bool is_integer() const { return big_ ? big_->get_den() == 1 : d_ == 1; }

    mpq_class to_mpq() const {
        if (big_) return *big_;
        mpq_class q(mpz_class(static_cast<long>(n_)), mpz_class(static_cast<long>(d_)));
        return q;
    }

    std::string str() const {
        if (big_) return big_->get_str();
        if (d_ == 1) return std::to_string(n_);
        return std::to_string(n_) + "/" + std::to_string(d_);
    }

    Rational operator-() const {
        if (big_) return Rational(mpq_class(-*big_));
        if (n_ == INT64_MIN) return Rational(mpq_class(-to_mpq()));
        Rational r;
        r.n_ = -n_;
        r.d_ = d_;
        return r;
    }

    friend Rational operator+(const Rational& a, const Rational& b) {
        if (!a.big_ && !b.big_) {
            if (a.d_ == 1 && b.d_ == 1) {
                long long s;
                if (!__builtin_add_overflow(a.n_, b.n_, &s)) return Rational(s);
            }
            Rational r;
            __int128 num = static_cast<__int128>(a.n_) * b.d_ + static_cast<__int128>(b.n_) * a.d_;
            __int128 den = static_cast<__int128>(a.d_) * b.d_;
            r.assign128(num, den);
            return r;
        }
        return Rational(mpq_class(a.to_mpq() + b.to_mpq()));
    }
    friend Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }
    friend Rational operator*(const Rational& a, const Rational& b) {
        if (!a.big_ && !b.big_) {
            if (a.d_ == 1 && b.d_ == 1) {
                long long p;
                if (!__builtin_mul_overflow(a.n_, b.n_, &p)) return Rational(p);
            }
            Rational r;
            r.assign128(static_cast<__int128>(a.n_) * b.n_, static_cast<__int128>(a.d_) * b.d_);
            return r;
        }
        return Rational(mpq_class(a.to_mpq() * b.to_mpq()));
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.is_zero()) throw std::domain_error("rational division by zero");
        if (!a.big_ && !b.big_) {
            Rational r;
            r.assign128(static_cast<__int128>(a.n_) * b.d_, static_cast<__int128>(a.d_) * b.n_);
            return r;
        }
        return Rational(mpq_class(a.to_mpq() / b.to_mpq()));
    }
    Rational& operator+=(const Rational& o) { return *this = *this + o; }
    Rational& operator-=(const Rational& o) { return *this = *this - o; }
    Rational& operator*=(const Rational& o) { return *this = *this * o; }
    Rational& operator/=(const Rational& o) { return *this = *this / o; }

    friend bool operator==(const Rational& a, const Rational& b) {
        if (!a.big_ && !b.big_) return a.n_ == b.n_ && a.d_ == b.d_;
        if (a.big_ && b.big_) return *a.big_ == *b.big_;
        return false;  // canonical forms: a value is big only if it does not fit
    }
    friend bool operator<(const Rational& a, const Rational& b) {
        if (!a.big_ && !b.big_)
            return static_cast<__int128>(a.n_) * b.d_ < static_cast<__int128>(b.n_) * a.d_;
        return a.to_mpq() < b.to_mpq();
    }
    friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

private:
    static __int128 gcd128(__int128 a, __int128 b) {
        if (a < 0) a = -a;
        if (b < 0) b = -b;
        while (b != 0) {
            __int128 t = a % b;
            a = b;
            b = t;
        }
        return a;
    }

    static mpz_class mpz_from128(__int128 v) {
        bool neg = v < 0;
        unsigned __int128 u = neg ? -static_cast<unsigned __int128>(v) : static_cast<unsigned __int128>(v);
        mpz_class hi(static_cast<unsigned long>(u >> 64));
        mpz_class lo(static_cast<unsigned long>(u & 0xFFFFFFFFFFFFFFFFULL));
        mpz_class r = (hi << 64) + lo;
        return neg ? mpz_class(-r) : r;
    }

    void assign128(__int128 num, __int128 den) {
        if (den == 0) throw std::domain_error("rational with zero denominator");
        if (den < 0) {
            num = -num;
            den = -den;
        }
        __int128 g = gcd128(num, den);
        if (g > 1) {
            num /= g;
            den /= g;
        }
        if (num == 0) den = 1;
        if (num >= INT64_MIN && num <= INT64_MAX && den <= INT64_MAX) {
            n_ = static_cast<long long>(num);
            d_ = static_cast<long long>(den);
            big_.reset();
        } else {
            mpq_class q(mpz_from128(num), mpz_from128(den));
            big_ = std::make_unique<mpq_class>(q);
        }
    }

    void assign_big(const mpq_class& q) {
        if (q.get_num().fits_slong_p() && q.get_den().fits_slong_p()) {
            n_ = q.get_num().get_si();
            d_ = q.get_den().get_si();
            big_.reset();
        } else {
            big_ = std::make_unique<mpq_class>(q);
        }
    }

    long long n_ = 0;
    long long d_ = 1;
    std::unique_ptr<mpq_class> big_;
};

inline bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }

}  // namespace kis
