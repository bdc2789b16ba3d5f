#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "rfseries/arith.hpp"

namespace rfs {

// Exact rational scalar over 128-bit integers. Used where the ring
// identities must hold bit-exactly; overflow throws instead of wrapping.
class Rat {
public:
    using int128 = __int128;

    Rat() : num_(0), den_(1) {}
    Rat(i64 n) : num_(n), den_(1) {}  // NOLINT: implicit by design
    Rat(i64 n, i64 d) : num_(n), den_(d) { normalize(); }

    static Rat from_int128(int128 n, int128 d) {
        Rat r;
        r.num_ = n;
        r.den_ = d;
        r.normalize();
        return r;
    }

    int128 num() const { return num_; }
    int128 den() const { return den_; }

    friend Rat operator+(const Rat& a, const Rat& b) {
        return from_int128(add_checked(mul_checked(a.num_, b.den_), mul_checked(b.num_, a.den_)),
                           mul_checked(a.den_, b.den_));
    }
    friend Rat operator-(const Rat& a, const Rat& b) {
        return from_int128(sub_checked(mul_checked(a.num_, b.den_), mul_checked(b.num_, a.den_)),
                           mul_checked(a.den_, b.den_));
    }
    friend Rat operator*(const Rat& a, const Rat& b) {
        // Cross-reduce before multiplying to keep intermediates small.
        int128 g1 = gcd128(abs128(a.num_), b.den_);
        int128 g2 = gcd128(abs128(b.num_), a.den_);
        return from_int128(mul_checked(a.num_ / g1, b.num_ / g2),
                           mul_checked(a.den_ / g2, b.den_ / g1));
    }
    friend Rat operator/(const Rat& a, const Rat& b) {
        if (b.num_ == 0) throw std::domain_error("Rat: division by zero");
        int128 g1 = gcd128(abs128(a.num_), abs128(b.num_));
        int128 g2 = gcd128(a.den_, b.den_);
        Rat r;
        r.num_ = mul_checked(a.num_ / g1, b.den_ / g2);
        r.den_ = mul_checked(a.den_ / g2, b.num_ / g1);
        r.normalize();
        return r;
    }
    Rat operator-() const {
        Rat r = *this;
        r.num_ = -r.num_;
        return r;
    }
    Rat& operator+=(const Rat& b) { return *this = *this + b; }
    Rat& operator-=(const Rat& b) { return *this = *this - b; }
    Rat& operator*=(const Rat& b) { return *this = *this * b; }
    Rat& operator/=(const Rat& b) { return *this = *this / b; }

    friend bool operator==(const Rat& a, const Rat& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend bool operator!=(const Rat& a, const Rat& b) { return !(a == b); }

    bool is_zero() const { return num_ == 0; }

    double to_double() const {
        return static_cast<double>(num_) / static_cast<double>(den_);
    }

    std::string str() const {
        std::string s = int128_str(num_);
        if (den_ != 1) s += "/" + int128_str(den_);
        return s;
    }

private:
    int128 num_;
    int128 den_;

    static int128 abs128(int128 x) { return x < 0 ? -x : x; }

    static int128 gcd128(int128 a, int128 b) {
        a = abs128(a);
        b = abs128(b);
        while (b != 0) {
            int128 t = a % b;
            a = b;
            b = t;
        }
        return a == 0 ? 1 : a;
    }

    static int128 mul_checked(int128 a, int128 b) {
        int128 out;
        if (__builtin_mul_overflow(a, b, &out))
            throw std::overflow_error("Rat: 128-bit multiplication overflow");
        return out;
    }
    static int128 add_checked(int128 a, int128 b) {
        int128 out;
        if (__builtin_add_overflow(a, b, &out))
            throw std::overflow_error("Rat: 128-bit addition overflow");
        return out;
    }
    static int128 sub_checked(int128 a, int128 b) {
        int128 out;
        if (__builtin_sub_overflow(a, b, &out))
            throw std::overflow_error("Rat: 128-bit subtraction overflow");
        return out;
    }

    static std::string int128_str(int128 v) {
        if (v == 0) return "0";
        bool neg = v < 0;
        if (neg) v = -v;
        std::string s;
        while (v > 0) {
            s.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
            v /= 10;
        }
        if (neg) s.push_back('-');
        return {s.rbegin(), s.rend()};
    }

    void normalize() {
        if (den_ == 0) throw std::domain_error("Rat: zero denominator");
        if (den_ < 0) {
            num_ = -num_;
            den_ = -den_;
        }
        int128 g = gcd128(num_, den_);
        num_ /= g;
        den_ /= g;
    }
};

inline double to_double(double x) { return x; }
inline double to_double(const Rat& x) { return x.to_double(); }

}  // namespace rfs
