#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace hjred {

/// Thrown when exact integer arithmetic would leave the 64-bit range.
struct OverflowError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Exact rational number with a 64-bit numerator and denominator.
/// Always kept in lowest terms with a positive denominator, so two equal
/// values are representation-identical.
class Rational {
  public:
    Rational() : num_(0), den_(1) {}
    Rational(std::int64_t n) : num_(n), den_(1) {}
    Rational(std::int64_t n, std::int64_t d) : num_(n), den_(d) { reduce(); }

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }

    bool is_zero() const { return num_ == 0; }
    bool is_one() const { return num_ == 1 && den_ == 1; }
    bool is_integer() const { return den_ == 1; }
    bool is_negative() const { return num_ < 0; }

    double to_double() const {
        return static_cast<double>(num_) / static_cast<double>(den_);
    }

    friend Rational operator+(const Rational& a, const Rational& b) {
        return Rational(checked(__int128(a.num_) * b.den_ + __int128(b.num_) * a.den_),
                        checked(__int128(a.den_) * b.den_));
    }
    friend Rational operator-(const Rational& a, const Rational& b) {
        return a + Rational(-b.num_, b.den_);
    }
    friend Rational operator*(const Rational& a, const Rational& b) {
        return Rational(checked(__int128(a.num_) * b.num_),
                        checked(__int128(a.den_) * b.den_));
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.num_ == 0) throw std::domain_error("rational division by zero");
        return Rational(checked(__int128(a.num_) * b.den_),
                        checked(__int128(a.den_) * b.num_));
    }
    Rational operator-() const { return Rational(-num_, den_); }

    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
    friend bool operator<(const Rational& a, const Rational& b) {
        return __int128(a.num_) * b.den_ < __int128(b.num_) * a.den_;
    }

    /// a^n for integer n; n < 0 inverts (a must be nonzero then).
    Rational pow_int(std::int64_t n) const {
        if (n == 0) return Rational(1);
        Rational base = *this;
        if (n < 0) {
            if (num_ == 0) throw std::domain_error("0 raised to a negative power");
            base = Rational(den_, num_);
            n = -n;
        }
        Rational acc(1);
        while (n > 0) {
            if (n & 1) acc = acc * base;
            base = (n > 1) ? base * base : base;
            n >>= 1;
        }
        return acc;
    }

    std::string str() const {
        if (den_ == 1) return std::to_string(num_);
        return std::to_string(num_) + "/" + std::to_string(den_);
    }

  private:
    static std::int64_t checked(__int128 v) {
        if (v > INT64_MAX || v < INT64_MIN)
            throw OverflowError("rational arithmetic overflow");
        return static_cast<std::int64_t>(v);
    }

    void reduce() {
        if (den_ == 0) throw std::domain_error("rational with zero denominator");
        if (den_ < 0) {
            num_ = -num_;
            den_ = -den_;
        }
        std::int64_t g = std::gcd(num_ < 0 ? -num_ : num_, den_);
        if (g > 1) {
            num_ /= g;
            den_ /= g;
        }
    }

    std::int64_t num_, den_;
};

} // namespace hjred
