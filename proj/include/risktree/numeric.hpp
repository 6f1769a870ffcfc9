#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace risktree {

using Rational = boost::multiprecision::cpp_rational;

// Numeric kernel shared by the float and exact-rational arithmetic modes.
// Comparisons take an explicit tolerance; exact mode passes zero.
template <class S>
struct Num;

template <>
struct Num<double> {
    static constexpr bool exact = false;
    static double from_double(double v) { return v; }
    static double from_ratio(long long num, long long den) {
        return static_cast<double>(num) / static_cast<double>(den);
    }
    static double to_double(double v) { return v; }
    static double abs(double v) { return std::fabs(v); }
    static std::string str(double v) { return std::to_string(v); }
};

template <>
struct Num<Rational> {
    static constexpr bool exact = true;
    // Doubles are binary fractions, so this conversion is exact.
    static Rational from_double(double v) {
        if (v == 0.0) return Rational(0);
        int exp = 0;
        double mant = std::frexp(v, &exp);
        long long m = static_cast<long long>(std::ldexp(mant, 62));
        exp -= 62;
        Rational r(m);
        boost::multiprecision::cpp_int two(2);
        if (exp >= 0) {
            r *= Rational(boost::multiprecision::pow(two, exp));
        } else {
            r /= Rational(boost::multiprecision::pow(two, -exp));
        }
        return r;
    }
    static Rational from_ratio(long long num, long long den) {
        return Rational(num, den);
    }
    static double to_double(const Rational& v) { return static_cast<double>(v); }
    static Rational abs(const Rational& v) { return v < 0 ? Rational(-v) : v; }
    static std::string str(const Rational& v) { return v.str(); }
};

template <class S>
using Vec = std::vector<S>;

template <class S>
S dot(const Vec<S>& a, const Vec<S>& b) {
    S r(0);
    for (std::size_t i = 0; i < a.size(); ++i) r += a[i] * b[i];
    return r;
}

template <class S>
bool is_zero_vec(const Vec<S>& a) {
    for (const S& v : a)
        if (v != S(0)) return false;
    return true;
}

template <class S>
Vec<S> zero_vec(int n) { return Vec<S>(static_cast<std::size_t>(n), S(0)); }

}  // namespace risktree
