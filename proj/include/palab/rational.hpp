#pragma once

#include <gmpxx.h>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace palab {

// Exact rational scalar used by everything combinatorial. Floats only
// appear in Monte Carlo estimates downstream.
using Rational = mpq_class;

inline Rational rat(long num, long den = 1) {
    if (den == 0) throw std::invalid_argument("rational with zero denominator");
    Rational r(num, den);
    r.canonicalize();
    return r;
}

inline Rational rat_pow(const Rational& base, long e) {
    if (e == 0) return Rational(1);
    if (e < 0) {
        if (base == 0) throw std::domain_error("0^negative");
        return Rational(1) / rat_pow(base, -e);
    }
    Rational acc(1), b = base;
    long n = e;
    while (n > 0) {
        if (n & 1) acc *= b;
        b *= b;
        n >>= 1;
    }
    return acc;
}

// N^e for integer N >= 1 and any integer exponent, exact.
inline Rational int_pow(long N, long e) { return rat_pow(Rational(N), e); }

// Falling factorial N(N-1)...(N-m+1).
inline Rational falling(long N, long m) {
    Rational acc(1);
    for (long i = 0; i < m; ++i) acc *= Rational(N - i);
    return acc;
}

// Serialized as "num/den" ("num" when den == 1), matching the table schema.
inline std::string rat_str(const Rational& r) {
    Rational c = r;
    c.canonicalize();
    if (c.get_den() == 1) return c.get_num().get_str();
    return c.get_num().get_str() + "/" + c.get_den().get_str();
}

inline Rational parse_rational(const std::string& s) {
    if (s.empty()) throw std::invalid_argument("empty rational");
    Rational r;
    if (r.set_str(s, 10) != 0) throw std::invalid_argument("bad rational: " + s);
    if (r.get_den() == 0) throw std::invalid_argument("zero denominator: " + s);
    r.canonicalize();
    return r;
}

inline double to_double(const Rational& r) { return r.get_d(); }

}  // namespace palab
