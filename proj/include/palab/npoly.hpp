#pragma once

#include <map>
#include <string>

#include "palab/rational.hpp"

namespace palab {

// Laurent polynomial in the dimension symbol N with rational coefficients.
// Zero coefficients are never stored.
class NPoly {
  public:
    NPoly() = default;
    NPoly(const Rational& c) { set(0, c); }
    NPoly(long c) { set(0, Rational(c)); }

    static NPoly n_power(long e, const Rational& coeff = Rational(1)) {
        NPoly p;
        p.set(e, coeff);
        return p;
    }

    const std::map<long, Rational>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    Rational coeff(long e) const {
        auto it = terms_.find(e);
        return it == terms_.end() ? Rational(0) : it->second;
    }

    void set(long e, const Rational& c) {
        if (c == 0)
            terms_.erase(e);
        else
            terms_[e] = c;
    }

    NPoly& operator+=(const NPoly& o) {
        for (const auto& [e, c] : o.terms_) set(e, coeff(e) + c);
        return *this;
    }
    NPoly& operator-=(const NPoly& o) {
        for (const auto& [e, c] : o.terms_) set(e, coeff(e) - c);
        return *this;
    }
    friend NPoly operator+(NPoly a, const NPoly& b) { return a += b; }
    friend NPoly operator-(NPoly a, const NPoly& b) { return a -= b; }
    friend NPoly operator*(const NPoly& a, const NPoly& b) {
        NPoly r;
        for (const auto& [ea, ca] : a.terms_)
            for (const auto& [eb, cb] : b.terms_) r.set(ea + eb, r.coeff(ea + eb) + ca * cb);
        return r;
    }
    NPoly& operator*=(const NPoly& o) { return *this = *this * o; }
    friend NPoly operator*(const NPoly& a, const Rational& s) {
        NPoly r;
        for (const auto& [e, c] : a.terms_) r.set(e, c * s);
        return r;
    }
    bool operator==(const NPoly& o) const { return terms_ == o.terms_; }
    bool operator!=(const NPoly& o) const { return !(*this == o); }

    Rational evaluate(long N) const {
        Rational acc(0);
        for (const auto& [e, c] : terms_) acc += c * int_pow(N, e);
        return acc;
    }

    // e.g. "2*N^-1 + 1"; ascending exponent order.
    std::string str() const;

  private:
    std::map<long, Rational> terms_;
};

}  // namespace palab
