// skyjoin/double_double.hpp - compensated double-double arithmetic
//
// The match accumulator sums terms whose magnitudes span ~26 decimal digits
// (precision weights reach ~4e12 while the combined-position norm of a tight
// tuple cancels almost completely).  Plain doubles lose enough bits there to
// make log-Bayes-factors depend on accumulation order at the 1e-3 level; the
// double-double representation keeps round-off near 1e-31 so results are
// order-independent far below the guaranteed 1e-9.
#pragma once

#include <cmath>

namespace skyjoin {

struct DoubleDouble {
    double hi = 0.0;
    double lo = 0.0;

    constexpr DoubleDouble() = default;
    constexpr DoubleDouble(double h, double l) : hi(h), lo(l) {}
    static constexpr DoubleDouble from(double v) { return DoubleDouble{v, 0.0}; }

    double value() const { return hi + lo; }
};

namespace dd {

// Error-free transforms (Knuth / Dekker).
inline DoubleDouble two_sum(double a, double b) {
    const double s = a + b;
    const double bb = s - a;
    const double err = (a - (s - bb)) + (b - bb);
    return {s, err};
}

inline DoubleDouble quick_two_sum(double a, double b) {
    const double s = a + b;
    return {s, b - (s - a)};
}

inline DoubleDouble two_prod(double a, double b) {
    const double p = a * b;
    return {p, std::fma(a, b, -p)};
}

inline DoubleDouble add(const DoubleDouble& a, const DoubleDouble& b) {
    DoubleDouble s = two_sum(a.hi, b.hi);
    s.lo += a.lo + b.lo;
    return quick_two_sum(s.hi, s.lo);
}

inline DoubleDouble add(const DoubleDouble& a, double b) {
    DoubleDouble s = two_sum(a.hi, b);
    s.lo += a.lo;
    return quick_two_sum(s.hi, s.lo);
}

inline DoubleDouble sub(const DoubleDouble& a, const DoubleDouble& b) {
    return add(a, DoubleDouble{-b.hi, -b.lo});
}

inline DoubleDouble mul(const DoubleDouble& a, const DoubleDouble& b) {
    DoubleDouble p = two_prod(a.hi, b.hi);
    p.lo += a.hi * b.lo + a.lo * b.hi;
    return quick_two_sum(p.hi, p.lo);
}

inline DoubleDouble mul(const DoubleDouble& a, double b) {
    DoubleDouble p = two_prod(a.hi, b);
    p.lo += a.lo * b;
    return quick_two_sum(p.hi, p.lo);
}

inline DoubleDouble sqrt(const DoubleDouble& a) {
    if (a.hi == 0.0 && a.lo == 0.0) return {};
    const double s = std::sqrt(a.hi);
    // One Newton correction: sqrt(a) ~ s + (a - s^2) / (2 s).
    const DoubleDouble s2 = two_prod(s, s);
    const DoubleDouble r = sub(a, s2);
    return quick_two_sum(s, r.value() / (2.0 * s));
}

}  // namespace dd
}  // namespace skyjoin
