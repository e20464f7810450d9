#pragma once

#include <cmath>
#include <cstdint>

#include "cspqaoa/combinatorics.hpp"
#include "cspqaoa/common.hpp"

namespace cspqaoa {

/// Double-double scalar: an unevaluated sum hi + lo with |lo| <= ulp(hi)/2,
/// giving ~106 significand bits (~31.9 decimal digits). Used as the software
/// high-precision fallback for strongly cancelling sums. Only the operations
/// the evaluators need are provided: field arithmetic, integer powers, exp,
/// and sin/cos with extended-precision argument reduction.
struct DDouble {
    double hi = 0.0;
    double lo = 0.0;

    DDouble() = default;
    constexpr DDouble(double h, double l) : hi(h), lo(l) {}
    constexpr DDouble(double x) : hi(x), lo(0.0) {}

    double to_double() const { return hi + lo; }
};

namespace ddetail {

inline DDouble two_sum(double a, double b) {
    double s = a + b;
    double bb = s - a;
    double err = (a - (s - bb)) + (b - bb);
    return {s, err};
}

// Requires |a| >= |b| (or a == 0).
inline DDouble quick_two_sum(double a, double b) {
    double s = a + b;
    return {s, b - (s - a)};
}

inline void split(double a, double& hi, double& lo) {
    constexpr double splitter = 134217729.0;  // 2^27 + 1
    double t = splitter * a;
    hi = t - (t - a);
    lo = a - hi;
}

inline DDouble two_prod(double a, double b) {
    double p = a * b;
    double ah, al, bh, bl;
    split(a, ah, al);
    split(b, bh, bl);
    double err = ((ah * bh - p) + ah * bl + al * bh) + al * bl;
    return {p, err};
}

}  // namespace ddetail

/// Renormalizes an arbitrary pair of doubles into a valid DDouble.
inline DDouble dd_normalize(double hi, double lo) { return ddetail::two_sum(hi, lo); }

inline DDouble operator+(DDouble a, DDouble b) {
    using namespace ddetail;
    DDouble s = two_sum(a.hi, b.hi);
    DDouble t = two_sum(a.lo, b.lo);
    double s2 = s.lo + t.hi;
    DDouble r = quick_two_sum(s.hi, s2);
    return quick_two_sum(r.hi, r.lo + t.lo);
}

inline DDouble operator-(DDouble a) { return {-a.hi, -a.lo}; }
inline DDouble operator-(DDouble a, DDouble b) { return a + (-b); }

inline DDouble operator*(DDouble a, DDouble b) {
    using namespace ddetail;
    DDouble p = two_prod(a.hi, b.hi);
    p.lo += a.hi * b.lo + a.lo * b.hi;
    return quick_two_sum(p.hi, p.lo);
}

inline DDouble operator*(DDouble a, double b) {
    using namespace ddetail;
    DDouble p = two_prod(a.hi, b);
    p.lo += a.lo * b;
    return quick_two_sum(p.hi, p.lo);
}
inline DDouble operator*(double a, DDouble b) { return b * a; }

inline DDouble operator/(DDouble a, DDouble b) {
    using namespace ddetail;
    double q1 = a.hi / b.hi;
    DDouble r = a - b * q1;
    double q2 = r.hi / b.hi;
    r = r - b * q2;
    double q3 = r.hi / b.hi;
    DDouble q = quick_two_sum(q1, q2);
    return q + DDouble(q3);
}

inline DDouble& operator+=(DDouble& a, DDouble b) { return a = a + b; }
inline DDouble& operator-=(DDouble& a, DDouble b) { return a = a - b; }
inline DDouble& operator*=(DDouble& a, DDouble b) { return a = a * b; }

inline bool operator<(DDouble a, DDouble b) { return a.hi < b.hi || (a.hi == b.hi && a.lo < b.lo); }
inline bool operator>(DDouble a, DDouble b) { return b < a; }
inline bool operator==(DDouble a, DDouble b) { return a.hi == b.hi && a.lo == b.lo; }

inline DDouble dd_abs(DDouble a) { return a.hi < 0.0 || (a.hi == 0.0 && a.lo < 0.0) ? -a : a; }

inline DDouble dd_from_i64(int64_t v) {
    double hi = static_cast<double>(v);
    double lo = static_cast<double>(v - static_cast<int64_t>(hi));
    return ddetail::two_sum(hi, lo);
}

/// Two-limb conversion; relative error <= 2^-105 for any magnitude.
inline DDouble dd_from_bigint(const BigInt& v) {
    double hi = v.convert_to<double>();
    BigInt rem = v - BigInt(hi);
    double lo = rem.convert_to<double>();
    return ddetail::two_sum(hi, lo);
}

inline DDouble dd_ldexp(DDouble a, int e) { return {std::ldexp(a.hi, e), std::ldexp(a.lo, e)}; }

namespace ddetail {

inline constexpr DDouble kLn2{6.931471805599452862e-01, 2.319046813846299558e-17};
inline constexpr DDouble kPi{3.141592653589793116e+00, 1.224646799147353207e-16};
// pi/2 as three non-overlapping limbs (each next one <= ulp(previous)/2),
// used by the two_prod-based argument reduction below.
inline constexpr double kPio2Hi = 1.570796326794896558e+00;
inline constexpr double kPio2Mi = 6.123233995736766036e-17;
inline constexpr double kPio2Lo = -1.49738490485916983e-33;

inline const DDouble* inv_factorials() {
    static const auto table = [] {
        static DDouble t[32];
        for (int i = 0; i < 32; ++i) t[i] = DDouble(1.0) / dd_from_bigint(factorial(i));
        return t;
    }();
    return table;
}

}  // namespace ddetail

/// exp with ~1e-31 relative accuracy; underflows to 0 below exp(-709).
inline DDouble dd_exp(DDouble x) {
    using namespace ddetail;
    if (x.hi < -709.0) return DDouble(0.0);
    if (x.hi > 709.0) throw NumericError("dd_exp: overflow");
    double m = std::nearbyint(x.hi / kLn2.hi);
    DDouble r = x - kLn2 * m;
    const DDouble* inv_fact = inv_factorials();
    DDouble acc = inv_fact[25];
    for (int i = 24; i >= 0; --i) acc = acc * r + inv_fact[i];
    return dd_ldexp(acc, static_cast<int>(m));
}

namespace ddetail {

// Taylor kernels for |r| <= pi/4 + small slack. The alternating series is
// evaluated as a uniformly nested Horner form: S = 1/3! - r^2(1/5! - r^2(...)),
// so sin r = r - r^3*S, and likewise for cos.
inline DDouble sin_kernel(DDouble r) {
    const DDouble* inv_fact = inv_factorials();
    DDouble r2 = r * r;
    DDouble acc = inv_fact[29];
    for (int i = 27; i >= 3; i -= 2) acc = inv_fact[i] - r2 * acc;
    return r - r * r2 * acc;
}

inline DDouble cos_kernel(DDouble r) {
    const DDouble* inv_fact = inv_factorials();
    DDouble r2 = r * r;
    DDouble acc = inv_fact[28];
    for (int i = 26; i >= 2; i -= 2) acc = inv_fact[i] - r2 * acc;
    return DDouble(1.0) - r2 * acc;
}

}  // namespace ddetail

/// Simultaneous sin and cos. Argument reduction is exact to ~150 bits for
/// |x| < 2^20, ample for the clause-count phase arguments that arise here.
inline void dd_sincos(DDouble x, DDouble& sin_out, DDouble& cos_out) {
    using namespace ddetail;
    if (std::abs(x.hi) > 1048576.0) throw NumericError("dd_sincos: argument too large");
    double k = std::nearbyint(x.hi / kPio2Hi);
    DDouble r = x - two_prod(k, kPio2Hi);
    r = r - two_prod(k, kPio2Mi);
    r = r - DDouble(k * kPio2Lo);
    DDouble s = sin_kernel(r), c = cos_kernel(r);
    switch (static_cast<int64_t>(k) & 3) {
        case 0: sin_out = s; cos_out = c; break;
        case 1: sin_out = c; cos_out = -s; break;
        case 2: sin_out = -s; cos_out = -c; break;
        default: sin_out = -c; cos_out = s; break;
    }
}

inline DDouble dd_sin(DDouble x) {
    DDouble s, c;
    dd_sincos(x, s, c);
    return s;
}
inline DDouble dd_cos(DDouble x) {
    DDouble s, c;
    dd_sincos(x, s, c);
    return c;
}

/// b^e for integer e >= 0 by binary powering (0^0 = 1).
inline DDouble dd_pow_int(DDouble b, int64_t e) {
    if (e < 0) throw Error("dd_pow_int: negative exponent");
    DDouble acc(1.0);
    while (e > 0) {
        if (e & 1) acc *= b;
        b *= b;
        e >>= 1;
    }
    return acc;
}

/// Minimal complex-over-Real used by the evaluators (std::complex is only
/// specified for built-in floating types).
template <class Real>
struct Cx {
    Real re{};
    Real im{};

    Cx() = default;
    Cx(Real r, Real i) : re(r), im(i) {}
    explicit Cx(Real r) : re(r), im(Real(0.0)) {}
};

template <class Real>
Cx<Real> operator+(Cx<Real> a, Cx<Real> b) {
    return {a.re + b.re, a.im + b.im};
}
template <class Real>
Cx<Real> operator-(Cx<Real> a, Cx<Real> b) {
    return {a.re - b.re, a.im - b.im};
}
template <class Real>
Cx<Real> operator*(Cx<Real> a, Cx<Real> b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
template <class Real>
Cx<Real> operator*(Cx<Real> a, Real s) {
    return {a.re * s, a.im * s};
}

template <class Real>
Cx<Real> cx_pow_int(Cx<Real> b, int64_t e) {
    if (e < 0) throw Error("cx_pow_int: negative exponent");
    Cx<Real> acc(Real(1.0), Real(0.0));
    while (e > 0) {
        if (e & 1) acc = acc * b;
        b = b * b;
        e >>= 1;
    }
    return acc;
}

/// Uniform numeric interface so evaluators can be written once and
/// instantiated at double or double-double precision.
template <class Real>
struct RealOps;

template <>
struct RealOps<double> {
    static double from_i64(int64_t v) { return static_cast<double>(v); }
    static double from_bigint(const BigInt& v) { return v.convert_to<double>(); }
    static double exp(double x) { return std::exp(x); }
    static void sincos(double x, double& sin_out, double& cos_out) {
        sin_out = std::sin(x);
        cos_out = std::cos(x);
    }
    static double pow_int(double b, int64_t e) {
        if (e < 0) throw Error("pow_int: negative exponent");
        double acc = 1.0;
        while (e > 0) {
            if (e & 1) acc *= b;
            b *= b;
            e >>= 1;
        }
        return acc;
    }
};

template <>
struct RealOps<DDouble> {
    static DDouble from_i64(int64_t v) { return dd_from_i64(v); }
    static DDouble from_bigint(const BigInt& v) { return dd_from_bigint(v); }
    static DDouble exp(DDouble x) { return dd_exp(x); }
    static void sincos(DDouble x, DDouble& sin_out, DDouble& cos_out) {
        dd_sincos(x, sin_out, cos_out);
    }
    static DDouble pow_int(DDouble b, int64_t e) { return dd_pow_int(b, e); }
};

}  // namespace cspqaoa
