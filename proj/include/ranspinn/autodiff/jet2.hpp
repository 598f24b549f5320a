#pragma once

// Second-order forward-mode jets in the two spatial coordinates.
//
// A Jet2<T> carries f, df/dx, df/dy, d2f/dx2, d2f/dy2 and d2f/dxdy at one point.
// T is either double or ad::Var; with Var every jet component is recorded on a
// ParamTape so reverse accumulation runs through the spatial derivatives.

#include <cmath>
#include <string>
#include <type_traits>

#include "ranspinn/common/error.hpp"

namespace ranspinn::ad {

inline double primal(double v) noexcept { return v; }

/// ln(1 + e^v), evaluated without overflow.
inline double softplus(double v) {
    return v > 0.0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v));
}

template <class T>
struct Jet2 {
    T value{};
    T dx{};
    T dy{};
    T dxx{};
    T dyy{};
    T dxy{};

    Jet2() = default;
    Jet2(T v) : value(v), dx(0.0), dy(0.0), dxx(0.0), dyy(0.0), dxy(0.0) {}  // NOLINT: constants lift implicitly
    Jet2(T v, T x, T y, T xx, T yy, T xy) : value(v), dx(x), dy(y), dxx(xx), dyy(yy), dxy(xy) {}

    static Jet2 constant(T v) { return Jet2(v); }
    static Jet2 seed_x(T x) { return Jet2(x, T(1.0), T(0.0), T(0.0), T(0.0), T(0.0)); }
    static Jet2 seed_y(T y) { return Jet2(y, T(0.0), T(1.0), T(0.0), T(0.0), T(0.0)); }

    Jet2& operator+=(const Jet2& o) { return *this = *this + o; }
    Jet2& operator-=(const Jet2& o) { return *this = *this - o; }
    Jet2& operator*=(const Jet2& o) { return *this = *this * o; }
};

/// Jets of the three network inputs: x and y are seeded, Re is passive.
template <class T>
struct SpatialPoint {
    Jet2<T> x;
    Jet2<T> y;
    Jet2<T> re;
};

template <class T>
SpatialPoint<T> seed_point(double x, double y, double re) {
    return {Jet2<T>::seed_x(T(x)), Jet2<T>::seed_y(T(y)), Jet2<T>::constant(T(re))};
}

template <class T>
bool all_finite(const Jet2<T>& a) {
    using std::isfinite;
    return isfinite(primal(a.value)) && isfinite(primal(a.dx)) && isfinite(primal(a.dy)) &&
           isfinite(primal(a.dxx)) && isfinite(primal(a.dyy)) && isfinite(primal(a.dxy));
}

// ---------------------------------------------------------------------------
// Linear operations
// ---------------------------------------------------------------------------

template <class T>
Jet2<T> operator+(const Jet2<T>& a, const Jet2<T>& b) {
    return {a.value + b.value, a.dx + b.dx, a.dy + b.dy, a.dxx + b.dxx, a.dyy + b.dyy, a.dxy + b.dxy};
}

template <class T>
Jet2<T> operator-(const Jet2<T>& a, const Jet2<T>& b) {
    return {a.value - b.value, a.dx - b.dx, a.dy - b.dy, a.dxx - b.dxx, a.dyy - b.dyy, a.dxy - b.dxy};
}

template <class T>
Jet2<T> operator-(const Jet2<T>& a) {
    return {-a.value, -a.dx, -a.dy, -a.dxx, -a.dyy, -a.dxy};
}

template <class T>
Jet2<T> operator+(const Jet2<T>& a, const T& c) {
    return {a.value + c, a.dx, a.dy, a.dxx, a.dyy, a.dxy};
}

template <class T>
Jet2<T> operator+(const T& c, const Jet2<T>& a) {
    return a + c;
}

template <class T>
Jet2<T> operator-(const Jet2<T>& a, const T& c) {
    return {a.value - c, a.dx, a.dy, a.dxx, a.dyy, a.dxy};
}

template <class T>
Jet2<T> operator-(const T& c, const Jet2<T>& a) {
    return {c - a.value, -a.dx, -a.dy, -a.dxx, -a.dyy, -a.dxy};
}

template <class T>
Jet2<T> operator*(const Jet2<T>& a, const T& c) {
    return {a.value * c, a.dx * c, a.dy * c, a.dxx * c, a.dyy * c, a.dxy * c};
}

template <class T>
Jet2<T> operator*(const T& c, const Jet2<T>& a) {
    return a * c;
}

// Mixed double/Var arithmetic for jets over Var.
template <class T>
    requires(!std::is_same_v<T, double>)
Jet2<T> operator*(const Jet2<T>& a, double c) {
    return {a.value * c, a.dx * c, a.dy * c, a.dxx * c, a.dyy * c, a.dxy * c};
}

template <class T>
    requires(!std::is_same_v<T, double>)
Jet2<T> operator*(double c, const Jet2<T>& a) {
    return a * c;
}

template <class T>
    requires(!std::is_same_v<T, double>)
Jet2<T> operator+(const Jet2<T>& a, double c) {
    return {a.value + c, a.dx, a.dy, a.dxx, a.dyy, a.dxy};
}

template <class T>
    requires(!std::is_same_v<T, double>)
Jet2<T> operator-(const Jet2<T>& a, double c) {
    return {a.value - c, a.dx, a.dy, a.dxx, a.dyy, a.dxy};
}

template <class T>
    requires(!std::is_same_v<T, double>)
Jet2<T> operator-(double c, const Jet2<T>& a) {
    return {c - a.value, -a.dx, -a.dy, -a.dxx, -a.dyy, -a.dxy};
}

// ---------------------------------------------------------------------------
// Product rule
// ---------------------------------------------------------------------------

template <class T>
Jet2<T> operator*(const Jet2<T>& a, const Jet2<T>& b) {
    return {a.value * b.value,
            a.dx * b.value + a.value * b.dx,
            a.dy * b.value + a.value * b.dy,
            a.dxx * b.value + (a.dx * b.dx) * 2.0 + a.value * b.dxx,
            a.dyy * b.value + (a.dy * b.dy) * 2.0 + a.value * b.dyy,
            a.dxy * b.value + a.dx * b.dy + a.dy * b.dx + a.value * b.dxy};
}

// ---------------------------------------------------------------------------
// Chain rule for scalar functions: given f(a), f'(a), f''(a) at a.value.
// ---------------------------------------------------------------------------

template <class T>
Jet2<T> compose(const Jet2<T>& a, const T& f, const T& f1, const T& f2) {
    return {f,
            f1 * a.dx,
            f1 * a.dy,
            f1 * a.dxx + f2 * (a.dx * a.dx),
            f1 * a.dyy + f2 * (a.dy * a.dy),
            f1 * a.dxy + f2 * (a.dx * a.dy)};
}

namespace detail {
inline void require_finite(double v, const char* op) {
    if (!std::isfinite(v)) throw DomainError(std::string(op) + ": result is not finite");
}
}  // namespace detail

template <class T>
Jet2<T> reciprocal(const Jet2<T>& a) {
    if (primal(a.value) == 0.0) throw DomainError("div: division by a jet with zero value");
    const T r = T(1.0) / a.value;
    const T r2 = r * r;
    return compose(a, r, -r2, r2 * r * 2.0);
}

template <class T>
Jet2<T> operator/(const Jet2<T>& a, const Jet2<T>& b) {
    return a * reciprocal(b);
}

template <class T>
Jet2<T> operator/(const Jet2<T>& a, const T& c) {
    if (primal(c) == 0.0) throw DomainError("div: division by zero");
    return a * (T(1.0) / c);
}

template <class T>
    requires(!std::is_same_v<T, double>)
Jet2<T> operator/(const Jet2<T>& a, double c) {
    if (c == 0.0) throw DomainError("div: division by zero");
    return a * (1.0 / c);
}

template <class T>
Jet2<T> operator/(const T& c, const Jet2<T>& a) {
    return reciprocal(a) * c;
}

template <class T>
Jet2<T> tanh(const Jet2<T>& a) {
    using std::tanh;
    const T s = tanh(a.value);
    const T s1 = T(1.0) - s * s;
    return compose(a, s, s1, s * s1 * -2.0);
}

template <class T>
Jet2<T> exp(const Jet2<T>& a) {
    using std::exp;
    const T e = exp(a.value);
    detail::require_finite(primal(e), "exp");
    return compose(a, e, e, e);
}

template <class T>
Jet2<T> log(const Jet2<T>& a) {
    using std::log;
    if (!(primal(a.value) > 0.0)) throw DomainError("ln: argument must be positive");
    const T r = T(1.0) / a.value;
    return compose(a, log(a.value), r, -(r * r));
}

template <class T>
Jet2<T> sqrt(const Jet2<T>& a) {
    using std::sqrt;
    if (!(primal(a.value) > 0.0)) throw DomainError("sqrt: argument must be positive");
    const T s = sqrt(a.value);
    const T d1 = T(0.5) / s;
    return compose(a, s, d1, -(d1 / a.value) * 0.5);
}

/// a^p for a constant exponent. Non-integer exponents require a positive base.
template <class T>
Jet2<T> pow(const Jet2<T>& a, double p) {
    using std::pow;
    const double v = primal(a.value);
    if (std::floor(p) != p && !(v > 0.0)) throw DomainError("pow: non-integer power of a nonpositive value");
    if (v == 0.0 && p < 2.0) throw DomainError("pow: derivative singular at zero");
    const T f = pow(a.value, p);
    const T f1 = pow(a.value, p - 1.0) * p;
    const T f2 = pow(a.value, p - 2.0) * (p * (p - 1.0));
    detail::require_finite(primal(f), "pow");
    return compose(a, f, f1, f2);
}

/// a^b for a jet exponent, via exp(b ln a).
template <class T>
Jet2<T> pow(const Jet2<T>& a, const Jet2<T>& b) {
    if (!(primal(a.value) > 0.0)) throw DomainError("pow: base must be positive for a jet exponent");
    return exp(b * log(a));
}

template <class T>
Jet2<T> sin(const Jet2<T>& a) {
    using std::cos;
    using std::sin;
    const T s = sin(a.value);
    return compose(a, s, cos(a.value), -s);
}

template <class T>
Jet2<T> cos(const Jet2<T>& a) {
    using std::cos;
    using std::sin;
    const T c = cos(a.value);
    return compose(a, c, -sin(a.value), -c);
}

/// ln(1 + e^a), evaluated without overflow.
template <class T>
Jet2<T> softplus(const Jet2<T>& a) {
    using std::exp;
    using std::log;
    const double v = primal(a.value);
    T f;
    T sig;
    if (v > 0.0) {
        const T e = exp(-a.value);
        f = a.value + log(e + 1.0);
        sig = T(1.0) / (e + 1.0);
    } else {
        const T e = exp(a.value);
        f = log(e + 1.0);
        sig = e / (e + 1.0);
    }
    return compose(a, f, sig, sig * (T(1.0) - sig));
}

/// Returns `a` when its value exceeds `floor`, otherwise the constant floor.
template <class T>
Jet2<T> floor_at(const Jet2<T>& a, double floor) {
    if (primal(a.value) > floor) return a;
    return Jet2<T>::constant(T(floor));
}

}  // namespace ranspinn::ad
