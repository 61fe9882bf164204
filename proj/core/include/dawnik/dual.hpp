#pragma once

// Forward-mode dual numbers with a fixed-capacity gradient.
//
// A Dual<N> carries a value and the partial derivatives with respect to up to
// N seeded inputs. Arithmetic propagates derivatives exactly (to rounding), so
// evaluating a residual on Dual inputs yields the residual and its Jacobian
// row in one pass.

#include <array>
#include <cmath>
#include <limits>
#include <ostream>

#include <Eigen/Core>

namespace dawnik {

template <int N>
struct Dual {
  static_assert(N > 0, "Dual needs at least one derivative slot");

  double v{0.0};
  std::array<double, N> d{};

  constexpr Dual() = default;
  // Implicit: constants mix freely with dual values.
  constexpr Dual(double value) : v(value) {}  // NOLINT(google-explicit-constructor)

  static Dual variable(double value, int slot) {
    Dual x(value);
    x.d[static_cast<std::size_t>(slot)] = 1.0;
    return x;
  }

  Dual& operator+=(const Dual& o) {
    v += o.v;
    for (int i = 0; i < N; ++i) d[i] += o.d[i];
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    v -= o.v;
    for (int i = 0; i < N; ++i) d[i] -= o.d[i];
    return *this;
  }
  Dual& operator*=(const Dual& o) {
    for (int i = 0; i < N; ++i) d[i] = d[i] * o.v + v * o.d[i];
    v *= o.v;
    return *this;
  }
  Dual& operator/=(const Dual& o) {
    const double inv = 1.0 / o.v;
    const double q = v * inv;
    for (int i = 0; i < N; ++i) d[i] = (d[i] - q * o.d[i]) * inv;
    v = q;
    return *this;
  }
  Dual& operator+=(double c) {
    v += c;
    return *this;
  }
  Dual& operator-=(double c) {
    v -= c;
    return *this;
  }
  Dual& operator*=(double c) {
    v *= c;
    for (auto& x : d) x *= c;
    return *this;
  }
  Dual& operator/=(double c) { return *this *= (1.0 / c); }
};

// Chain rule helper: result value f, derivative df/dx applied to x's gradient.
template <int N>
inline Dual<N> chain(const Dual<N>& x, double f, double dfdx) {
  Dual<N> r(f);
  for (int i = 0; i < N; ++i) r.d[i] = dfdx * x.d[i];
  return r;
}

template <int N>
inline Dual<N> operator-(Dual<N> a) {
  a.v = -a.v;
  for (auto& x : a.d) x = -x;
  return a;
}
template <int N>
inline Dual<N> operator+(const Dual<N>& a) {
  return a;
}

template <int N>
inline Dual<N> operator+(Dual<N> a, const Dual<N>& b) {
  return a += b;
}
template <int N>
inline Dual<N> operator-(Dual<N> a, const Dual<N>& b) {
  return a -= b;
}
template <int N>
inline Dual<N> operator*(Dual<N> a, const Dual<N>& b) {
  return a *= b;
}
template <int N>
inline Dual<N> operator/(Dual<N> a, const Dual<N>& b) {
  return a /= b;
}

template <int N>
inline Dual<N> operator+(Dual<N> a, double c) {
  return a += c;
}
template <int N>
inline Dual<N> operator+(double c, Dual<N> a) {
  return a += c;
}
template <int N>
inline Dual<N> operator-(Dual<N> a, double c) {
  return a -= c;
}
template <int N>
inline Dual<N> operator-(double c, const Dual<N>& a) {
  return -a + c;
}
template <int N>
inline Dual<N> operator*(Dual<N> a, double c) {
  return a *= c;
}
template <int N>
inline Dual<N> operator*(double c, Dual<N> a) {
  return a *= c;
}
template <int N>
inline Dual<N> operator/(Dual<N> a, double c) {
  return a /= c;
}
template <int N>
inline Dual<N> operator/(double c, const Dual<N>& a) {
  const double inv = 1.0 / a.v;
  return chain(a, c * inv, -c * inv * inv);
}

// Comparisons look at the value part only.
template <int N>
inline bool operator<(const Dual<N>& a, const Dual<N>& b) {
  return a.v < b.v;
}
template <int N>
inline bool operator>(const Dual<N>& a, const Dual<N>& b) {
  return a.v > b.v;
}
template <int N>
inline bool operator<=(const Dual<N>& a, const Dual<N>& b) {
  return a.v <= b.v;
}
template <int N>
inline bool operator>=(const Dual<N>& a, const Dual<N>& b) {
  return a.v >= b.v;
}
template <int N>
inline bool operator==(const Dual<N>& a, const Dual<N>& b) {
  return a.v == b.v;
}
template <int N>
inline bool operator!=(const Dual<N>& a, const Dual<N>& b) {
  return a.v != b.v;
}
template <int N>
inline bool operator<(const Dual<N>& a, double b) {
  return a.v < b;
}
template <int N>
inline bool operator>(const Dual<N>& a, double b) {
  return a.v > b;
}
template <int N>
inline bool operator<=(const Dual<N>& a, double b) {
  return a.v <= b;
}
template <int N>
inline bool operator>=(const Dual<N>& a, double b) {
  return a.v >= b;
}
template <int N>
inline bool operator<(double a, const Dual<N>& b) {
  return a < b.v;
}
template <int N>
inline bool operator>(double a, const Dual<N>& b) {
  return a > b.v;
}

template <int N>
inline Dual<N> sqrt(const Dual<N>& x) {
  const double s = std::sqrt(x.v);
  return chain(x, s, 0.5 / s);
}
template <int N>
inline Dual<N> sin(const Dual<N>& x) {
  return chain(x, std::sin(x.v), std::cos(x.v));
}
template <int N>
inline Dual<N> cos(const Dual<N>& x) {
  return chain(x, std::cos(x.v), -std::sin(x.v));
}
template <int N>
inline Dual<N> log(const Dual<N>& x) {
  return chain(x, std::log(x.v), 1.0 / x.v);
}
template <int N>
inline Dual<N> log1p(const Dual<N>& x) {
  return chain(x, std::log1p(x.v), 1.0 / (1.0 + x.v));
}
template <int N>
inline Dual<N> exp(const Dual<N>& x) {
  const double e = std::exp(x.v);
  return chain(x, e, e);
}
template <int N>
inline Dual<N> abs(const Dual<N>& x) {
  return x.v < 0.0 ? -x : x;
}
template <int N>
inline Dual<N> atan2(const Dual<N>& y, const Dual<N>& x) {
  const double den = x.v * x.v + y.v * y.v;
  Dual<N> r(std::atan2(y.v, x.v));
  for (int i = 0; i < N; ++i) r.d[i] = (x.v * y.d[i] - y.v * x.d[i]) / den;
  return r;
}
template <int N>
inline bool isfinite(const Dual<N>& x) {
  if (!std::isfinite(x.v)) return false;
  for (double g : x.d)
    if (!std::isfinite(g)) return false;
  return true;
}

template <int N>
std::ostream& operator<<(std::ostream& os, const Dual<N>& x) {
  os << x.v << " [";
  for (int i = 0; i < N; ++i) os << (i ? " " : "") << x.d[i];
  return os << "]";
}

// Scalar helpers so templated code can be written once for double and Dual.
inline double value_of(double x) { return x; }
template <int N>
inline double value_of(const Dual<N>& x) {
  return x.v;
}

}  // namespace dawnik

namespace Eigen {

template <int N>
struct NumTraits<dawnik::Dual<N>> : GenericNumTraits<double> {
  using Real = dawnik::Dual<N>;
  using NonInteger = dawnik::Dual<N>;
  using Nested = dawnik::Dual<N>;
  using Literal = dawnik::Dual<N>;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = N + 1,
    AddCost = N + 1,
    MulCost = 2 * N + 1,
  };
  static Real epsilon() { return Real(std::numeric_limits<double>::epsilon()); }
  static Real dummy_precision() { return Real(1e-12); }
  static Real highest() { return Real(std::numeric_limits<double>::max()); }
  static Real lowest() { return Real(std::numeric_limits<double>::lowest()); }
  static int digits10() { return std::numeric_limits<double>::digits10; }
};

template <int N, typename BinaryOp>
struct ScalarBinaryOpTraits<dawnik::Dual<N>, double, BinaryOp> {
  using ReturnType = dawnik::Dual<N>;
};
template <int N, typename BinaryOp>
struct ScalarBinaryOpTraits<double, dawnik::Dual<N>, BinaryOp> {
  using ReturnType = dawnik::Dual<N>;
};

}  // namespace Eigen
