#ifndef SOLVFRAME_DUAL_HPP
#define SOLVFRAME_DUAL_HPP

#include <cmath>
#include <type_traits>

namespace solvframe {

/// Forward-mode dual number a + b*eps with eps^2 = 0.
///
/// Replacing double by Dual<double> in a computation propagates one
/// directional derivative exactly (no truncation error). Nesting
/// Dual<Dual<...>> yields higher-order derivatives; the transcendental
/// overloads below recurse through the nesting.
template <class T>
struct Dual {
  T val{};
  T dot{};

  Dual() = default;
  Dual(const T& v) : val(v), dot(T(0)) {}
  Dual(const T& v, const T& d) : val(v), dot(d) {}

  Dual& operator+=(const Dual& o) { val += o.val; dot += o.dot; return *this; }
  Dual& operator-=(const Dual& o) { val -= o.val; dot -= o.dot; return *this; }
  Dual& operator*=(const Dual& o) {
    dot = dot * o.val + val * o.dot;
    val = val * o.val;
    return *this;
  }
  Dual& operator/=(const Dual& o) {
    dot = (dot * o.val - val * o.dot) / (o.val * o.val);
    val = val / o.val;
    return *this;
  }
};

template <class T> Dual<T> operator+(Dual<T> a, const Dual<T>& b) { return a += b; }
template <class T> Dual<T> operator-(Dual<T> a, const Dual<T>& b) { return a -= b; }
template <class T> Dual<T> operator*(Dual<T> a, const Dual<T>& b) { return a *= b; }
template <class T> Dual<T> operator/(Dual<T> a, const Dual<T>& b) { return a /= b; }
template <class T> Dual<T> operator-(const Dual<T>& a) { return {-a.val, -a.dot}; }
template <class T> Dual<T> operator+(const Dual<T>& a) { return a; }

// Mixed scalar arithmetic keeps expressions like 2.0 * x readable.
template <class T> Dual<T> operator+(const Dual<T>& a, double s) { return a + Dual<T>(T(s)); }
template <class T> Dual<T> operator+(double s, const Dual<T>& a) { return Dual<T>(T(s)) + a; }
template <class T> Dual<T> operator-(const Dual<T>& a, double s) { return a - Dual<T>(T(s)); }
template <class T> Dual<T> operator-(double s, const Dual<T>& a) { return Dual<T>(T(s)) - a; }
template <class T> Dual<T> operator*(const Dual<T>& a, double s) { return a * Dual<T>(T(s)); }
template <class T> Dual<T> operator*(double s, const Dual<T>& a) { return Dual<T>(T(s)) * a; }
template <class T> Dual<T> operator/(const Dual<T>& a, double s) { return a / Dual<T>(T(s)); }
template <class T> Dual<T> operator/(double s, const Dual<T>& a) { return Dual<T>(T(s)) / a; }

template <class T> bool operator==(const Dual<T>& a, const Dual<T>& b) { return a.val == b.val; }
template <class T> bool operator<(const Dual<T>& a, const Dual<T>& b) { return a.val < b.val; }

using std::exp;
using std::log;
using std::sqrt;

template <class T>
Dual<T> exp(const Dual<T>& a) {
  T e = exp(a.val);
  return {e, a.dot * e};
}

template <class T>
Dual<T> log(const Dual<T>& a) {
  return {log(a.val), a.dot / a.val};
}

template <class T>
Dual<T> sqrt(const Dual<T>& a) {
  T r = sqrt(a.val);
  return {r, a.dot / (2.0 * r)};
}

/// Magnitude of the underlying primal value, used for pivot selection
/// and convergence thresholds inside templated linear algebra.
inline double primal(double x) { return x; }
template <class T> double primal(const Dual<T>& x) { return primal(x.val); }

inline double primal_abs(double x) { return std::abs(x); }
template <class T> double primal_abs(const Dual<T>& x) { return primal_abs(x.val); }

using dual = Dual<double>;

}  // namespace solvframe

#endif
