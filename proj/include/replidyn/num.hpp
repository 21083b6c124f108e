#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "replidyn/error.hpp"
#include "replidyn/real.hpp"

// Scalar abstraction used by the numeric kernels. Everything that must run
// both at hardware precision (53-bit) and at extended precision is templated
// on T in {double, Real}; these helpers paper over the differences.
namespace replidyn::num {

double digamma(double t);  // math.cpp; upward recurrence + asymptotic tail

inline double make_like(double v, double) { return v; }
inline Real make_like(double v, const Real& like) { return Real(v, like.prec()); }

inline double to_double(double v) { return v; }
inline double to_double(const Real& v) { return v.to_double(); }

inline bool finite(double v) { return std::isfinite(v); }
inline bool finite(const Real& v) { return v.is_finite(); }

inline int sign3(double d, double tol) { return d > tol ? 1 : (d < -tol ? -1 : 0); }

// Comparison of a - b against a double tolerance without materializing
// intermediate temporaries at double range (the operands can be far below
// the double exponent range).
inline int sign3_diff(double a, double b, double tol) { return sign3(a - b, tol); }
inline int sign3_diff(const Real& a, const Real& b, double tol) {
  if (tol == 0.0) {
    int c = cmp(a, b);
    return c > 0 ? 1 : (c < 0 ? -1 : 0);
  }
  Real d = a - b;
  if (d > tol) return 1;
  Real negtol(-tol, d.prec());
  if (d < negtol) return -1;
  return 0;
}

template <class T>
T l1_norm(std::span<const T> x) {
  T acc = make_like(0.0, x.empty() ? T{} : x[0]);
  for (const T& v : x) acc += (v < make_like(0.0, v)) ? -v : v;
  return acc;
}

template <class T>
T sum(std::span<const T> x) {
  T acc = make_like(0.0, x.empty() ? T{} : x[0]);
  for (const T& v : x) acc += v;
  return acc;
}

using std::exp;
using std::log;
using std::pow;
using std::sqrt;
using std::tgamma;

}  // namespace replidyn::num
