#pragma once

// Independent reference computations for the unit tests. Nothing here calls into
// the library; closed forms are re-evaluated in 50-digit arithmetic.

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>
#include <complex>
#include <random>

namespace oracle {

using mp = boost::multiprecision::cpp_bin_float_50;
using mpint = boost::multiprecision::cpp_int;

struct mpc {
  mp re, im;
};

inline mpc mul(const mpc& a, const mpc& b) { return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re}; }
inline mpc sub(const mpc& a, const mpc& b) { return {a.re - b.re, a.im - b.im}; }
inline mpc conj(const mpc& a) { return {a.re, -a.im}; }
inline mp abs(const mpc& a) { return sqrt(a.re * a.re + a.im * a.im); }
inline mpc div(const mpc& a, const mpc& b) {
  const mp d = b.re * b.re + b.im * b.im;
  return {(a.re * b.re + a.im * b.im) / d, (a.im * b.re - a.re * b.im) / d};
}

// ln 1/(|x-y| |1 - x conj(y)|)
inline mp green(const mpc& x, const mpc& y) {
  const mpc one{1, 0};
  return -log(abs(sub(x, y)) * abs(sub(one, mul(x, conj(y)))));
}

inline mpc mobius(const mpc& a, const mp& alpha, const mpc& x) {
  const mpc one{1, 0};
  const mpc rot{cos(alpha), sin(alpha)};
  return mul(rot, div(sub(x, a), sub(one, mul(conj(a), x))));
}

// e^{i alpha} (1 - |a|^2) / (1 - conj(a) x)^2
inline mpc mobius_derivative(const mpc& a, const mp& alpha, const mpc& x) {
  const mpc one{1, 0};
  const mpc rot{cos(alpha), sin(alpha)};
  const mpc d = sub(one, mul(conj(a), x));
  return div(mul(rot, mpc{1 - (a.re * a.re + a.im * a.im), 0}), mul(d, d));
}

inline mpint factorial(unsigned long k) {
  mpint r = 1;
  for (unsigned long i = 2; i <= k; ++i) r *= i;
  return r;
}

inline mpint pow3(unsigned long k) {
  mpint r = 1;
  for (unsigned long i = 0; i < k; ++i) r *= 3;
  return r;
}

// 3^{n-p} (3p)! (2n+p-1)! / (p! (2p-1)! (n-p+1)! (n+2p)!), with the remainder.
inline std::pair<mpint, mpint> quadrangulations(unsigned long n, unsigned long p) {
  if (n + 1 < p) return {0, 0};
  const mpint num = pow3(n) * factorial(3 * p) * factorial(2 * n + p - 1);
  const mpint den = pow3(p) * factorial(p) * factorial(2 * p - 1) * factorial(n - p + 1) * factorial(n + 2 * p);
  return {num / den, num % den};
}

inline std::complex<double> random_point(std::mt19937_64& g, double rmax) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return std::polar(rmax * std::sqrt(u(g)), 2.0 * M_PI * u(g));
}

}  // namespace oracle
