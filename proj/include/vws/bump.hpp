#pragma once

// Smooth compactly supported primitives shared by the coefficient DSL and the
// mollifier machinery.  The base profile is
//
//   B(u) = exp(-1/(1-u^2))   for |u| < 1,   B(u) = 0 otherwise,
//
// whose k-th derivative has the closed form B^(k)(u) = P_k(u)/(1-u^2)^(2k) B(u)
// with polynomials P_k obtained from the recurrence
//
//   P_{k+1} = (P_k' (1-u^2) + 4k u P_k)(1-u^2) - 2u P_k,   P_0 = 1.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace vws {

// Dense univariate polynomial, coefficient of u^k at index k.
struct Poly {
  std::vector<double> c;

  Poly() = default;
  explicit Poly(std::vector<double> coeffs) : c(std::move(coeffs)) {}

  static Poly constant(double v) { return Poly({v}); }

  double eval(double u) const {
    double r = 0.0;
    for (std::size_t i = c.size(); i-- > 0;) r = r * u + c[i];
    return r;
  }

  Poly derivative() const {
    if (c.size() <= 1) return Poly({0.0});
    Poly d;
    d.c.resize(c.size() - 1);
    for (std::size_t i = 1; i < c.size(); ++i) d.c[i - 1] = c[i] * double(i);
    return d;
  }

  friend Poly operator+(const Poly& a, const Poly& b) {
    Poly r;
    r.c.resize(std::max(a.c.size(), b.c.size()), 0.0);
    for (std::size_t i = 0; i < a.c.size(); ++i) r.c[i] += a.c[i];
    for (std::size_t i = 0; i < b.c.size(); ++i) r.c[i] += b.c[i];
    return r;
  }

  friend Poly operator*(const Poly& a, const Poly& b) {
    Poly r;
    if (a.c.empty() || b.c.empty()) return r;
    r.c.assign(a.c.size() + b.c.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.c.size(); ++i)
      for (std::size_t j = 0; j < b.c.size(); ++j) r.c[i + j] += a.c[i] * b.c[j];
    return r;
  }

  friend Poly operator*(double s, const Poly& a) {
    Poly r = a;
    for (auto& v : r.c) v *= s;
    return r;
  }
};

namespace detail {

inline const std::vector<Poly>& bump_numerators(int up_to) {
  static std::vector<Poly> cache = {Poly::constant(1.0)};
  const Poly one_minus_u2({1.0, 0.0, -1.0});
  const Poly u({0.0, 1.0});
  while (int(cache.size()) <= up_to) {
    int k = int(cache.size()) - 1;
    const Poly& pk = cache.back();
    Poly next = (pk.derivative() * one_minus_u2 + (4.0 * double(k)) * (u * pk)) * one_minus_u2 +
                (-2.0) * (u * pk);
    cache.push_back(next);
  }
  return cache;
}

}  // namespace detail

// k-th derivative of B at u.  Exact (no finite differences); the rational
// prefactor underflows gracefully toward |u| -> 1 because B decays faster
// than any power of (1-u^2).
inline double bump_profile(double u, int k = 0) {
  if (k < 0) throw std::invalid_argument("bump_profile: negative derivative order");
  double w = 1.0 - u * u;
  if (w <= 0.0) return 0.0;
  double base = std::exp(-1.0 / w);
  if (k == 0) return base;
  // Evaluate P_k(u)/w^{2k} * base in log-safe order: base already kills the pole.
  const Poly& pk = detail::bump_numerators(k)[std::size_t(k)];
  double denom = std::pow(w, 2 * k);
  if (denom == 0.0) return 0.0;
  return pk.eval(u) / denom * base;
}

// Integral of B over [-1,1]; fine trapezoid converges spectrally for C_c^inf data.
inline double bump_profile_integral() {
  static const double value = [] {
    const int n = 1 << 14;
    const double h = 2.0 / n;
    double s = 0.0;
    for (int i = 1; i < n; ++i) s += bump_profile(-1.0 + i * h);
    return s * h;
  }();
  return value;
}

// C^inf transition from 1 to 0 across [a, b]: value 1 for x <= a, 0 for x >= b.
// Built as 1 minus the CDF of a unit-mass bump supported on [a, b], so its
// derivatives are available in closed form through bump_profile.
class SmoothCutoff {
 public:
  SmoothCutoff(double a, double b) : a_(a), b_(b), mid_(0.5 * (a + b)), rad_(0.5 * (b - a)) {
    if (!(b > a)) throw std::invalid_argument("SmoothCutoff: need b > a");
  }

  double operator()(double x) const {
    if (x <= a_) return 1.0;
    if (x >= b_) return 0.0;
    return 1.0 - cdf((x - mid_) / rad_);
  }

  // k-th derivative (k >= 1): -(1/(Z rad^k)) B^(k-1)((x-mid)/rad).
  double derivative(double x, int k) const {
    if (k == 0) return (*this)(x);
    if (x <= a_ || x >= b_) return 0.0;
    double u = (x - mid_) / rad_;
    return -bump_profile(u, k - 1) / (bump_profile_integral() * std::pow(rad_, k));
  }

  double lo() const { return a_; }
  double hi() const { return b_; }

 private:
  static double cdf(double u) {
    // \int_{-1}^{u} B / \int B, fine trapezoid on the fly is too slow; use a
    // shared precomputed table (4097 knots, Hermite slopes = B).
    static const int kn = 4097;
    static const std::vector<double> table = [] {
      std::vector<double> t(kn, 0.0);
      const double h = 2.0 / (kn - 1);
      const int sub = 16;
      double acc = 0.0;
      for (int i = 1; i < kn; ++i) {
        double x0 = -1.0 + (i - 1) * h;
        double seg = 0.5 * bump_profile(x0) + 0.5 * bump_profile(x0 + h);
        for (int j = 1; j < sub; ++j) seg += bump_profile(x0 + h * j / sub);
        acc += seg * h / sub;
        t[std::size_t(i)] = acc;
      }
      for (auto& v : t) v /= acc;  // exact unit mass for the table itself
      return t;
    }();
    if (u <= -1.0) return 0.0;
    if (u >= 1.0) return 1.0;
    const double h = 2.0 / (kn - 1);
    double s = (u + 1.0) / h;
    int i = std::min(int(s), kn - 2);
    double f = s - i;
    double y0 = table[std::size_t(i)], y1 = table[std::size_t(i) + 1];
    double d0 = bump_profile(-1.0 + i * h) / bump_profile_integral() * h;
    double d1 = bump_profile(-1.0 + (i + 1) * h) / bump_profile_integral() * h;
    double f2 = f * f, f3 = f2 * f;
    return (2 * f3 - 3 * f2 + 1) * y0 + (f3 - 2 * f2 + f) * d0 + (-2 * f3 + 3 * f2) * y1 +
           (f3 - f2) * d1;
  }

  double a_, b_, mid_, rad_;
};

}  // namespace vws
