#pragma once

// Friedrichs-type mollifiers psi (unit mass, compactly supported, optionally
// with vanishing moments) and regularisation scales omega(eps).
//
// The profile is stored in normalised coordinates: p on [-1,1] with
// \int p = 1, and psi(x) = p(x/r)/r for support radius r, so that
// psi_omega(x) = psi(x/omega)/omega has effective width omega*r.

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "vws/bump.hpp"

namespace vws {

class Mollifier {
 public:
  // vanishing_moments = M: \int u^a p du = 0 for 1 <= a <= M (plain Friedrichs
  // for M = 0; signed profile for M >= 2).
  explicit Mollifier(double support_radius = 1.0, int vanishing_moments = 0)
      : radius_(support_radius), moments_(vanishing_moments) {
    if (!(support_radius > 0)) throw std::invalid_argument("Mollifier: radius must be positive");
    if (vanishing_moments < 0) throw std::invalid_argument("Mollifier: negative moment order");
    build_profile();
    build_cdf();
  }

  double support_radius() const { return radius_; }
  int vanishing_moments() const { return moments_; }

  // Normalised profile value / derivatives: p^(k)(u), supported on [-1,1].
  double profile(double u, int k = 0) const {
    if (u <= -1.0 || u >= 1.0) return 0.0;
    // p = q(u) B(u) / Z with even polynomial q; Leibniz over (q, B).
    double s = 0.0;
    double binom = 1.0;
    for (int j = 0; j <= k; ++j) {
      const Poly& qj = weight_derivs_[std::size_t(std::min<int>(j, int(weight_derivs_.size()) - 1))];
      if (j < int(weight_derivs_.size())) s += binom * qj.eval(u) * bump_profile(u, k - j);
      binom = binom * double(k - j) / double(j + 1);
    }
    return s / norm_;
  }

  // psi^(k)(x) for psi(x) = p(x/r)/r.
  double value(double x, int k = 0) const { return profile(x / radius_, k) / std::pow(radius_, k + 1); }

  // CDF of the profile: \int_{-1}^{u} p, cubic Hermite on 2049 knots
  // (monotone when the profile is non-negative); error well below 1e-10.
  double cdf(double u) const {
    if (u <= -1.0) return 0.0;
    if (u >= 1.0) return 1.0;
    const double h = 2.0 / (kKnots - 1);
    double s = (u + 1.0) / h;
    int i = std::min(int(s), kKnots - 2);
    double f = s - i;
    double f2 = f * f, f3 = f2 * f;
    double y0 = cdf_[std::size_t(i)], y1 = cdf_[std::size_t(i) + 1];
    double d0 = cdf_slope_[std::size_t(i)] * h, d1 = cdf_slope_[std::size_t(i) + 1] * h;
    return (2 * f3 - 3 * f2 + 1) * y0 + (f3 - 2 * f2 + f) * d0 + (-2 * f3 + 3 * f2) * y1 +
           (f3 - f2) * d1;
  }

  double profile_max() const { return profile_max_; }
  double profile_l2() const { return profile_l2_; }

  // 1-D raw moments \int u^a p(u) du by fine trapezoid (spectral accuracy on
  // C_c^inf integrands).
  double moment(int a) const {
    const int n = 1 << 13;
    const double h = 2.0 / n;
    double s = 0.0;
    for (int i = 1; i < n; ++i) {
      double u = -1.0 + i * h;
      s += std::pow(u, a) * profile(u);
    }
    return s * h;
  }

 private:
  static constexpr int kKnots = 2049;

  void build_profile() {
    // weight polynomial q(u) = a0 + a1 u^2 + ... chosen so that the even raw
    // moments of q*B vanish up to the requested order; odd moments vanish by
    // symmetry.  J+1 unknowns for M = 2J (or 2J+1).
    int J = moments_ / 2;
    std::vector<double> mu(std::size_t(4 * J + 1), 0.0);
    const int n = 1 << 13;
    const double h = 2.0 / n;
    for (int i = 1; i < n; ++i) {
      double u = -1.0 + i * h;
      double b = bump_profile(u);
      double up = 1.0;
      for (int a = 0; a <= 4 * J; ++a) {
        mu[std::size_t(a)] += up * b * h;
        up *= u;
      }
    }
    // solve sum_i a_i mu_{2i+2j} = delta_{j0}
    int m = J + 1;
    std::vector<double> A(std::size_t(m * m)), rhs(std::size_t(m), 0.0);
    rhs[0] = 1.0;
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < m; ++i) A[std::size_t(j * m + i)] = mu[std::size_t(2 * i + 2 * j)];
    gauss_solve(A, rhs, m);
    Poly q;
    q.c.assign(std::size_t(2 * J + 1), 0.0);
    for (int i = 0; i <= J; ++i) q.c[std::size_t(2 * i)] = rhs[std::size_t(i)];
    // precompute q and its derivatives for Leibniz evaluation
    weight_derivs_.clear();
    weight_derivs_.push_back(q);
    for (int k = 0; k < 12; ++k) weight_derivs_.push_back(weight_derivs_.back().derivative());
    // final normalisation: \int q B = 1 (solve already enforces it; renormalise
    // against quadrature residue for exactness to ~1e-15)
    norm_ = 1.0;
    double z = 0.0, pmax = 0.0, pl2 = 0.0;
    for (int i = 1; i < n; ++i) {
      double u = -1.0 + i * h;
      double v = profile(u);
      z += v * h;
      pmax = std::max(pmax, std::abs(v));
      pl2 += v * v * h;
    }
    norm_ = z;
    profile_max_ = pmax / z;
    profile_l2_ = std::sqrt(pl2) / z;
  }

  void build_cdf() {
    cdf_.assign(kKnots, 0.0);
    cdf_slope_.assign(kKnots, 0.0);
    const double h = 2.0 / (kKnots - 1);
    const int sub = 8;
    double acc = 0.0;
    cdf_slope_[0] = profile(-1.0);
    for (int i = 1; i < kKnots; ++i) {
      double x0 = -1.0 + (i - 1) * h;
      // Simpson on sub panels
      double seg = 0.0;
      for (int j = 0; j < sub; ++j) {
        double a = x0 + h * j / sub, b = x0 + h * (j + 1) / sub;
        seg += (b - a) / 6.0 * (profile(a) + 4.0 * profile(0.5 * (a + b)) + profile(b));
      }
      acc += seg;
      cdf_[std::size_t(i)] = acc;
      cdf_slope_[std::size_t(i)] = profile(-1.0 + i * h);
    }
    double total = cdf_.back();
    for (auto& v : cdf_) v /= total;
    for (auto& v : cdf_slope_) v /= total;
  }

  static void gauss_solve(std::vector<double>& A, std::vector<double>& b, int m) {
    for (int c = 0; c < m; ++c) {
      int piv = c;
      for (int r = c + 1; r < m; ++r)
        if (std::abs(A[std::size_t(r * m + c)]) > std::abs(A[std::size_t(piv * m + c)])) piv = r;
      if (A[std::size_t(piv * m + c)] == 0.0)
        throw std::runtime_error("Mollifier: singular moment system");
      if (piv != c) {
        for (int k = 0; k < m; ++k) std::swap(A[std::size_t(c * m + k)], A[std::size_t(piv * m + k)]);
        std::swap(b[std::size_t(c)], b[std::size_t(piv)]);
      }
      for (int r = c + 1; r < m; ++r) {
        double f = A[std::size_t(r * m + c)] / A[std::size_t(c * m + c)];
        for (int k = c; k < m; ++k) A[std::size_t(r * m + k)] -= f * A[std::size_t(c * m + k)];
        b[std::size_t(r)] -= f * b[std::size_t(c)];
      }
    }
    for (int r = m - 1; r >= 0; --r) {
      double s = b[std::size_t(r)];
      for (int k = r + 1; k < m; ++k) s -= A[std::size_t(r * m + k)] * b[std::size_t(k)];
      b[std::size_t(r)] = s / A[std::size_t(r * m + r)];
    }
  }

  double radius_;
  int moments_;
  double norm_ = 1.0;
  double profile_max_ = 0.0;
  double profile_l2_ = 0.0;
  std::vector<Poly> weight_derivs_;
  std::vector<double> cdf_, cdf_slope_;
};

// omega(eps): Power omega = c eps^a, or Log omega = 1/log(1/eps).
struct Scale {
  enum class Kind { power, log };
  Kind kind = Kind::power;
  double a = 1.0;
  double c = 1.0;

  static Scale power(double a_ = 1.0, double c_ = 1.0) {
    if (!(a_ > 0) || !(c_ > 0)) throw std::invalid_argument("Scale: need a, c > 0");
    return Scale{Kind::power, a_, c_};
  }
  static Scale log() { return Scale{Kind::log, 1.0, 1.0}; }

  double omega(double eps) const {
    if (!(eps > 0.0) || eps > 1.0) throw std::invalid_argument("Scale: eps outside (0,1]");
    if (kind == Kind::power) return c * std::pow(eps, a);
    double l = std::log(1.0 / eps);
    if (!(l >= 1.0)) throw std::invalid_argument("Scale: log scale needs eps <= exp(-1)");
    return 1.0 / l;
  }

  bool is_log() const { return kind == Kind::log; }
};

// |\int u^a psi - delta_{a0}| for a = 0..up_to (index 0 reports the mass defect).
inline std::vector<double> moment_defect(const Mollifier& m, int up_to) {
  std::vector<double> out;
  out.reserve(std::size_t(up_to) + 1);
  for (int a = 0; a <= up_to; ++a) {
    double v = m.moment(a);
    out.push_back(std::abs(a == 0 ? v - 1.0 : v));
  }
  return out;
}

}  // namespace vws
