#pragma once

// Regularised coefficients: smooth functions (with derivatives) produced from
// a CoeffExpr by mollification at width omega(eps).
//
//   - Heaviside atoms evaluate through the mollifier CDF (exact convolution);
//   - Dirac derivatives evaluate as (omega r)^{-1-m} psi^(m)(./(omega r));
//   - smooth parts pass through unchanged ("identity-on-smooth"), go through a
//     discrete convolution ("full"), or stay raw ("none", the classical
//     reference used by consistency runs).
//
// Non-compact smooth parts and Heaviside tails are cut to zero across
// [W - 0.5, W] with a C^inf transition, W the declared truncation window.

#include <array>
#include <complex>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "vws/expr.hpp"
#include "vws/mollifier.hpp"

namespace vws {

enum class SmoothingMode { none, identity_on_smooth, full };

using MultiIndex = std::array<int, 2>;  // derivative orders in x1, x2

inline int order_of(const MultiIndex& a) { return a[0] + a[1]; }

class RegularizedCoefficient {
 public:
  RegularizedCoefficient() : impl_(nullptr) {}

  RegularizedCoefficient(CoeffExpr src, Mollifier psi, Scale scale, double eps, int dim,
                         int max_order = -1, SmoothingMode mode = SmoothingMode::identity_on_smooth,
                         std::optional<double> omega_override = std::nullopt) {
    if (!(eps > 0.0) || eps > 1.0)
      throw std::invalid_argument("regularize: eps must lie in (0,1]");
    if (dim < 1 || dim > 2) throw std::invalid_argument("regularize: dimension must be 1 or 2");
    auto impl = std::make_shared<Impl>();
    impl->src = std::move(src);
    impl->psi = std::move(psi);
    impl->eps = eps;
    impl->omega = omega_override ? *omega_override
                                 : (mode == SmoothingMode::none ? 0.0 : scale.omega(eps));
    impl->dim = dim;
    impl->mode = mode;
    impl->max_order = max_order >= 0 ? max_order : 2 * dim + 2;
    impl->build();
    impl_ = std::move(impl);
  }

  bool is_zero() const { return !impl_ || impl_->src.is_identically_zero(); }
  double omega() const { return impl_ ? impl_->omega : 0.0; }
  double eps() const { return impl_ ? impl_->eps : 1.0; }
  int max_order() const { return impl_ ? impl_->max_order : 0; }
  int dim() const { return impl_ ? impl_->dim : 1; }
  const CoeffExpr& source() const {
    static const CoeffExpr zero{};
    return impl_ ? impl_->src : zero;
  }
  SmoothingMode mode() const { return impl_ ? impl_->mode : SmoothingMode::none; }
  bool depends_on_t() const { return impl_ && impl_->src.depends_on_t(); }
  bool depends_on_x() const {
    if (!impl_) return false;
    if (exprs::depends_on(*impl_->src.smooth_part(), "x1") ||
        exprs::depends_on(*impl_->src.smooth_part(), "x2"))
      return true;
    for (const Atom& a : impl_->src.atoms())
      if (a.variable != "t") return true;
    return false;
  }
  bool has_atoms() const { return impl_ && impl_->src.has_atoms(); }
  double mollifier_radius() const { return impl_ ? impl_->psi.support_radius() : 1.0; }
  const Mollifier* mollifier() const { return impl_ ? &impl_->psi : nullptr; }

  std::complex<double> eval(double t, const double* x, const MultiIndex& alpha = {0, 0}) const {
    if (!impl_) return {0.0, 0.0};
    return impl_->eval(t, x, alpha);
  }
  std::complex<double> eval1(double t, double x, int dx = 0) const {
    MultiIndex a{dx, 0};
    return eval(t, &x, a);
  }

 private:
  struct Impl {
    CoeffExpr src;
    Mollifier psi{1.0, 0};
    double eps = 1.0;
    double omega = 0.0;
    int dim = 1;
    SmoothingMode mode = SmoothingMode::identity_on_smooth;
    int max_order = 4;

    bool apply_cutoff = false;
    std::optional<SmoothCutoff> cutoff;
    // symbolic x-derivatives of the smooth part, index (i + j*(max_order+1))
    std::vector<ExprPtr> smooth_derivs;
    // full-mode 1-D convolution tables, one per derivative order 0..max_order+1
    bool have_tables = false;
    double table_lo = 0.0, table_h = 0.0;
    std::vector<std::vector<double>> conv_tables;

    void build() {
      SupportInterval s = detail::smooth_support(*src.smooth_part());
      bool smooth_unbounded = !s.empty && !s.bounded;
      bool heaviside = std::any_of(src.atoms().begin(), src.atoms().end(), [](const Atom& a) {
        return a.kind == AtomKind::heaviside && a.variable != "t";
      });
      apply_cutoff = smooth_unbounded || heaviside;
      if (apply_cutoff)
        cutoff.emplace(src.window() - CoeffExpr::kTransitionWidth, src.window());

      smooth_derivs.resize(std::size_t((max_order + 1) * (max_order + 1)));
      for (int j = 0; j <= max_order; ++j)
        for (int i = 0; i <= max_order; ++i) {
          if (i + j > max_order && !(i == 0 && j == 0)) continue;
          ExprPtr d = src.smooth_part();
          for (int k = 0; k < i; ++k) d = exprs::diff(d, "x1");
          for (int k = 0; k < j; ++k) d = exprs::diff(d, "x2");
          smooth_derivs[std::size_t(i + j * (max_order + 1))] = d;
        }

      if (mode == SmoothingMode::full && !exprs::is_zero(src.smooth_part())) {
        if (dim != 1)
          throw std::runtime_error("regularize: full smoothing mode is 1-D only");
        if (!src.depends_on_t()) build_tables();
      }
    }

    // cutoff factor and derivatives in one coordinate (applied to |x_j|)
    double chi(double xj, int k) const {
      if (!apply_cutoff) return k == 0 ? 1.0 : 0.0;
      double s = xj < 0 ? -1.0 : 1.0;
      double v = cutoff->derivative(std::abs(xj), k);
      return (k % 2 == 1) ? s * v : v;
    }

    std::complex<double> smooth_raw(double t, const double* x, const MultiIndex& a) const {
      const ExprPtr& d = smooth_derivs[std::size_t(a[0] + a[1] * (max_order + 1))];
      EvalPoint p{t, x, dim};
      return exprs::eval(*d, p);
    }

    // d^alpha of (chi(x1) chi(x2) u)(x) via tensor Leibniz
    std::complex<double> smooth_cut(double t, const double* x, const MultiIndex& a) const {
      if (!apply_cutoff) return smooth_raw(t, x, a);
      std::complex<double> total{0.0, 0.0};
      for (int i = 0; i <= a[0]; ++i) {
        double bi = binom(a[0], i) * chi(x[0], i);
        if (bi == 0.0) continue;
        if (dim == 1) {
          total += bi * smooth_raw(t, x, {a[0] - i, 0});
        } else {
          for (int j = 0; j <= a[1]; ++j) {
            double bj = binom(a[1], j) * chi(x[1], j);
            if (bj == 0.0) continue;
            total += bi * bj * smooth_raw(t, x, {a[0] - i, a[1] - j});
          }
        }
      }
      return total;
    }

    static double binom(int n, int k) {
      double r = 1.0;
      for (int i = 0; i < k; ++i) r = r * double(n - i) / double(i + 1);
      return r;
    }

    // regularised atom in its variable, derivative order k (already projected)
    double atom_value(const Atom& a, double v, int k) const {
      double wr = omega * psi.support_radius();
      if (a.kind == AtomKind::heaviside) {
        if (mode == SmoothingMode::none) {
          if (k > 0)
            throw eval_error("derivative of a raw Heaviside coefficient is not defined");
          return v >= a.location ? 1.0 : 0.0;
        }
        double u = (v - a.location) / wr;
        if (k == 0) return psi.cdf(u);
        return psi.profile(u, k - 1) / std::pow(wr, k);
      }
      // Dirac derivative of order m: (wr)^{-1-m-k} psi^(m+k)((v-loc)/wr)
      if (mode == SmoothingMode::none)
        throw eval_error("Dirac atom is not pointwise-evaluable without regularisation");
      double u = (v - a.location) / wr;
      return psi.profile(u, a.order + k) / std::pow(wr, a.order + k + 1);
    }

    std::complex<double> atoms_part(double t, const double* x, const MultiIndex& a) const {
      std::complex<double> total{0.0, 0.0};
      for (const Atom& atom : src.atoms()) {
        double v;
        int k;       // derivative order in the atom variable
        int other;   // derivative order in the remaining x variables
        int xidx = -1;
        if (atom.variable == "t") {
          v = t;
          k = 0;
          other = order_of(a);
        } else {
          xidx = atom.variable[1] - '1';
          v = x[xidx];
          k = a[std::size_t(xidx)];
          other = order_of(a) - k;
        }
        if (other > 0) continue;  // atom is constant in the other variables
        if (atom.kind == AtomKind::heaviside && atom.variable != "t" && apply_cutoff) {
          // Leibniz across the cutoff in the atom's own variable
          std::complex<double> s{0.0, 0.0};
          for (int i = 0; i <= k; ++i)
            s += binom(k, i) * chi(v, i) * atom_value(atom, v, k - i);
          // cutoff factors of the remaining variables at derivative order zero
          if (dim == 2) s *= chi(x[1 - xidx], 0);
          total += atom.coefficient * s;
        } else {
          total += atom.coefficient * atom_value(atom, v, k);
        }
      }
      return total;
    }

    std::complex<double> eval(double t, const double* x, const MultiIndex& a) const {
      if (order_of(a) > max_order)
        throw eval_error("requested derivative order beyond max_order");
      std::complex<double> s;
      if (mode == SmoothingMode::full && !exprs::is_zero(src.smooth_part())) {
        s = have_tables ? table_eval(x[0], order_of(a)) : convolve_direct(t, x[0], order_of(a));
      } else {
        s = smooth_cut(t, x, a);
      }
      return s + atoms_part(t, x, a);
    }

    // ---- full mode (1-D) ----------------------------------------------------

    double kernel(double y, int k) const {
      double wr = omega * psi.support_radius();
      return psi.profile(y / wr, k) / std::pow(wr, k + 1);
    }

    std::complex<double> convolve_direct(double t, double x, int k) const {
      // Simpson over the kernel support; integrand is C_c^inf in y.
      double wr = omega * psi.support_radius();
      const int panels = 32;
      double h = 2.0 * wr / panels;
      std::complex<double> acc{0.0, 0.0};
      auto f = [&](double y) {
        double q = x - y;
        MultiIndex zero{0, 0};
        return smooth_cut(t, &q, zero) * kernel(y, k);
      };
      for (int i = 0; i < panels; ++i) {
        double a = -wr + i * h;
        acc += h / 6.0 * (f(a) + 4.0 * f(a + 0.5 * h) + f(a + h));
      }
      return acc;
    }

    void build_tables() {
      double wr = omega * psi.support_radius();
      double W = src.window();
      table_lo = -(W + wr) - 0.25;
      double hi = (W + wr) + 0.25;
      table_h = wr / 8.0;
      std::size_t count = std::size_t((hi - table_lo) / table_h) + 2;
      conv_tables.assign(std::size_t(max_order + 2), std::vector<double>(count, 0.0));
      for (std::size_t i = 0; i < count; ++i) {
        double x = table_lo + double(i) * table_h;
        for (int k = 0; k <= max_order + 1; ++k)
          conv_tables[std::size_t(k)][i] = convolve_direct(0.0, x, k).real();
      }
      have_tables = true;
    }

    std::complex<double> table_eval(double x, int k) const {
      const auto& val = conv_tables[std::size_t(k)];
      const auto& slope = conv_tables[std::size_t(k + 1)];
      double s = (x - table_lo) / table_h;
      if (s <= 0.0 || s >= double(val.size() - 1)) return {0.0, 0.0};
      std::size_t i = std::size_t(s);
      double f = s - double(i);
      double f2 = f * f, f3 = f2 * f;
      double y = (2 * f3 - 3 * f2 + 1) * val[i] + (f3 - 2 * f2 + f) * slope[i] * table_h +
                 (-2 * f3 + 3 * f2) * val[i + 1] + (f3 - f2) * slope[i + 1] * table_h;
      return {y, 0.0};
    }
  };

  std::shared_ptr<const Impl> impl_;
};

inline RegularizedCoefficient regularize(const CoeffExpr& e, const Mollifier& m, const Scale& s,
                                         double eps, int max_order = -1,
                                         SmoothingMode mode = SmoothingMode::identity_on_smooth,
                                         int dim = 1) {
  return RegularizedCoefficient(e, m, s, eps, dim, max_order, mode);
}

// max over sampled (t, x) of |d^alpha r| over all |alpha| = order.  Sampling is
// uniform over the window plus refined clusters around each atom so that
// mollifier-scale peaks are resolved.
inline double sup_norms(const RegularizedCoefficient& r, const std::vector<double>& t_grid,
                        double window_lo, double window_hi, int order) {
  if (t_grid.empty() || !(window_hi > window_lo))
    throw std::invalid_argument("sup_norms: empty sample set");
  if (r.is_zero()) return 0.0;

  std::vector<double> xs;
  const int base = 1024;
  xs.reserve(base + 1);
  for (int i = 0; i <= base; ++i)
    xs.push_back(window_lo + (window_hi - window_lo) * double(i) / base);
  double wr = r.omega() * r.mollifier_radius();
  for (const Atom& a : r.source().atoms()) {
    if (a.variable == "t") continue;
    double width = std::max(wr, 1e-12) * 1.5;
    for (int i = -96; i <= 96; ++i) {
      double x = a.location + width * double(i) / 96.0;
      if (x >= window_lo && x <= window_hi) xs.push_back(x);
    }
  }

  std::vector<MultiIndex> alphas;
  if (r.dim() == 1) {
    alphas.push_back({order, 0});
  } else {
    for (int i = 0; i <= order; ++i) alphas.push_back({i, order - i});
  }

  double best = 0.0;
  for (double t : t_grid)
    for (double x : xs)
      for (const MultiIndex& a : alphas) {
        double pt[2] = {x, 0.0};
        best = std::max(best, std::abs(r.eval(t, pt, a)));
        if (r.dim() == 2) {
          double pt2[2] = {0.0, x};
          best = std::max(best, std::abs(r.eval(t, pt2, a)));
        }
      }
  return best;
}

// L2 norm over [lo, hi] at fixed t, with omega-adaptive trapezoid sampling
// (resolves Dirac spikes regardless of any solver grid).
inline double coefficient_l2_norm(const RegularizedCoefficient& r, double t, double lo, double hi) {
  if (r.is_zero()) return 0.0;
  double step = std::min((hi - lo) / 4096.0, std::max(r.omega(), 1e-9) / 16.0);
  std::size_t n = std::size_t((hi - lo) / step) + 1;
  step = (hi - lo) / double(n);
  double acc = 0.0;
  for (std::size_t i = 0; i <= n; ++i) {
    double x = lo + double(i) * step;
    double w = (i == 0 || i == n) ? 0.5 : 1.0;
    acc += w * std::norm(r.eval1(t, x));
  }
  return std::sqrt(acc * step);
}

}  // namespace vws
