#pragma once

// Epsilon ladders and moderateness / negligibility fits.  A ladder is the
// computational stand-in for a net (v_eps)_eps: finitely many rungs
// eps_1 > ... > eps_K in (0,1], K >= 4 so the regressions keep two degrees of
// freedom.  Fits are least squares in log space:
//
//   Power(N):        log y ~ N log(1/eps)
//   Logarithmic(p):  log y ~ p log(log(1/eps))
//
// with the logarithmic model preferred when it cuts the max log-space
// deviation by a factor of two.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace vws {

struct EpsilonLadder {
  std::vector<double> values;  // strictly decreasing, in (0,1]

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  auto begin() const { return values.begin(); }
  auto end() const { return values.end(); }
};

template <class T>
struct EpsilonNet {
  EpsilonLadder ladder;
  std::vector<T> values;  // aligned with ladder
};

inline EpsilonLadder make_ladder(double eps_max, double ratio, int count, bool log_scale = false) {
  if (!(ratio > 0.0) || !(ratio < 1.0)) throw std::invalid_argument("make_ladder: need 0 < ratio < 1");
  if (!(eps_max > 0.0) || eps_max > 1.0) throw std::invalid_argument("make_ladder: need eps_max in (0,1]");
  if (count < 4) throw std::invalid_argument("make_ladder: need at least 4 rungs");
  double top = eps_max;
  if (log_scale) top = std::min(top, std::exp(-1.0));
  EpsilonLadder l;
  l.values.resize(std::size_t(count));
  for (int k = 0; k < count; ++k) l.values[std::size_t(k)] = top * std::pow(ratio, k);
  return l;
}

struct ModeratenessReport {
  enum class Model { power, logarithmic, negligible };
  Model model = Model::power;
  double exponent = 0.0;    // N for power, slope for logarithmic
  double half_width = 0.0;  // 95% half width of the fitted exponent
  double residual = 0.0;    // max log-space deviation
  bool verdict = false;

  std::string model_name() const {
    switch (model) {
      case Model::power: return "power";
      case Model::logarithmic: return "logarithmic";
      default: return "negligible";
    }
  }
};

namespace detail {

struct LineFit {
  double slope = 0.0, intercept = 0.0, residual = 0.0, half_width = 0.0;
};

inline double student_t95(int dof) {
  static const double table[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306,
                                 2.262,  2.228, 2.201, 2.179, 2.160, 2.145, 2.131, 2.120,
                                 2.110,  2.101, 2.093, 2.086, 2.080, 2.074, 2.069, 2.064,
                                 2.060,  2.056, 2.052, 2.048, 2.045, 2.042};
  if (dof < 1) return 12.706;
  if (dof <= 30) return table[dof - 1];
  return 1.96;
}

inline LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
  std::size_t n = xs.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  double d = double(n) * sxx - sx * sx;
  LineFit f;
  f.slope = (double(n) * sxy - sx * sy) / d;
  f.intercept = (sy - f.slope * sx) / double(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double r = ys[i] - (f.slope * xs[i] + f.intercept);
    f.residual = std::max(f.residual, std::abs(r));
    ss += r * r;
  }
  if (n > 2) {
    double se = std::sqrt(ss / double(n - 2) / (sxx - sx * sx / double(n)));
    f.half_width = student_t95(int(n) - 2) * se;
  }
  return f;
}

}  // namespace detail

// Fit of log(sample) against log(1/eps) and against log(log(1/eps)); reports
// Power(N) unless the logarithmic regression halves the residual.  Verdict is
// true when the chosen model fits within `tolerance` in log space.
inline ModeratenessReport fit_moderateness(const EpsilonLadder& ladder,
                                           const std::vector<double>& samples,
                                           double tolerance = 0.5) {
  if (ladder.size() < 4) throw std::invalid_argument("fit_moderateness: fewer than 4 rungs");
  if (samples.size() != ladder.size())
    throw std::invalid_argument("fit_moderateness: samples misaligned with ladder");

  bool all_tiny = true;
  std::vector<double> ly, lx_pow, lx_log;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    double s = samples[i];
    if (!std::isfinite(s)) throw std::invalid_argument("fit_moderateness: non-finite sample");
    if (s > 1e-250) all_tiny = false;
    double sf = std::max(s, 1e-300);
    ly.push_back(std::log(sf));
    double linv = std::log(1.0 / ladder[i]);
    lx_pow.push_back(linv);
    lx_log.push_back(std::log(linv));
  }

  ModeratenessReport rep;
  if (all_tiny) {
    rep.model = ModeratenessReport::Model::negligible;
    rep.exponent = 0.0;
    rep.residual = 0.0;
    rep.verdict = true;
    return rep;
  }

  detail::LineFit pw = detail::fit_line(lx_pow, ly);
  detail::LineFit lg = detail::fit_line(lx_log, ly);
  if (lg.residual * 2.0 <= pw.residual) {
    rep.model = ModeratenessReport::Model::logarithmic;
    rep.exponent = lg.slope;
    rep.half_width = lg.half_width;
    rep.residual = lg.residual;
  } else {
    rep.model = ModeratenessReport::Model::power;
    rep.exponent = pw.slope;
    rep.half_width = pw.half_width;
    rep.residual = pw.residual;
  }
  rep.verdict = rep.residual < tolerance;
  return rep;
}

struct NegligibilityCheck {
  bool negligible = false;
  double fitted_order = 0.0;  // decay order: samples ~ eps^order
};

// true iff the fitted decay order is at least q - 0.25 (log y vs log eps).
inline NegligibilityCheck check_negligible(const EpsilonLadder& ladder,
                                           const std::vector<double>& samples, int q) {
  if (ladder.size() < 4) throw std::invalid_argument("check_negligible: fewer than 4 rungs");
  if (samples.size() != ladder.size())
    throw std::invalid_argument("check_negligible: samples misaligned with ladder");
  bool all_tiny = true;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!std::isfinite(samples[i]))
      throw std::invalid_argument("check_negligible: non-finite sample");
    if (samples[i] > 1e-250) all_tiny = false;
    lx.push_back(std::log(ladder[i]));
    ly.push_back(std::log(std::max(samples[i], 1e-300)));
  }
  NegligibilityCheck c;
  if (all_tiny) {
    c.negligible = true;
    c.fitted_order = double(q);
    return c;
  }
  c.fitted_order = detail::fit_line(lx, ly).slope;
  c.negligible = c.fitted_order >= double(q) - 0.25;
  return c;
}

}  // namespace vws
