#pragma once

// Numerical integration engine.
//
// All rules are deterministic and work on any value type that forms a vector
// space over double (double, std::complex<double>, fixed-size Eigen matrices).
// Partial sums are accumulated in a fixed order so that identical inputs give
// bit-identical outputs.

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <queue>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qfric {

enum class KmaxPolicy { AutoExponentialCutoff, Fixed };
enum class OscillatoryRule { FilonType, AdaptiveSubdivision };

struct QuadratureConfig {
  double rel_tol = 1e-8;
  double abs_tol = 0.0;
  std::size_t max_evaluations = 10'000'000;
  KmaxPolicy kmax_policy = KmaxPolicy::AutoExponentialCutoff;
  double kmax_fixed = 0.0;   // 1/m, used when kmax_policy == Fixed
  double omega_max = 0.0;    // rad/s, 0 selects an automatic bound
  OscillatoryRule oscillatory_rule = OscillatoryRule::FilonType;
  bool closed_forms = true;  // use analytic v = 0 shortcuts where available

  /// Throws std::invalid_argument when the tolerances are out of range.
  void validate() const;

  /// Copy with rel_tol scaled by `factor` (clamped to a sane floor); used for inner shells.
  QuadratureConfig tightened(double factor) const {
    QuadratureConfig c = *this;
    c.rel_tol = std::max(rel_tol * factor, 1e-15);
    c.abs_tol = abs_tol * factor;
    return c;
  }
};

inline void QuadratureConfig::validate() const {
  if (!(rel_tol > 0.0 && rel_tol <= 1e-2))
    throw std::invalid_argument("rel_tol must lie in (0, 1e-2]");
  if (abs_tol < 0.0) throw std::invalid_argument("abs_tol must be non-negative");
  if (max_evaluations == 0) throw std::invalid_argument("max_evaluations must be positive");
  if (kmax_policy == KmaxPolicy::Fixed && !(kmax_fixed > 0.0))
    throw std::invalid_argument("fixed kmax must be positive");
}

template <class T>
struct IntegralEstimate {
  T value{};
  double error_bound = 0.0;
  std::size_t evaluations = 0;
  bool converged = false;
  std::string substitution = "none";
};

// ---------------------------------------------------------------------------
// value-type helpers

namespace detail {

template <class T>
struct is_eigen : std::is_base_of<Eigen::EigenBase<T>, T> {};

} // namespace detail

template <class T>
T zero_value() {
  if constexpr (detail::is_eigen<T>::value) {
    return T::Zero();
  } else {
    return T{};
  }
}

inline double magnitude(double x) { return std::abs(x); }
inline double magnitude(const std::complex<double>& x) { return std::abs(x); }
template <class Derived>
double magnitude(const Eigen::MatrixBase<Derived>& m) {
  return m.cwiseAbs().maxCoeff();
}

/// Complex counterpart of a value type (double -> complex, Matrix3d -> Matrix3cd).
template <class T>
struct complexified {
  using type = std::complex<double>;
};
template <class T>
struct complexified<std::complex<T>> {
  using type = std::complex<T>;
};
template <class Scalar, int R, int C, int O, int MR, int MC>
struct complexified<Eigen::Matrix<Scalar, R, C, O, MR, MC>> {
  using type = Eigen::Matrix<std::complex<double>, R, C, O, MR, MC>;
};
template <class T>
using complexified_t = typename complexified<T>::type;

template <class T>
complexified_t<T> to_complex(const T& x) {
  if constexpr (detail::is_eigen<T>::value) {
    return x.template cast<std::complex<double>>();
  } else {
    return complexified_t<T>(x);
  }
}

// ---------------------------------------------------------------------------
// Gauss-Kronrod 10/21 adaptive rule

namespace detail {

inline constexpr std::array<double, 11> gk21_x = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};
inline constexpr std::array<double, 11> gk21_wk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077208067161052, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7, 9).
inline constexpr std::array<double, 5> g10_w = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

template <class T>
struct Panel {
  double a, b;
  T value;
  double error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

template <class F>
auto gk21(F& f, double a, double b) {
  using T = std::decay_t<decltype(f(a))>;
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  T fc = f(c);
  T kron = fc * gk21_wk[10];
  T gauss = zero_value<T>();
  for (int j = 0; j < 10; ++j) {
    const double dx = h * gk21_x[j];
    T f1 = f(c - dx);
    T f2 = f(c + dx);
    T s = f1 + f2;
    kron = kron + s * gk21_wk[j];
    if (j % 2 == 1) gauss = gauss + s * g10_w[j / 2];
  }
  kron = kron * h;
  gauss = gauss * h;
  const double err = magnitude(T(kron - gauss));
  return std::make_pair(kron, err);
}

} // namespace detail

/// Globally adaptive Gauss-Kronrod (10/21) integration of f over [a, b].
template <class F>
auto integrate(F&& f, double a, double b, const QuadratureConfig& cfg) {
  using T = std::decay_t<decltype(f(a))>;
  IntegralEstimate<T> out;
  out.substitution = "gauss-kronrod-21";
  if (a == b) {
    out.value = zero_value<T>();
    out.converged = true;
    return out;
  }
  const double sign = b < a ? -1.0 : 1.0;
  if (b < a) std::swap(a, b);

  using Panel = detail::Panel<T>;
  std::priority_queue<Panel> heap;
  auto [v0, e0] = detail::gk21(f, a, b);
  heap.push({a, b, v0, e0});
  std::size_t evals = 21;
  T total = v0;
  double total_err = e0;

  auto tolerance = [&](const T& tot) { return std::max(cfg.rel_tol * magnitude(tot), cfg.abs_tol); };

  while (total_err > tolerance(total) && evals + 42 <= cfg.max_evaluations) {
    Panel worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b) || (worst.b - worst.a) < 1e3 * std::numeric_limits<double>::epsilon() * std::max(std::abs(worst.a), std::abs(worst.b)))
      break;
    heap.pop();
    auto [vl, el] = detail::gk21(f, worst.a, mid);
    auto [vr, er] = detail::gk21(f, mid, worst.b);
    evals += 42;
    heap.push({worst.a, mid, vl, el});
    heap.push({mid, worst.b, vr, er});
    total = total - worst.value + vl + vr;
    total_err = total_err - worst.error + el + er;
  }
  // Final re-summation in ascending panel order.
  {
    std::vector<Panel> panels;
    panels.reserve(heap.size());
    while (!heap.empty()) {
      panels.push_back(heap.top());
      heap.pop();
    }
    std::sort(panels.begin(), panels.end(), [](const Panel& l, const Panel& r) { return l.a < r.a; });
    total = zero_value<T>();
    total_err = 0.0;
    for (const auto& p : panels) {
      total = total + p.value;
      total_err += p.error;
    }
  }
  out.value = total * sign;
  out.error_bound = total_err;
  out.evaluations = evals;
  out.converged = total_err <= tolerance(total);
  return out;
}

/// Adaptive integration over [a, b] split at the given interior break points.
template <class F>
auto integrate_with_breaks(F&& f, std::vector<double> points, const QuadratureConfig& cfg) {
  using T = std::decay_t<decltype(f(points.front()))>;
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  IntegralEstimate<T> out;
  out.value = zero_value<T>();
  out.converged = true;
  out.substitution = "gauss-kronrod-21/breaks";
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    auto part = integrate(f, points[i], points[i + 1], cfg);
    out.value = out.value + part.value;
    out.error_bound += part.error_bound;
    out.evaluations += part.evaluations;
    out.converged = out.converged && part.converged;
  }
  return out;
}

enum class Substitution {
  Exponential, // x = a - scale * ln(1 - t)
  Rational     // x = a + scale * t / (1 - t)
};

/// Integral of f over [a, inf) after mapping onto [0, 1).
template <class F>
auto integrate_semi_infinite(F&& f, double a, double scale, Substitution sub, const QuadratureConfig& cfg) {
  using T = std::decay_t<decltype(f(a))>;
  auto mapped = [&](double t) -> T {
    const double s = 1.0 - t;
    if (sub == Substitution::Exponential) {
      const double x = a - scale * std::log(s);
      return f(x) * (scale / s);
    }
    const double x = a + scale * t / s;
    return f(x) * (scale / (s * s));
  };
  auto est = integrate(mapped, 0.0, 1.0, cfg);
  est.substitution = sub == Substitution::Exponential ? "exponential:x=a-s*ln(1-t)" : "rational:x=a+s*t/(1-t)";
  return est;
}

/// Integral over [0, inf) with the default rational substitution of unit scale.
template <class F>
auto integrate_semi_infinite(F&& f, const QuadratureConfig& cfg) {
  return integrate_semi_infinite(std::forward<F>(f), 0.0, 1.0, Substitution::Rational, cfg);
}

/// Integral over [0, inf) of a function with structure on several widely separated scales:
/// decade break points from min(scales)/100 to max(scales)*100, then a rational tail.
template <class F>
auto integrate_positive_axis(F&& f, const std::vector<double>& scales, const QuadratureConfig& cfg) {
  const auto [mn, mx] = std::minmax_element(scales.begin(), scales.end());
  std::vector<double> pts{0.0};
  for (double x = *mn * 1e-2; x < *mx * 1e2; x *= 10.0) pts.push_back(x);
  for (double s : scales) pts.push_back(s);
  pts.push_back(*mx * 1e2);
  auto est = integrate_with_breaks(f, pts, cfg);
  auto tail = integrate_semi_infinite(f, *mx * 1e2, *mx * 1e2, Substitution::Rational, cfg);
  est.value = est.value + tail.value;
  est.error_bound += tail.error_bound;
  est.evaluations += tail.evaluations;
  est.converged = est.converged && tail.converged;
  est.substitution = "decade-breaks+rational-tail";
  return est;
}

/// Nested 2-D integral of f(x, y) for x in [a, b] and y in limits(x).
/// The inner shell runs with a tolerance tightened by `inner_factor`.
template <class F, class Limits>
auto integrate_2d(F&& f, double a, double b, Limits&& limits, const QuadratureConfig& cfg,
                  double inner_factor = 0.1) {
  using T = std::decay_t<decltype(f(a, a))>;
  const QuadratureConfig inner = cfg.tightened(inner_factor);
  std::size_t evals = 0;
  bool inner_ok = true;
  auto outer_fn = [&](double x) -> T {
    const std::pair<double, double> lim = limits(x);
    if (!(lim.second > lim.first)) return zero_value<T>();
    auto est = integrate([&](double y) { return f(x, y); }, lim.first, lim.second, inner);
    evals += est.evaluations;
    inner_ok = inner_ok && est.converged;
    return est.value;
  };
  auto est = integrate(outer_fn, a, b, cfg);
  est.evaluations = evals;
  est.converged = est.converged && inner_ok;
  est.substitution = "nested-gauss-kronrod-21";
  return est;
}

/// Cut-off wave number for e^{-2 k z}-weighted integrands: e^{-2 kmax z} < 1e-16 with margin
/// for polynomial prefactors.
inline double kmax_for(double z, const QuadratureConfig& cfg) {
  if (cfg.kmax_policy == KmaxPolicy::Fixed) return cfg.kmax_fixed;
  return 30.0 / z;
}

/// Integral of f(k, theta) over the plane in polar coordinates with the measure
/// d^2k/(2 pi)^2 = k dk dtheta/(2 pi)^2, for k in (0, kmax] and theta in (-pi, pi].
template <class F>
auto integrate_polar_2d(F&& f, double kmax, const QuadratureConfig& cfg) {
  constexpr double pi = std::numbers::pi;
  auto integrand = [&](double k, double th) { return f(k, th) * (k / (4.0 * pi * pi)); };
  auto est = integrate_2d(integrand, 0.0, kmax, [](double) { return std::make_pair(-std::numbers::pi, std::numbers::pi); }, cfg);
  est.substitution = "polar:k-outer,theta-inner";
  return est;
}

// ---------------------------------------------------------------------------
// Gauss-Legendre nodes and fixed rules

struct GaussLegendre {
  std::vector<double> x;
  std::vector<double> w;
};

/// n-point Gauss-Legendre rule on [-1, 1].
inline GaussLegendre gauss_legendre(int n) {
  GaussLegendre r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0, p1 = x;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    r.x[i] = -x;
    r.w[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Principal value

/// Cauchy principal value of P int_a^inf g(x) / (x - pole) dx for a < pole,
/// with g smooth near the pole. The symmetric neighbourhood [a, 2 pole - a] is folded
/// onto (0, pole - a] where [g(pole + t) - g(pole - t)] / t is regular.
template <class G>
auto principal_value(G&& g, double pole, double a, const QuadratureConfig& cfg) {
  using T = std::decay_t<decltype(g(pole))>;
  if (!(pole > a)) throw std::domain_error("principal value: pole on or outside the domain boundary");
  const double half = pole - a;
  auto folded = [&](double t) -> T { return (g(pole + t) - g(pole - t)) * (1.0 / t); };
  auto near = integrate(folded, 0.0, half, cfg);
  auto far = integrate_semi_infinite([&](double x) -> T { return g(x) * (1.0 / (x - pole)); }, pole + half,
                                     std::max(half, 1e-300), Substitution::Rational, cfg);
  IntegralEstimate<T> out;
  out.value = near.value + far.value;
  out.error_bound = near.error_bound + far.error_bound;
  out.evaluations = near.evaluations + far.evaluations;
  out.converged = near.converged && far.converged;
  out.substitution = "pv:symmetric-fold+rational-tail";
  return out;
}

// ---------------------------------------------------------------------------
// Oscillatory (Fourier-type) integrals

namespace detail {

/// Spherical Bessel functions j_0..j_{n-1} at x >= 0. Upward recurrence is stable for
/// x > n; below that Miller's downward recurrence normalised by sum (2k+1) j_k^2 = 1.
template <std::size_t N>
void spherical_bessel_all(double x, std::array<double, N>& j) {
  constexpr int n = static_cast<int>(N);
  if (x < 1e-300) {
    j.fill(0.0);
    j[0] = 1.0;
    return;
  }
  if (x > n) {
    j[0] = std::sin(x) / x;
    if (n > 1) j[1] = std::sin(x) / (x * x) - std::cos(x) / x;
    for (int k = 1; k + 1 < n; ++k) j[k + 1] = (2.0 * k + 1.0) / x * j[k] - j[k - 1];
    return;
  }
  const int start = n + 16 + static_cast<int>(x);
  double jp = 0.0, jc = 1e-30, norm = 0.0;
  for (int k = start; k >= 0; --k) {
    if (k < n) j[k] = jc;
    norm += (2.0 * k + 1.0) * jc * jc;
    const double jm = (2.0 * k + 1.0) / x * jc - jp;
    jp = jc;
    jc = jm;
    if (std::abs(jc) > 1e100) {
      // Rescale to avoid overflow.
      jc *= 1e-100;
      jp *= 1e-100;
      norm *= 1e-200;
      for (int m = std::max(k, 0); m < n; ++m) j[m] *= 1e-100;
    }
  }
  const double scale = 1.0 / std::sqrt(norm);
  // Fix the overall sign from the larger of j0, j1 in closed form.
  const double j0 = std::sin(x) / x, j1 = std::sin(x) / (x * x) - std::cos(x) / x;
  const double ref = std::abs(j0) > std::abs(j1) ? j0 : j1;
  const double got = std::abs(j0) > std::abs(j1) ? j[0] : j[1];
  const double sgn = (ref >= 0) == (got >= 0) ? 1.0 : -1.0;
  for (int k = 0; k < n; ++k) j[k] *= scale * sgn;
}

/// int_{-1}^{1} P_n(x) e^{-i kappa x} dx = 2 (-i)^n j_n(kappa), for n = 0..N-1.
template <std::size_t N>
void legendre_fourier_moments(double kappa, std::array<std::complex<double>, N>& out) {
  static const std::complex<double> mi[4] = {{1, 0}, {0, -1}, {-1, 0}, {0, 1}};
  std::array<double, N> j;
  spherical_bessel_all(std::abs(kappa), j);
  for (std::size_t n = 0; n < N; ++n) {
    // j_n is even/odd in kappa like x^n.
    const double parity = (kappa < 0 && (n % 2 == 1)) ? -1.0 : 1.0;
    out[n] = 2.0 * mi[n % 4] * (j[n] * parity);
  }
}

} // namespace detail

/// Filon-type transform int_lo^hi S(w) e^{-i w tau} dw.
///
/// Each panel is expanded in Legendre polynomials from a Gauss-Legendre projection and the
/// products with the exponential are integrated exactly, so the accuracy of a panel does not
/// degrade with tau. Panels are bisected until the trailing Legendre coefficients fall below
/// rel_tol of the leading ones. Infinite ends are handled by geometric panels plus a
/// first-order integration-by-parts tail term.
template <class F>
auto fourier_transform(F&& S, double tau, double lo, double hi, const QuadratureConfig& cfg, double scale = 1.0) {
  using R = std::decay_t<decltype(S(0.0))>;
  using C = complexified_t<R>;
  constexpr int order = 24;
  static const GaussLegendre gl = gauss_legendre(order);

  IntegralEstimate<C> out;
  out.value = zero_value<C>();
  out.converged = true;
  out.substitution = "filon-legendre-24";

  // Legendre values at the nodes, P_n(x_j), computed once.
  static const auto pn = [] {
    std::vector<std::array<double, order>> t(order);
    for (int j = 0; j < order; ++j) {
      double p0 = 1.0, p1 = gl.x[j];
      t[j][0] = 1.0;
      if (order > 1) t[j][1] = p1;
      for (int n = 2; n < order; ++n) {
        const double p2 = ((2.0 * n - 1.0) * gl.x[j] * p1 - (n - 1.0) * p0) / n;
        p0 = p1;
        p1 = p2;
        t[j][n] = p2;
      }
    }
    return t;
  }();

  struct PanelResult {
    C value;
    double tail;
    double scale;
  };
  auto panel = [&](double a, double b) -> PanelResult {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    std::array<R, order> fx;
    for (int j = 0; j < order; ++j) fx[j] = S(c + h * gl.x[j]);
    out.evaluations += order;
    const double kappa = h * tau;
    std::array<std::complex<double>, order> moments;
    detail::legendre_fourier_moments(kappa, moments);
    C acc = zero_value<C>();
    double tail = 0.0, scale = 0.0;
    for (int n = 0; n < order; ++n) {
      R coef = zero_value<R>();
      for (int j = 0; j < order; ++j) coef = coef + fx[j] * (gl.w[j] * pn[j][n]);
      coef = coef * (0.5 * (2.0 * n + 1.0));
      const double m = magnitude(coef);
      scale = std::max(scale, m);
      if (n >= order - 3) tail += m;
      acc = acc + to_complex(coef) * moments[n];
    }
    const std::complex<double> phase = std::exp(std::complex<double>(0.0, -c * tau)) * h;
    return {C(acc * phase), tail * 2.0 * h, scale * 2.0 * h};
  };

  std::vector<std::pair<double, double>> stack;
  auto run_interval = [&](double a, double b) {
    stack.clear();
    stack.emplace_back(a, b);
    while (!stack.empty()) {
      auto [pa, pb] = stack.back();
      stack.pop_back();
      PanelResult r = panel(pa, pb);
      const bool resolved = r.tail <= cfg.rel_tol * r.scale + cfg.abs_tol;
      const bool too_narrow = (pb - pa) < 1e-12 * (b - a) || (pb - pa) <= 1e-14 * std::abs(pa);
      if (resolved || too_narrow || out.evaluations > cfg.max_evaluations) {
        if (!resolved) out.converged = false;
        out.value = out.value + r.value;
        out.error_bound += r.tail;
      } else {
        const double mid = 0.5 * (pa + pb);
        stack.emplace_back(mid, pb);
        stack.emplace_back(pa, mid);
      }
    }
  };

  auto finite = [](double x) { return std::isfinite(x); };
  if (finite(lo) && finite(hi)) {
    run_interval(lo, hi);
    return out;
  }
  if (finite(lo) && !finite(hi)) {
    // Geometric panels outward from lo until the integrand magnitude has decayed.
    double width = cfg.omega_max > 0.0 ? cfg.omega_max / 64.0 : scale / 16.0;
    double a = lo;
    double peak = 0.0;
    for (int i = 0; i < 4000; ++i) {
      const double b = a + width;
      run_interval(a, b);
      const double fb = magnitude(S(b));
      peak = std::max(peak, fb);
      a = b;
      if (cfg.omega_max > 0.0 && a >= cfg.omega_max) break;
      if (fb <= 1e-3 * cfg.rel_tol * peak && i > 8) break;
      width *= 1.25;
    }
    // Tail: int_a^inf S e^{-iwt} ~ S(a) e^{-i a t} / (i t).
    if (tau > 0.0) out.value = out.value + to_complex(S(a)) * (std::exp(std::complex<double>(0.0, -a * tau)) / std::complex<double>(0.0, tau));
    return out;
  }
  throw std::invalid_argument("fourier_transform: only [lo, hi] and [lo, inf) domains are supported");
}

} // namespace qfric
