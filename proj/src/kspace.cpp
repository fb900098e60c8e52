#include "qfric/kspace.hpp"

#include "qfric/errors.hpp"

#include <cmath>

namespace qfric {

namespace {

constexpr double pi = Constants::pi;

cdouble spectral_factor(const SurfaceModel& surface, SpectralFactor f, double w) {
  switch (f) {
  case SpectralFactor::Response:
    return surface_response(surface, w);
  case SpectralFactor::Dissipative:
    return surface_response(surface, w).imag();
  case SpectralFactor::DissipativeSecondDerivative:
    return surface_response_derivative(surface, w, 2).imag();
  }
  return 0.0;
}

double window_value(FrequencyWindow w, double x) {
  switch (w) {
  case FrequencyWindow::All:
    return 1.0;
  case FrequencyWindow::Positive:
    return step(x);
  case FrequencyWindow::Negative:
    return step(-x);
  case FrequencyWindow::Sign:
    return sign_of(x);
  }
  return 1.0;
}

// int_{-pi}^{pi} cos^p * (cos^2, sin^2, 1) dtheta, exact via the trapezoid rule on trig polynomials.
Eigen::Vector3d angular_moments(int p) {
  constexpr int n = 128;
  Eigen::Vector3d acc = Eigen::Vector3d::Zero();
  for (int j = 0; j < n; ++j) {
    const double th = -pi + 2.0 * pi * j / n;
    const double c = std::cos(th), s = std::sin(th);
    acc += std::pow(c, p) * Eigen::Vector3d(c * c, s * s, 1.0);
  }
  return acc * (2.0 * pi / n);
}

} // namespace

Eigen::Vector3cd doppler_green_integral_static(const SurfaceModel& surface, const DopplerIntegral& spec) {
  if (!(spec.z > 0.0)) throw DomainError("k-space integral: z must be > 0");
  const double radial = k_moment(spec.kx_power + 2, spec.z) / (2.0 * Constants::eps0) / (4.0 * pi * pi);
  if (spec.subtract_static) return Eigen::Vector3cd::Zero();
  const cdouble x = spectral_factor(surface, spec.factor, spec.omega) * window_value(spec.window, spec.omega);
  return angular_moments(spec.kx_power).cast<cdouble>() * (radial * x);
}

IntegralEstimate<Eigen::Vector3cd> doppler_green_integral(const SurfaceModel& surface, const DopplerIntegral& spec,
                                                          const QuadratureConfig& cfg) {
  using V = Eigen::Vector3cd;
  if (!(spec.z > 0.0)) throw DomainError("k-space integral: z must be > 0");
  IntegralEstimate<V> out;
  if (spec.v == 0.0 && (cfg.closed_forms || spec.subtract_static)) {
    out.value = doppler_green_integral_static(surface, spec);
    out.converged = true;
    out.substitution = "closed-form";
    return out;
  }
  if (surface.is_vacuum()) {
    out.value = V::Zero();
    out.converged = true;
    out.substitution = "vacuum";
    return out;
  }

  const double z = spec.z, w = spec.omega, v = spec.v;
  const int p = spec.kx_power;
  const double kmax = kmax_for(z, cfg);

  // Absolute floor from the size of the integrand, so that integrals which vanish
  // (odd kx powers at tiny v, empty windows) terminate.
  auto weighted = [&](double arg) { return spectral_factor(surface, spec.factor, arg) * window_value(spec.window, arg); };
  const cdouble x0 = spec.subtract_static ? weighted(w) : cdouble(0.0);
  double xscale = 0.0;
  for (int j = -6; j <= 6; ++j) {
    const double arg = w + v / z * j;
    xscale = std::max(xscale, std::abs(spec.subtract_static ? weighted(arg) - x0
                                                            : spectral_factor(surface, spec.factor, arg)));
  }
  const double scale = k_moment(p + 2, z) / (2.0 * Constants::eps0) / (2.0 * pi) * xscale;
  QuadratureConfig outer_cfg = cfg;
  outer_cfg.abs_tol = std::max(cfg.abs_tol, 1e-3 * cfg.rel_tol * scale);
  const QuadratureConfig inner = outer_cfg.tightened(0.1);
  bool inner_ok = true;
  std::size_t evals = 0;

  auto angular = [&](double k) -> V {
    auto f = [&](double th) -> V {
      const double c = std::cos(th), s = std::sin(th);
      const double arg = w + k * v * c;
      const cdouble x = weighted(arg) - x0;
      const double cp = p == 0 ? 1.0 : std::pow(c, p);
      return V(c * c, s * s, 1.0) * (x * cp);
    };
    // The window switches where w + k v cos(theta) = 0.
    std::vector<double> pts{0.0, pi};
    if (spec.window != FrequencyWindow::All && std::abs(w) < k * std::abs(v)) {
      pts.insert(pts.begin() + 1, std::acos(-w / (k * v)));
    }
    auto est = integrate_with_breaks(f, pts, inner);
    evals += est.evaluations;
    inner_ok = inner_ok && est.converged;
    return est.value;
  };

  auto radial = [&](double k) -> V {
    if (k == 0.0) return V::Zero();
    const double pref = 2.0 * k / (4.0 * pi * pi) * std::pow(k, p) * k / (2.0 * Constants::eps0) * std::exp(-2.0 * k * z);
    return angular(k) * pref;
  };

  std::vector<double> breaks{0.0, 0.5 / z, 2.0 / z, 6.0 / z, 15.0 / z, kmax};
  if (v != 0.0) {
    const double kstar = std::abs(w / v);
    if (kstar > 0.0 && kstar < kmax) breaks.push_back(kstar);
  }
  std::erase_if(breaks, [&](double b) { return b > kmax; });
  auto est = integrate_with_breaks(radial, breaks, outer_cfg);
  out.value = est.value;
  out.error_bound = est.error_bound;
  out.evaluations = evals;
  out.converged = est.converged && inner_ok;
  out.substitution = "polar-nested:k-outer(breaks),theta-inner(window split)";
  return out;
}

} // namespace qfric
