#include "qfric/forces.hpp"

#include "qfric/errors.hpp"
#include "qfric/kspace.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <sstream>

namespace qfric {

namespace {

const double pi = Constants::pi;
const double hbar = Constants::hbar;
const double eps0 = Constants::eps0;

void require_height(double z) {
  if (!(z > 0.0)) throw DomainError("atom height z must be > 0");
}

template <class T>
void require_converged(const IntegralEstimate<T>& est, const char* what) {
  if (!est.converged) throw NonConvergence(what, magnitude(est.value), est.error_bound);
}

// Tr[a diag(1,1,2)] Delta(i xi) integrated over xi, times the CP prefactor.
template <class Alpha>
ForceResult casimir_polder_impl(Alpha&& alpha, const AtomModel& atom, const SurfaceModel& surface, double z,
                                const QuadratureConfig& quad) {
  require_height(z);
  ForceResult r;
  r.method = ForceMethod::CasimirPolder;
  r.z = z;
  if (surface.is_vacuum()) {
    r.note = "vacuum";
    return r;
  }
  const Eigen::Vector3d w(1.0, 1.0, 2.0);
  auto f = [&](double xi) {
    const Eigen::Matrix3d a = alpha(xi);
    return a.diagonal().dot(w) * surface_response(surface, cdouble(0.0, xi)).real();
  };
  std::vector<double> scales{atom.omega_a, surface_frequency_scale(surface, atom.omega_a)};
  if (atom.gamma_a && *atom.gamma_a > 0.0) scales.push_back(*atom.gamma_a);
  const auto est = integrate_positive_axis(f, scales, quad);
  require_converged(est, "Casimir-Polder frequency integral did not converge");
  const double pref = -(hbar / pi) * 3.0 / (64.0 * pi * eps0 * std::pow(z, 4));
  r.value = pref * est.value;
  r.abs_error_estimate = std::abs(pref) * est.error_bound;
  r.n_evaluations = est.evaluations;
  return r;
}

double half_plane_weight(const Eigen::Matrix3d& a, double c, double s) {
  return a(0, 0) * c * c + a(1, 1) * s * s + a(2, 2) + 2.0 * a(0, 1) * c * s;
}

} // namespace

std::string to_string(ForceMethod m) {
  switch (m) {
  case ForceMethod::FullIntegral: return "full_integral";
  case ForceMethod::LowVelocityAsymptotic: return "low_v_asymptotic";
  case ForceMethod::NearfieldClosedForm: return "nearfield_closed_form";
  case ForceMethod::QRT: return "qrt";
  case ForceMethod::CasimirPolder: return "casimir_polder";
  }
  return "unknown";
}

ForceResult casimir_polder_fdt(const AtomModel& atom, const SurfaceModel& surface, double z,
                               const QuadratureConfig& quad) {
  atom.validate();
  surface.validate();
  return casimir_polder_impl([&](double xi) { return polarizability_imaginary_axis(atom, surface, z, xi); }, atom,
                             surface, z, quad);
}

ForceResult casimir_polder_qrt(const AtomModel& atom, const SurfaceModel& surface, double z,
                               const QuadratureConfig& quad) {
  atom.validate();
  surface.validate();
  if (atom.kind != AtomKind::QRT) throw DomainError("casimir_polder_qrt needs a QRT atom");
  auto r = casimir_polder_impl([&](double xi) { return qrt_alpha_symmetrised(atom, xi); }, atom, surface, z, quad);
  r.method = ForceMethod::QRT;
  return r;
}

ForceResult friction_full(const AtomModel& atom, const SurfaceModel& surface, double z, double v,
                          const QuadratureConfig& quad) {
  atom.validate();
  surface.validate();
  require_height(z);
  ForceResult r;
  r.method = ForceMethod::FullIntegral;
  r.z = z;
  r.v = v;
  if (v == 0.0) {
    r.note = "parity: kx-odd integrand vanishes at v=0";
    return r;
  }
  if (surface.is_vacuum()) {
    r.note = "vacuum";
    return r;
  }
  const QuadratureConfig inner = quad.tightened(1e-2);
  std::size_t evals = 0;
  auto f = [&](double u) {
    const Eigen::Matrix3d s = power_spectrum(atom, surface, z, u, v, inner).value;
    DopplerIntegral spec{z, -u, v, 1, FrequencyWindow::Positive, SpectralFactor::Dissipative};
    const auto k = doppler_green_integral(surface, spec, inner);
    require_converged(k, "friction kernel k-integral did not converge");
    evals += k.evaluations;
    return s.diagonal().dot(k.value.real());
  };
  // Both factors decay as e^{-2 |u| z / |v|} away from the Doppler band.
  const double wd = std::abs(v) / z;
  std::vector<double> pts{-25.0 * wd, 0.0, 25.0 * wd};
  for (double c : {0.1, 0.5, 1.0, 2.0, 5.0, 10.0}) {
    pts.push_back(c * wd);
    pts.push_back(-c * wd);
  }
  const double ws = surface_frequency_scale(surface, atom.omega_a);
  for (double c : {0.1, 1.0, 10.0})
    if (c * ws < 25.0 * wd) pts.push_back(c * ws);
  const auto est = integrate_with_breaks(f, pts, quad);
  if (!est.converged) {
    std::ostringstream msg;
    msg << "friction: outer frequency shell did not converge (inner shells converged, " << evals
        << " kernel evaluations)";
    throw NonConvergence(msg.str(), -2.0 * est.value, 2.0 * est.error_bound);
  }
  r.value = -2.0 * est.value;
  r.abs_error_estimate = 2.0 * est.error_bound + inner.rel_tol * std::abs(r.value);
  r.n_evaluations = est.evaluations + evals;
  return r;
}

Eigen::Matrix3d lowv_alpha_slope(const AtomModel& atom, const SurfaceModel& surface, double z,
                                 const QuadratureConfig& quad, TraceNorm norm) {
  atom.validate();
  require_height(z);
  if (atom.is_isotropic())
    return alpha_scalar_slope_at_zero(atom, surface, z, norm) * Eigen::Matrix3d::Identity();
  if (atom.kind == AtomKind::TwoLevel) {
    // alpha(0) is real and undressed at zero frequency; only G_I carries the slope.
    const auto ch = tls_channels(atom, surface, z, 0.0, 0.0, quad);
    const Eigen::Vector3d w = nearfield_k_integrated(z).diagonal() * surface_response_slope_at_zero(surface);
    return ch.sandwich(w.cast<cdouble>()).real();
  }
  return dressed_alpha_slope_at_zero(atom, surface, z);
}

LowVelocityFriction friction_lowv_lines(const AtomModel& atom, const SurfaceModel& surface, double z, double v,
                                        const QuadratureConfig& quad, TraceNorm norm) {
  surface.validate();
  const Eigen::Matrix3d a = lowv_alpha_slope(atom, surface, z, quad, norm);
  const double d1 = surface_response_slope_at_zero(surface);
  const double pref = -(2.0 * hbar * v * v * v / (3.0 * std::pow(2.0 * pi, 3))) * d1 / (2.0 * eps0);

  LowVelocityFriction out;
  for (ForceResult* r : {&out.line1, &out.line2}) {
    r->method = ForceMethod::LowVelocityAsymptotic;
    r->z = z;
    r->v = v;
  }
  // Line 2: half-plane angular integrals of cos^6, cos^4 sin^2 and cos^4 times the k^6 moment.
  const double ang = 5.0 * pi / 16.0 * a(0, 0) + pi / 16.0 * a(1, 1) + 3.0 * pi / 8.0 * a(2, 2);
  out.line2.value = pref * k_moment(6, z) * ang;

  // Line 1: dky dkx over kx > 0 in polar form.
  auto f = [&](double k, double th) {
    const double c = std::cos(th), s = std::sin(th);
    return std::pow(k * c, 4) * k * k * std::exp(-2.0 * k * z) * half_plane_weight(a, c, s);
  };
  const auto est = integrate_2d(f, 0.0, kmax_for(z, quad), [](double) { return std::make_pair(-pi / 2, pi / 2); },
                                quad);
  require_converged(est, "low-velocity k-quadrature did not converge");
  out.line1.value = pref * est.value;
  out.line1.abs_error_estimate = std::abs(pref) * est.error_bound;
  out.line1.n_evaluations = est.evaluations;

  const double scale = std::max(std::abs(out.line1.value), std::abs(out.line2.value));
  out.relative_agreement = scale == 0.0 ? 0.0 : std::abs(out.line1.value - out.line2.value) / scale;
  if (d1 == 0.0) out.line1.note = out.line2.note = "Delta_I'(0)=0: higher-order in v required";
  return out;
}

ForceResult friction_lowv(const AtomModel& atom, const SurfaceModel& surface, double z, double v,
                          const QuadratureConfig& quad, TraceNorm norm) {
  auto lines = friction_lowv_lines(atom, surface, z, v, quad, norm);
  ForceResult r = lines.line2;
  r.abs_error_estimate = std::abs(lines.line1.value - lines.line2.value);
  r.n_evaluations = lines.line1.n_evaluations;
  if (r.note.empty()) {
    std::ostringstream msg;
    msg << "line1/line2 relative agreement " << lines.relative_agreement;
    r.note = msg.str();
  }
  return r;
}

ForceResult friction_nearfield_ohmic(double alpha0, double rho, double z, double v) {
  if (!(alpha0 > 0.0) || !(rho > 0.0) || !(z > 0.0))
    throw DomainError("friction_nearfield_ohmic needs alpha0, rho, z > 0");
  ForceResult r;
  r.method = ForceMethod::NearfieldClosedForm;
  r.z = z;
  r.v = v;
  r.value = -(90.0 / (pi * pi * pi)) * hbar * rho * rho * alpha0 * alpha0 * v * v * v / std::pow(2.0 * z, 10);
  return r;
}

ForceResult friction_qrt(const AtomModel& atom, const SurfaceModel& surface, double z, double v,
                         const QuadratureConfig& quad) {
  atom.validate();
  surface.validate();
  require_height(z);
  if (atom.kind != AtomKind::QRT) throw DomainError("friction_qrt needs a QRT atom");
  ForceResult r;
  r.method = ForceMethod::QRT;
  r.z = z;
  r.v = v;
  const double g = atom.gamma_a.value_or(0.0);
  if (g == 0.0 || v == 0.0 || surface.is_vacuum()) return r;
  const double wa = atom.omega_a;
  auto f = [&](double w) {
    const double x = w + wa;
    const double den = x * x + 0.25 * g * g;
    return x / (den * den) * surface_response(surface, w).imag();
  };
  const auto est = integrate_positive_axis(f, {wa, g, surface_frequency_scale(surface, wa)}, quad);
  require_converged(est, "QRT friction frequency integral did not converge");
  // int d^2k/(2pi)^2 kx^2 Tr G_I = Delta_I k_moment(4) / (4 pi eps0).
  const double pref = -v * (2.0 * atom.dipole_norm2() * g / (3.0 * pi)) * k_moment(4, z) / (4.0 * pi * eps0);
  r.value = pref * est.value;
  r.abs_error_estimate = std::abs(pref) * est.error_bound;
  r.n_evaluations = est.evaluations;
  return r;
}

AtomModel oscillator_with_width(const AtomModel& atom, const SurfaceModel& surface, double z, double gamma,
                                const QuadratureConfig& quad) {
  atom.validate();
  if (!(gamma > 0.0)) throw DomainError("target width must be > 0");
  AtomModel osc = atom;
  osc.kind = AtomKind::Oscillator;
  osc.gamma_a.reset();
  const double wa = atom.omega_a;
  DopplerIntegral spec{z, wa, 0.0, 0, FrequencyWindow::All, SpectralFactor::Dissipative};
  const Eigen::Vector3d gi = doppler_green_integral(surface, spec, quad).value.real();
  double num = 0.0, den = 0.0;
  for (const auto& ch : osc.channels()) {
    const double amp = 2.0 * ch.d2 / (hbar * wa);
    num += ch.d2 * wa * amp * ch.n.dot(gi.asDiagonal() * ch.n);
    den += ch.d2;
  }
  const double current = num / den;
  if (!(current > 0.0)) throw DomainError("surface has no dissipation at omega_a; width cannot be matched");
  const double scale = gamma / current;
  if (osc.alpha0) *osc.alpha0 *= scale;
  if (osc.dipole) *osc.dipole *= std::sqrt(scale);
  return osc;
}

std::vector<QrtComparison> compare_qrt_cp(const AtomModel& atom, const SurfaceModel& surface, double z,
                                          const std::vector<double>& gammas, const QuadratureConfig& quad) {
  std::vector<QrtComparison> out;
  for (double g : gammas) {
    const AtomModel osc = oscillator_with_width(atom, surface, z, g, quad);
    AtomModel q = osc;
    q.kind = AtomKind::QRT;
    q.gamma_a = g;
    QrtComparison c{g, casimir_polder_fdt(osc, surface, z, quad), casimir_polder_qrt(q, surface, z, quad), 0.0};
    c.deviation = std::abs(c.qrt.value / c.fdt.value - 1.0);
    out.push_back(c);
  }
  return out;
}

ExponentFit friction_exponent_fit(const std::vector<double>& v, const std::vector<double>& f) {
  const std::size_t n = v.size();
  if (n != f.size() || n < 5) throw DomainError("exponent fit needs >= 5 (v, F) pairs");
  double vmin = v[0], vmax = v[0];
  for (std::size_t i = 0; i < n; ++i) {
    if (!(v[i] > 0.0) || f[i] == 0.0) throw DomainError("exponent fit needs v > 0 and F != 0");
    vmin = std::min(vmin, v[i]);
    vmax = std::max(vmax, v[i]);
  }
  if (vmax < 10.0 * vmin * (1.0 - 1e-12)) throw DomainError("exponent fit grid must span one decade");

  ExponentFit fit;
  Eigen::MatrixXd X(n, 2);
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = std::log(v[i]);
    y(i) = std::log(std::abs(f[i]));
  }
  Eigen::Vector2d beta = X.colPivHouseholderQr().solve(y);
  const double dof = static_cast<double>(n) - 2.0;
  double s2 = (y - X * beta).squaredNorm() / dof;
  Eigen::Matrix2d cov = s2 * (X.transpose() * X).inverse();
  fit.exponent = beta(1);
  fit.exponent_stderr = std::sqrt(cov(1, 1));
  fit.prefactor = std::copysign(std::exp(beta(0)), f[0]);

  // F = c1 v + c3 v^3 + c5 v^5 in the scaled variable v / vmax.
  Eigen::MatrixXd P(n, 3);
  Eigen::VectorXd q(n);
  double fscale = 0.0;
  for (std::size_t i = 0; i < n; ++i) fscale = std::max(fscale, std::abs(f[i]));
  for (std::size_t i = 0; i < n; ++i) {
    const double t = v[i] / vmax;
    P(i, 0) = t;
    P(i, 1) = t * t * t;
    P(i, 2) = t * t * t * t * t;
    q(i) = f[i] / fscale;
  }
  Eigen::Vector3d c = P.colPivHouseholderQr().solve(q);
  const double pdof = std::max(static_cast<double>(n) - 3.0, 1.0);
  const double ps2 = (q - P * c).squaredNorm() / pdof;
  Eigen::Matrix3d pcov = ps2 * (P.transpose() * P).inverse();
  fit.linear_coefficient = c(0) * fscale / vmax;
  fit.linear_stderr = std::sqrt(std::max(pcov(0, 0), 0.0)) * fscale / vmax;
  std::size_t top = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (v[i] > v[top]) top = i;
  fit.linear_share = std::abs(c(0)) * fscale / std::abs(f[top]);
  return fit;
}

ExponentFit friction_exponent_fit(const std::vector<ForceResult>& results) {
  std::vector<double> v, f;
  for (const auto& r : results) {
    if (r.method != results.front().method || r.z != results.front().z)
      throw DomainError("exponent fit needs results of one method and height");
    v.push_back(r.v);
    f.push_back(r.value);
  }
  return friction_exponent_fit(v, f);
}

TlsIntegrals tls_lowv_integrals(const AtomModel& atom, const SurfaceModel& surface, double z, double kx, double ky,
                                double v, const QuadratureConfig& quad) {
  atom.validate();
  require_height(z);
  if (!(kx > 0.0)) throw DomainError("tls_lowv_integrals needs kx > 0");
  TlsIntegrals out;
  const double top = kx * v;
  if (top <= 0.0) return out;
  const QuadratureConfig inner = quad.tightened(1e-2);
  auto gi = [&](double w) -> Eigen::Matrix3d {
    return green_dissipative(green_nearfield(kx, ky, z, w, surface).value).real();
  };
  auto alpha_tilde = [&](double u) -> Eigen::Matrix3d {
    const auto ch = atom_channels(atom, surface, z, u, 0.0, inner);
    DopplerIntegral spec{z, u, 0.0, 0, FrequencyWindow::All, SpectralFactor::Dissipative};
    const Eigen::Vector3cd w = doppler_green_integral(surface, spec, inner).value;
    return ch.sandwich(w).real();
  };
  auto e1 = integrate([&](double w) { return (alpha_tilde(top - w) * gi(w)).trace(); }, 0.0, top, quad);
  require_converged(e1, "I1 frequency integral did not converge");
  auto e2 = integrate([&](double w) { return (eta_tensor(atom, surface, z, top - w, inner) * gi(w)).trace(); }, 0.0,
                      top, quad);
  require_converged(e2, "I2 frequency integral did not converge");
  out.i1 = e1.value;
  out.i2 = 0.5 * v * v * e2.value;
  return out;
}

} // namespace qfric
