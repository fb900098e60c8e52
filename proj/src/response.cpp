#include "qfric/response.hpp"

#include "qfric/errors.hpp"

#include <cmath>

namespace qfric {

namespace {

constexpr double hbar = Constants::hbar;
constexpr double eps0 = Constants::eps0;
constexpr double pi = Constants::pi;

// n.diag(x).n for a real unit vector.
cdouble project(const Eigen::Vector3d& n, const Eigen::Vector3cd& x) {
  return n.x() * n.x() * x(0) + n.y() * n.y() * x(1) + n.z() * n.z() * x(2);
}

// Static near-field weight per unit Delta: diag(1, 1, 2) / (32 pi eps0 z^3).
Eigen::Vector3cd static_weight(double z) {
  return Eigen::Vector3cd(1.0, 1.0, 2.0) / (32.0 * pi * eps0 * z * z * z);
}

void require_height(double z) {
  if (!(z > 0.0)) throw DomainError("atom height z must be > 0");
}

template <class T>
void require_converged(const IntegralEstimate<T>& est, const char* what) {
  if (!est.converged) throw NonConvergence(what, magnitude(est.value), est.error_bound);
}

// omega_a^2 - omega^2, from the detuning when one is given so that resonances narrower
// than the spacing of doubles near omega_a are still resolved.
double resonance_factor(double wa, double omega, double detuning) {
  if (std::isfinite(detuning)) return -detuning * (2.0 * wa + detuning);
  return (wa - omega) * (wa + omega);
}

cdouble dressed_amplitude(double amp, double omega_a, cdouble den) {
  if (std::abs(den) <= 1e-15 * omega_a * omega_a)
    throw DomainError("polarizability: evaluation at an undamped dressed resonance");
  return amp * omega_a * omega_a / den;
}

// (2/hbar) int sign(w + kx v) G_I, per unit d^2, diagonal.
Eigen::Vector3d rate_diagonal(const SurfaceModel& surface, double z, double omega, double v,
                              const QuadratureConfig& quad) {
  DopplerIntegral spec{z, omega, v, 0, FrequencyWindow::Sign, SpectralFactor::Dissipative};
  auto est = doppler_green_integral(surface, spec, quad);
  require_converged(est, "decay rate k-integral did not converge");
  return est.value.real() * (2.0 / hbar);
}

} // namespace

AtomModel AtomModel::isotropic(AtomKind kind, double alpha0, double omega_a) {
  AtomModel a;
  a.kind = kind;
  a.alpha0 = alpha0;
  a.omega_a = omega_a;
  return a;
}

AtomModel AtomModel::with_dipole(AtomKind kind, const Eigen::Vector3d& d, double omega_a) {
  AtomModel a;
  a.kind = kind;
  a.dipole = d;
  a.omega_a = omega_a;
  return a;
}

void AtomModel::validate() const {
  if (!(omega_a > 0.0)) throw DomainError("atom: omega_a must be > 0");
  if (dipole.has_value() == alpha0.has_value())
    throw DomainError("atom: exactly one of the dipole vector and alpha0 must be given");
  if (alpha0 && !(*alpha0 > 0.0)) throw DomainError("atom: alpha0 must be > 0");
  if (dipole && !(dipole->norm() > 0.0)) throw DomainError("atom: dipole vector must be nonzero");
  if (gamma_a && !(*gamma_a >= 0.0)) throw DomainError("atom: gamma_a must be >= 0");
}

double dipole_norm2_from_alpha0(double alpha0, double omega_a) { return 1.5 * hbar * omega_a * alpha0; }

std::vector<DipoleChannel> AtomModel::channels() const {
  if (alpha0) {
    const double d2 = 0.5 * hbar * omega_a * *alpha0;
    return {{Eigen::Vector3d::UnitX(), d2}, {Eigen::Vector3d::UnitY(), d2}, {Eigen::Vector3d::UnitZ(), d2}};
  }
  if (!dipole) throw DomainError("atom: no dipole moment or polarizability given");
  const double d2 = dipole->squaredNorm();
  return {{*dipole / std::sqrt(d2), d2}};
}

Eigen::Matrix3d AtomModel::dd() const {
  if (alpha0) return Eigen::Matrix3d::Identity() * (0.5 * hbar * omega_a * *alpha0);
  return *dipole * dipole->transpose();
}

double AtomModel::dipole_norm2() const { return dd().trace(); }

double AtomModel::static_polarizability() const {
  if (alpha0) return *alpha0;
  return 2.0 * dipole_norm2() / (3.0 * hbar * omega_a);
}

Matrix3c ChannelPolarizability::tensor() const {
  Matrix3c t = Matrix3c::Zero();
  for (std::size_t c = 0; c < n.size(); ++c) t += a[c] * (n[c] * n[c].transpose()).cast<cdouble>();
  return t;
}

cdouble ChannelPolarizability::sandwich_trace(const Eigen::Vector3cd& x, const Eigen::Vector3cd& y) const {
  cdouble acc = 0.0;
  for (std::size_t c = 0; c < n.size(); ++c) {
    for (std::size_t d = 0; d < n.size(); ++d) {
      const cdouble nx = (n[c].cast<cdouble>().array() * x.array() * n[d].cast<cdouble>().array()).sum();
      const cdouble ny = (n[d].cast<cdouble>().array() * y.array() * n[c].cast<cdouble>().array()).sum();
      acc += a[c] * std::conj(a[d]) * nx * ny;
    }
  }
  return acc;
}

Matrix3c ChannelPolarizability::sandwich(const Eigen::Vector3cd& x) const {
  const Matrix3c t = tensor();
  return t * x.asDiagonal() * t.adjoint();
}

IntegralEstimate<Eigen::Vector3cd> green_k_integrated(const SurfaceModel& surface, double z, double omega, double v,
                                                      const QuadratureConfig& quad) {
  require_height(z);
  DopplerIntegral spec{z, omega, v, 0, FrequencyWindow::All, SpectralFactor::Response};
  return doppler_green_integral(surface, spec, quad);
}

SelfEnergySample self_energy(const AtomModel& atom, const SurfaceModel& surface, double z, double omega, double v,
                             const QuadratureConfig& quad) {
  atom.validate();
  auto est = green_k_integrated(surface, z, omega, v, quad);
  require_converged(est, "self-energy k-integral did not converge");
  const Eigen::Vector3d ddiag = atom.dd().diagonal();
  const cdouble dgd = (ddiag.cast<cdouble>().array() * est.value.array()).sum();
  const double pref = 2.0 * atom.omega_a / hbar;
  return {pref * dgd, omega, v, z, pref * est.error_bound * ddiag.maxCoeff()};
}

ChannelPolarizability oscillator_channels(const AtomModel& atom, const SurfaceModel& surface, double z, double omega,
                                          double v, const QuadratureConfig& quad, double detuning) {
  atom.validate();
  auto est = green_k_integrated(surface, z, omega, v, quad);
  require_converged(est, "self-energy k-integral did not converge");
  ChannelPolarizability out;
  const double wa = atom.omega_a;
  for (const auto& ch : atom.channels()) {
    const double amp = 2.0 * ch.d2 / (hbar * wa);
    const cdouble sigma = wa * wa * amp * project(ch.n, est.value);
    out.n.push_back(ch.n);
    out.a.push_back(dressed_amplitude(amp, wa, resonance_factor(wa, omega, detuning) - sigma));
  }
  return out;
}

PolarizabilityTensor polarizability_oscillator(const AtomModel& atom, const SurfaceModel& surface, double z,
                                               double omega, double v, const QuadratureConfig& quad) {
  return {oscillator_channels(atom, surface, z, omega, v, quad).tensor(), omega, v, z};
}

Eigen::Matrix3d polarizability_imaginary_axis(const AtomModel& atom, const SurfaceModel& surface, double z, double xi) {
  atom.validate();
  require_height(z);
  const double delta = surface_response(surface, cdouble(0.0, xi)).real();
  const Eigen::Vector3cd w = static_weight(z) * delta;
  const double wa = atom.omega_a;
  Eigen::Matrix3d out = Eigen::Matrix3d::Zero();
  for (const auto& ch : atom.channels()) {
    const double amp = 2.0 * ch.d2 / (hbar * wa);
    const double sigma = wa * wa * amp * project(ch.n, w).real();
    const double den = wa * wa + xi * xi - sigma;
    if (!(den > 0.0)) throw DomainError("imaginary-axis polarizability: coupling destabilises the oscillator");
    out += amp * wa * wa / den * ch.n * ch.n.transpose();
  }
  return out;
}

ChannelPolarizability bare_channels(const AtomModel& atom, double omega) {
  atom.validate();
  ChannelPolarizability out;
  const double wa = atom.omega_a;
  for (const auto& ch : atom.channels()) {
    const double amp = 2.0 * ch.d2 / (hbar * wa);
    out.n.push_back(ch.n);
    out.a.push_back(dressed_amplitude(amp, wa, (wa - omega) * (wa + omega)));
  }
  return out;
}

namespace {

double trace_factor(TraceNorm norm) { return norm == TraceNorm::FullTrace ? 1.0 : 1.0 / 3.0; }

} // namespace

cdouble alpha_scalar(const AtomModel& atom, const SurfaceModel& surface, double z, double omega, double v,
                     const QuadratureConfig& quad, TraceNorm norm) {
  require_height(z);
  const ChannelPolarizability bare = bare_channels(atom, omega);
  DopplerIntegral spec{z, omega, v, 0, FrequencyWindow::All, SpectralFactor::Dissipative};
  auto est = doppler_green_integral(surface, spec, quad);
  require_converged(est, "dissipative k-integral did not converge");
  const double re = bare.tensor().trace().real() / 3.0;
  const double im = bare.sandwich_trace(est.value, Eigen::Vector3cd::Ones()).real() * trace_factor(norm);
  return {re, im};
}

double alpha_scalar_slope_at_zero(const AtomModel& atom, const SurfaceModel& surface, double z, TraceNorm norm) {
  require_height(z);
  const ChannelPolarizability bare = bare_channels(atom, 0.0);
  const Eigen::Vector3cd w = static_weight(z) * surface_response_slope_at_zero(surface);
  return bare.sandwich_trace(w, Eigen::Vector3cd::Ones()).real() * trace_factor(norm);
}

Eigen::Matrix3d dressed_alpha_slope_at_zero(const AtomModel& atom, const SurfaceModel& surface, double z) {
  atom.validate();
  require_height(z);
  const double wa = atom.omega_a;
  const cdouble d0 = surface_response(surface, 0.0);
  const cdouble d1 = surface_response_derivative(surface, 0.0, 1);
  Eigen::Matrix3d out = Eigen::Matrix3d::Zero();
  for (const auto& ch : atom.channels()) {
    const double amp = 2.0 * ch.d2 / (hbar * wa);
    const cdouble kappa = wa * wa * amp * project(ch.n, static_weight(z));
    const cdouble den = wa * wa - kappa * d0;
    const cdouble slope = amp * wa * wa * kappa * d1 / (den * den);
    out += slope.imag() * ch.n * ch.n.transpose();
  }
  return out;
}

double tls_channel_gamma(const DipoleChannel& ch, const SurfaceModel& surface, double z, double omega, double v,
                         const QuadratureConfig& quad) {
  require_height(z);
  return ch.d2 * project(ch.n, rate_diagonal(surface, z, omega, v, quad).cast<cdouble>()).real();
}

double tls_gamma(const AtomModel& atom, const SurfaceModel& surface, double z, double omega, double v,
                 const QuadratureConfig& quad) {
  atom.validate();
  require_height(z);
  return atom.dd().diagonal().dot(rate_diagonal(surface, z, omega, v, quad));
}

namespace {

// Shift per unit d^2, diagonal entries.
Eigen::Vector3d tls_shift_diagonal(const SurfaceModel& surface, double z, double omega, double v, double omega_a,
                                   const QuadratureConfig& quad) {
  auto est = shift_from_rate([&](double w) -> Eigen::Vector3d { return rate_diagonal(surface, z, w, v, quad); },
                             omega, omega_a, quad);
  return est.value;
}

} // namespace

double tls_delta_shift(const AtomModel& atom, const SurfaceModel& surface, double z, double omega, double v,
                       const QuadratureConfig& quad) {
  atom.validate();
  require_height(z);
  return atom.dd().diagonal().dot(tls_shift_diagonal(surface, z, omega, v, atom.omega_a, quad));
}

ChannelPolarizability tls_channels(const AtomModel& atom, const SurfaceModel& surface, double z, double omega,
                                   double v, const QuadratureConfig& quad, double detuning) {
  atom.validate();
  require_height(z);
  const double wa = atom.omega_a;
  const Eigen::Vector3d rate = rate_diagonal(surface, z, omega, v, quad);
  const Eigen::Vector3d shift =
      surface.is_vacuum() ? Eigen::Vector3d::Zero() : tls_shift_diagonal(surface, z, omega, v, wa, quad);
  ChannelPolarizability out;
  const cdouble i(0.0, 1.0);
  for (const auto& ch : atom.channels()) {
    const double amp = 2.0 * ch.d2 / (hbar * wa);
    const double g = ch.d2 * project(ch.n, rate.cast<cdouble>()).real();
    const double s = ch.d2 * project(ch.n, shift.cast<cdouble>()).real();
    out.n.push_back(ch.n);
    out.a.push_back(dressed_amplitude(amp, wa, resonance_factor(wa, omega, detuning) - wa * wa * s - i * omega * g));
  }
  return out;
}

PolarizabilityTensor tls_polarizability(const AtomModel& atom, const SurfaceModel& surface, double z, double omega,
                                        double v, const QuadratureConfig& quad) {
  return {tls_channels(atom, surface, z, omega, v, quad).tensor(), omega, v, z};
}

ChannelPolarizability atom_channels(const AtomModel& atom, const SurfaceModel& surface, double z, double omega,
                                   double v, const QuadratureConfig& quad, double detuning) {
  if (atom.kind == AtomKind::TwoLevel) return tls_channels(atom, surface, z, omega, v, quad, detuning);
  return oscillator_channels(atom, surface, z, omega, v, quad, detuning);
}

ChannelPolarizability atom_channels_increment(const AtomModel& atom, const SurfaceModel& surface, double z,
                                             double omega, double v, const QuadratureConfig& quad) {
  atom.validate();
  require_height(z);
  const double wa = atom.omega_a;
  const cdouble i(0.0, 1.0);
  ChannelPolarizability out;
  const auto chans = atom.channels();
  if (v == 0.0 || surface.is_vacuum()) {
    for (const auto& ch : chans) {
      out.n.push_back(ch.n);
      out.a.push_back(0.0);
    }
    return out;
  }
  // Per channel: static denominator D0 and the increment ds, alpha(v) - alpha(0) = A wa^2 ds / (D0 (D0 - ds)).
  std::vector<cdouble> d0s, dss;
  if (atom.kind == AtomKind::TwoLevel) {
    const Eigen::Vector3d rate0 = rate_diagonal(surface, z, omega, 0.0, quad);
    const Eigen::Vector3d shift0 = tls_shift_diagonal(surface, z, omega, 0.0, wa, quad);
    auto drate = [&](double w) -> Eigen::Vector3d {
      DopplerIntegral spec{z, w, v, 0, FrequencyWindow::Sign, SpectralFactor::Dissipative, true};
      auto est = doppler_green_integral(surface, spec, quad);
      require_converged(est, "decay-rate increment did not converge");
      return est.value.real() * (2.0 / hbar);
    };
    const Eigen::Vector3d rate1 = drate(omega);
    const Eigen::Vector3d shift1 = shift_from_rate(drate, omega, wa, quad).value;
    for (const auto& ch : chans) {
      const auto proj = [&](const Eigen::Vector3d& x) { return ch.d2 * project(ch.n, x.cast<cdouble>()).real(); };
      d0s.push_back((wa - omega) * (wa + omega) - wa * wa * proj(shift0) - i * omega * proj(rate0));
      dss.push_back(wa * wa * proj(shift1) + i * omega * proj(rate1));
    }
  } else {
    DopplerIntegral stat{z, omega, 0.0, 0, FrequencyWindow::All, SpectralFactor::Response};
    const Eigen::Vector3cd g0 = doppler_green_integral_static(surface, stat);
    DopplerIntegral inc{z, omega, v, 0, FrequencyWindow::All, SpectralFactor::Response, true};
    auto est = doppler_green_integral(surface, inc, quad);
    require_converged(est, "self-energy increment did not converge");
    for (const auto& ch : chans) {
      const double amp = 2.0 * ch.d2 / (hbar * wa);
      d0s.push_back((wa - omega) * (wa + omega) - wa * wa * amp * project(ch.n, g0));
      dss.push_back(wa * wa * amp * project(ch.n, est.value));
    }
  }
  for (std::size_t c = 0; c < chans.size(); ++c) {
    const double amp = 2.0 * chans[c].d2 / (hbar * wa);
    const cdouble d0 = d0s[c], ds = dss[c];
    if (std::abs(d0) <= 1e-15 * wa * wa || std::abs(d0 - ds) <= 1e-15 * wa * wa)
      throw DomainError("polarizability: evaluation at an undamped dressed resonance");
    out.n.push_back(chans[c].n);
    out.a.push_back(amp * wa * wa * ds / (d0 * (d0 - ds)));
  }
  return out;
}

Matrix3c qrt_correlation(const AtomModel& atom, double tau) {
  atom.validate();
  if (!atom.gamma_a) throw DomainError("qrt_correlation: gamma_a is required");
  if (tau < 0.0) throw DomainError("qrt_correlation: tau must be >= 0");
  const cdouble phase = std::exp(cdouble(-0.5 * *atom.gamma_a * tau, -atom.omega_a * tau));
  return atom.dd().cast<cdouble>() * phase;
}

Eigen::Matrix3d qrt_alpha_symmetrised(const AtomModel& atom, double xi) {
  atom.validate();
  const double g = atom.gamma_a.value_or(0.0);
  const cdouble i(0.0, 1.0);
  auto tilde = [&](double x) {
    return (1.0 / (atom.omega_a - i * x - i * g / 2.0) + 1.0 / (atom.omega_a + i * x + i * g / 2.0)) / hbar;
  };
  const double f = (0.5 * (tilde(xi) + tilde(-xi))).real();
  return atom.dd() * f;
}

} // namespace qfric
