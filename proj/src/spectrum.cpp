#include "qfric/spectrum.hpp"

#include "qfric/errors.hpp"
#include "qfric/kspace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace qfric {

namespace {

const double pi = Constants::pi;
const double hbar = Constants::hbar;

Eigen::Vector3d real_diag(const Eigen::Vector3cd& x) { return x.real(); }

Eigen::Vector3d window_integral(const SurfaceModel& surface, double z, double omega, double v, int p,
                                FrequencyWindow win, SpectralFactor factor, const QuadratureConfig& quad) {
  DopplerIntegral spec{z, omega, v, p, win, factor};
  const auto est = doppler_green_integral(surface, spec, quad);
  if (!est.converged)
    throw NonConvergence("k-space integral did not converge", est.value.norm(), est.error_bound);
  return real_diag(est.value);
}

Eigen::Matrix3d hermitian_real(const Matrix3c& m) { return (0.5 * (m + m.adjoint())).real(); }

// QRT response alpha~(omega) = (dd / hbar) [(wa - w - i g/2)^-1 + (wa + w + i g/2)^-1].
Matrix3c qrt_alpha(const AtomModel& atom, double omega) {
  const double g = atom.gamma_a.value_or(0.0);
  const cdouble i(0.0, 1.0);
  const cdouble f = 1.0 / (atom.omega_a - omega - 0.5 * i * g) + 1.0 / (atom.omega_a + omega + 0.5 * i * g);
  return atom.dd().cast<cdouble>() * (f / hbar);
}

double rel_diff(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b) {
  const double s = std::max(a.norm(), b.norm());
  return s == 0.0 ? 0.0 : (a - b).norm() / s;
}

struct FrequencyLayout {
  std::vector<double> outer;     // break points in omega, resonance window excluded
  std::vector<double> detunings; // break points in omega - omega_a inside the window
};

// Break points: low-frequency surface features, the Doppler band, and a window around
// omega_a resolved in the detuning with the dressed widths.
FrequencyLayout spectrum_layout(const AtomModel& atom, const SurfaceModel& surface, double z, double v, double lo,
                                const QuadratureConfig& quad) {
  const double wa = atom.omega_a;
  std::vector<double> det{0.0};
  double reach = 0.0;
  const auto ch = atom_channels(atom, surface, z, wa, 0.0, quad, 0.0);
  const auto bare = atom.channels();
  for (std::size_t c = 0; c < ch.a.size(); ++c) {
    const double A = 2.0 * bare[c].d2 / (hbar * wa);
    const cdouble sigma = -A * wa * wa / ch.a[c];
    // Root of -d (2 wa + d) = Re sigma, and the half width of the Lorentzian.
    const double shift = -sigma.real() / (wa + std::sqrt(std::max(wa * wa - sigma.real(), 0.25 * wa * wa)));
    const double width = std::max(std::abs(sigma.imag()) / (2.0 * wa), 1e-15 * wa);
    det.push_back(shift);
    for (double f = 1.0; f <= 1e6 && f * width < 0.25 * wa; f *= 10.0) {
      det.push_back(shift - f * width);
      det.push_back(shift + f * width);
      reach = std::max(reach, std::abs(shift) + f * width);
    }
  }
  reach = std::min(std::max(2.0 * reach, 1e-9 * wa), 0.25 * wa);
  det.push_back(-reach);
  det.push_back(reach);

  std::vector<double> pts{lo, wa - reach, wa + reach, 1.5 * wa, 2.0 * wa};
  const double ws = surface_frequency_scale(surface, wa);
  for (double f : {0.1, 1.0, 10.0, 100.0}) pts.push_back(f * ws);
  if (v != 0.0) {
    const double wd = std::abs(v) / z;
    pts.push_back(0.0);
    for (double f : {0.1, 1.0, 5.0}) {
      pts.push_back(f * wd);
      pts.push_back(-f * wd);
    }
  }
  auto clean = [](std::vector<double> x, double a, double b) {
    std::sort(x.begin(), x.end());
    std::vector<double> out;
    for (double p : x) {
      if (p < a || p > b) continue;
      if (!out.empty() && p - out.back() <= 1e-12 * std::max(std::abs(p), b - a)) continue;
      out.push_back(p);
    }
    return out;
  };
  FrequencyLayout layout;
  layout.detunings = clean(det, -reach, reach);
  std::vector<double> below = clean(pts, lo, wa - reach), above = clean(pts, wa + reach, 2.0 * wa);
  layout.outer = below;
  layout.outer.insert(layout.outer.end(), above.begin(), above.end());
  return layout;
}

SpectrumTensor spectrum_at(const AtomModel& atom, const SurfaceModel& surface, double z, double omega, double v,
                           const QuadratureConfig& quad, double detuning) {
  if (atom.kind == AtomKind::QRT) return {qrt_spectrum(atom, omega), omega, v, z};
  const auto ch = atom_channels(atom, surface, z, omega, v, quad, detuning);
  const Eigen::Vector3d m = doppler_dissipative_window(surface, z, omega, v, quad);
  return {hermitian_real(ch.sandwich(m.cast<cdouble>())) * (hbar / pi), omega, v, z};
}

} // namespace

double surface_frequency_scale(const SurfaceModel& surface, double omega_a) {
  struct Visitor {
    double omega_a;
    double operator()(const Ohmic& o) const { return 1.0 / (2.0 * Constants::eps0 * o.resistivity); }
    double operator()(const Drude& d) const { return d.damping > 0.0 ? d.damping : d.plasma_frequency; }
    double operator()(const ConstantPermittivity&) const { return omega_a; }
  };
  return std::visit(Visitor{omega_a}, surface.kind);
}

double velocity_scale(const AtomModel& atom, const SurfaceModel& surface, double z) {
  return z * surface_frequency_scale(surface, atom.omega_a);
}

Eigen::Vector3d doppler_dissipative_window(const SurfaceModel& surface, double z, double omega, double v,
                                           const QuadratureConfig& quad) {
  return window_integral(surface, z, omega, v, 0, FrequencyWindow::Positive, SpectralFactor::Dissipative, quad);
}

Eigen::Matrix3d qrt_spectrum(const AtomModel& atom, double omega) {
  const double g = atom.gamma_a.value_or(0.0);
  const double dw = omega - atom.omega_a;
  return atom.dd() * ((g / (2.0 * pi)) / (dw * dw + 0.25 * g * g));
}

SpectrumTensor power_spectrum(const AtomModel& atom, const SurfaceModel& surface, double z, double omega, double v,
                              const QuadratureConfig& quad) {
  return spectrum_at(atom, surface, z, omega, v, quad, std::numeric_limits<double>::quiet_NaN());
}

Eigen::Matrix3d alpha_dissipative(const AtomModel& atom, const SurfaceModel& surface, double z, double omega,
                                  double v, const QuadratureConfig& quad) {
  const Matrix3c a = atom.kind == AtomKind::QRT ? qrt_alpha(atom, omega)
                                                : atom_channels(atom, surface, z, omega, v, quad).tensor();
  const Matrix3c ai = (a - a.adjoint()) / cdouble(0.0, 2.0);
  return hermitian_real(ai);
}

Eigen::Matrix3d current_J(const AtomModel& atom, const SurfaceModel& surface, double z, double omega, double v,
                          const QuadratureConfig& quad) {
  if (atom.kind == AtomKind::QRT || (v == 0.0 && omega != 0.0)) return Eigen::Matrix3d::Zero();
  const auto ch = atom_channels(atom, surface, z, omega, v, quad);
  Eigen::Vector3d x;
  if (omega > 0.0) {
    x = window_integral(surface, z, omega, v, 0, FrequencyWindow::Negative, SpectralFactor::Dissipative, quad);
  } else if (omega < 0.0) {
    x = -window_integral(surface, z, omega, v, 0, FrequencyWindow::Positive, SpectralFactor::Dissipative, quad);
  } else {
    x = 0.5 * window_integral(surface, z, omega, v, 0, FrequencyWindow::All, SpectralFactor::Dissipative, quad) -
        window_integral(surface, z, omega, v, 0, FrequencyWindow::Positive, SpectralFactor::Dissipative, quad);
  }
  return hermitian_real(ch.sandwich(x.cast<cdouble>()));
}

Eigen::Matrix3d g_tensor(const SurfaceModel& surface, double z, double omega, const QuadratureConfig& quad) {
  const Eigen::Vector3d g =
      window_integral(surface, z, omega, 0.0, 2, FrequencyWindow::All, SpectralFactor::DissipativeSecondDerivative, quad);
  return g.asDiagonal();
}

Eigen::Matrix3d eta_tensor(const AtomModel& atom, const SurfaceModel& surface, double z, double omega,
                           const QuadratureConfig& quad) {
  if (atom.kind == AtomKind::QRT) return Eigen::Matrix3d::Zero();
  const auto ch = atom_channels(atom, surface, z, omega, 0.0, quad);
  const Matrix3c a = ch.tensor();

  // Second v-derivative of each channel amplitude; the increment is even in v.
  const double h = 1e-2 * z * std::max(surface_frequency_scale(surface, atom.omega_a), std::abs(omega));
  const auto i1 = atom_channels_increment(atom, surface, z, omega, h, quad);
  const auto i2 = atom_channels_increment(atom, surface, z, omega, 0.5 * h, quad);
  Matrix3c a2 = Matrix3c::Zero();
  for (std::size_t c = 0; c < ch.a.size(); ++c) {
    const cdouble d1 = 2.0 * i1.a[c] / (h * h), d2 = 2.0 * i2.a[c] / (0.25 * h * h);
    a2 += ((4.0 * d2 - d1) / 3.0) * (ch.n[c] * ch.n[c].transpose()).cast<cdouble>();
  }

  const Eigen::Vector3d gi =
      window_integral(surface, z, omega, 0.0, 0, FrequencyWindow::All, SpectralFactor::Dissipative, quad);
  const Matrix3c G = gi.cast<cdouble>().asDiagonal();
  const Matrix3c g = g_tensor(surface, z, omega, quad).cast<cdouble>();
  const Matrix3c eta = a2 * G * a.adjoint() + a * g * a.adjoint() + a * G * a2.adjoint();
  return hermitian_real(eta);
}

std::vector<CorrelationSample> correlation_from_spectrum(const AtomModel& atom, const SurfaceModel& surface, double z,
                                                         const std::vector<double>& taus, double v,
                                                         const QuadratureConfig& quad) {
  std::vector<CorrelationSample> out;
  out.reserve(taus.size());
  if (atom.kind == AtomKind::QRT) {
    for (double t : taus) out.push_back({qrt_correlation(atom, t), t, v});
    return out;
  }
  const QuadratureConfig inner = quad.tightened(0.1);
  const double wa = atom.omega_a;
  // The panel layout depends only on S, so every tau reuses the same samples.
  std::map<double, Eigen::Matrix3d> memo, memo_det;
  auto S = [&](double w) -> Eigen::Matrix3d {
    auto it = memo.find(w);
    if (it != memo.end()) return it->second;
    const Eigen::Matrix3d s = power_spectrum(atom, surface, z, w, v, inner).value;
    memo.emplace(w, s);
    return s;
  };
  auto Sd = [&](double d) -> Eigen::Matrix3d {
    auto it = memo_det.find(d);
    if (it != memo_det.end()) return it->second;
    const Eigen::Matrix3d s = spectrum_at(atom, surface, z, wa + d, v, inner, d).value;
    memo_det.emplace(d, s);
    return s;
  };

  const double lo = v == 0.0 ? 0.0 : -25.0 * std::abs(v) / z;
  const auto layout = spectrum_layout(atom, surface, z, v, lo, inner);
  const auto& pts = layout.outer;
  const double inf = std::numeric_limits<double>::infinity();
  for (double t : taus) {
    CorrelationSample c{Matrix3c::Zero(), t, v};
    auto add = [&](const auto& est, cdouble phase) {
      c.value += est.value * phase;
      c.error_bound += est.error_bound;
      c.converged = c.converged && est.converged;
    };
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      if (pts[i] < wa && pts[i + 1] > wa) continue; // the resonance window
      add(fourier_transform(S, t, pts[i], pts[i + 1], quad), 1.0);
    }
    const cdouble phase = std::exp(cdouble(0.0, -wa * t));
    const auto& det = layout.detunings;
    for (std::size_t i = 0; i + 1 < det.size(); ++i) add(fourier_transform(Sd, t, det[i], det[i + 1], quad), phase);
    add(fourier_transform(S, t, pts.back(), inf, quad, pts.back()), 1.0);
    out.push_back(c);
  }
  return out;
}

FdtResidual fdt_residual(const AtomModel& atom, const SurfaceModel& surface, double z,
                         const std::vector<double>& omegas, const QuadratureConfig& quad, double v) {
  FdtResidual r;
  for (double w : omegas) {
    const Eigen::Matrix3d s = power_spectrum(atom, surface, z, w, v, quad).value;
    const Eigen::Matrix3d ai = alpha_dissipative(atom, surface, z, w, v, quad);
    const Eigen::Matrix3d expected = (hbar / pi) * (step(w) * ai - current_J(atom, surface, z, w, v, quad));
    r.fdt = std::max(r.fdt, rel_diff(s, expected));
    // At w = 0 both sides vanish by kx parity; only rounding would be compared.
    if (atom.kind != AtomKind::QRT && w != 0.0) {
      const auto ch = atom_channels(atom, surface, z, w, v, quad);
      const Eigen::Vector3d gi =
          window_integral(surface, z, w, v, 0, FrequencyWindow::All, SpectralFactor::Dissipative, quad);
      r.identity = std::max(r.identity, rel_diff(ai, hermitian_real(ch.sandwich(gi.cast<cdouble>()))));
    }
  }
  return r;
}

} // namespace qfric
