#include "qfric/bath_oracle.hpp"

#include "qfric/errors.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace qfric {

namespace {

const double pi = Constants::pi;
const double hbar = Constants::hbar;
const double eps0 = Constants::eps0;
using cd = std::complex<double>;

template <class T>
void require_converged(const IntegralEstimate<T>& est, const char* what) {
  if (!est.converged) throw NonConvergence(what, magnitude(est.value), est.error_bound);
}

double bath_frequency_scale(const SurfaceModel& surface, double omega_a) {
  struct Visitor {
    double operator()(const Ohmic& o) const { return 1.0 / (2.0 * eps0 * o.resistivity); }
    double operator()(const Drude& d) const { return std::max(d.plasma_frequency, d.damping); }
    double operator()(const ConstantPermittivity&) const { return 0.0; }
  };
  return std::max(omega_a, std::visit(Visitor{}, surface.kind));
}

// Smooth step: 1 below x1, 0 above x2.
double handover(double x, double x1, double x2) {
  if (x <= x1) return 1.0;
  if (x >= x2) return 0.0;
  const double s = (x - x1) / (x2 - x1);
  auto h = [](double t) { return t <= 0.0 ? 0.0 : std::exp(-1.0 / t); };
  return h(1.0 - s) / (h(1.0 - s) + h(s));
}

double delta_i(const SurfaceModel& s, double w) { return surface_response(s, w).imag(); }

// int dky/(2pi)^2 |n.t|^2 k e^{-2kz} / (2 eps0) over the whole ky line, per unit Delta.
double ky_folded_weight(const Eigen::Vector3d& n, double kx, double z, const QuadratureConfig& quad) {
  auto f = [&](double ky) {
    const double k = std::hypot(kx, ky);
    if (k == 0.0) return 0.0;
    const double w = n.x() * n.x() * kx * kx + n.y() * n.y() * ky * ky + n.z() * n.z() * k * k;
    return 2.0 * w / k * std::exp(-2.0 * k * z);
  };
  const auto est = integrate_semi_infinite(f, 0.0, 1.0 / z, Substitution::Rational, quad);
  require_converged(est, "bath: ky fold did not converge");
  return est.value / (2.0 * eps0 * 4.0 * pi * pi);
}

// Reconstruction with a box kernel over each node's cell: L2 error against the target on the
// union of cell edges (the reconstruction is piecewise constant there), and the error of the
// integrated weight.
void reconstruction_stats(DiscreteBath& bath, const std::vector<double>& widths, double total_target,
                          double tolerance) {
  const std::size_t N = bath.modes.size();
  std::vector<double> edges{0.0};
  for (std::size_t j = 0; j < N; ++j) {
    edges.push_back(std::max(0.0, bath.modes[j].omega - 0.5 * widths[j]));
    edges.push_back(bath.modes[j].omega + 0.5 * widths[j]);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  const auto gl = gauss_legendre(4);
  double num = 0.0, den = 0.0;
  for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
    const double lo = edges[e], hi = std::min(edges[e + 1], bath.omega_top);
    if (!(hi > lo)) continue;
    const double mid = 0.5 * (lo + hi);
    double rec = 0.0;
    for (std::size_t j = 0; j < N; ++j)
      if (std::abs(mid - bath.modes[j].omega) < 0.5 * widths[j]) rec += bath.modes[j].g * bath.modes[j].g / widths[j];
    for (std::size_t q = 0; q < gl.x.size(); ++q) {
      const double w = mid + 0.5 * (hi - lo) * gl.x[q];
      const double target = bath_spectral_density(bath.atom, bath.surface, bath.z, w);
      const double dw = 0.5 * (hi - lo) * gl.w[q];
      num += (rec - target) * (rec - target) * dw;
      den += target * target * dw;
    }
  }
  double total = 0.0;
  for (const auto& m : bath.modes) total += m.g * m.g;
  bath.reconstruction_error = den > 0.0 ? std::sqrt(num / den) : 0.0;
  bath.weight_error = total_target > 0.0 ? std::abs(total - total_target) / total_target : 0.0;
  bath.reconstruction_ok = bath.reconstruction_error <= tolerance;
}

// Quadratic Hamiltonian H/hbar = (x^T V x + p^T T p) / 2 of atom (index 0) plus modes.
struct Quadratic {
  Eigen::MatrixXd V;
  Eigen::VectorXd T;
  Eigen::VectorXd kappa; // x_a x_n coupling, rad/s
};

Quadratic quadratic_form(const DiscreteBath& bath, double v) {
  const std::size_t N = bath.size();
  const Eigen::Index n = static_cast<Eigen::Index>(N) + 1;
  Quadratic q;
  q.V = Eigen::MatrixXd::Zero(n, n);
  q.T.resize(n);
  q.kappa.resize(n);
  const double wa = bath.atom.omega_a;
  q.V(0, 0) = wa - bath.tail_shift;
  q.T(0) = wa;
  q.kappa(0) = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const auto& m = bath.modes[i];
    const Eigen::Index j = static_cast<Eigen::Index>(i) + 1;
    const double om = m.omega - m.kx * v;
    const double k = m.g * std::sqrt(2.0 / wa);
    q.V(j, j) = om;
    q.T(j) = om;
    q.V(0, j) = q.V(j, 0) = -k;
    q.kappa(j) = k;
  }
  return q;
}

// Normal modes of a positive quadratic form: x = T^{1/2} U y, D = T^{1/2} V T^{1/2} = U W^2 U^T.
struct NormalModes {
  Eigen::VectorXd sqrtT;
  Eigen::VectorXd freq;
  Eigen::MatrixXd U;
};

NormalModes normal_modes(const Quadratic& q) {
  if ((q.T.array() <= 0.0).any()) throw DomainError("bath oracle: static mode frequencies must be positive");
  NormalModes nm;
  nm.sqrtT = q.T.cwiseSqrt();
  const Eigen::MatrixXd D = nm.sqrtT.asDiagonal() * q.V * nm.sqrtT.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(D);
  if (es.info() != Eigen::Success) throw NonConvergence("bath oracle: normal-mode eigensolver failed", 0.0, 0.0);
  if (es.eigenvalues()(0) <= 0.0)
    throw DomainError("bath oracle: coupled Hamiltonian is not bounded below (coupling too strong)");
  nm.freq = es.eigenvalues().cwiseSqrt();
  nm.U = es.eigenvectors();
  return nm;
}

// Ground-state covariance, ordering (x_0..x_N, p_0..p_N).
Eigen::MatrixXd ground_covariance(const NormalModes& nm) {
  const Eigen::Index n = nm.freq.size();
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  const Eigen::MatrixXd& U = nm.U;
  s.topLeftCorner(n, n) = nm.sqrtT.asDiagonal() * (U * (0.5 * nm.freq.cwiseInverse()).asDiagonal() * U.transpose()) *
                          nm.sqrtT.asDiagonal();
  const Eigen::VectorXd inv = nm.sqrtT.cwiseInverse();
  s.bottomRightCorner(n, n) =
      inv.asDiagonal() * (U * (0.5 * nm.freq).asDiagonal() * U.transpose()) * inv.asDiagonal();
  return s;
}

Eigen::MatrixXd symplectic(Eigen::Index n) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  J.topRightCorner(n, n).setIdentity();
  J.bottomLeftCorner(n, n) = -Eigen::MatrixXd::Identity(n, n);
  return J;
}

} // namespace

double bath_spectral_density(const AtomModel& atom, const SurfaceModel& surface, double z, double omega) {
  if (!(omega > 0.0) || !atom.dipole) return 0.0;
  const Eigen::Vector3d d = *atom.dipole;
  const double dwd = d.dot(nearfield_k_integrated(z) * d);
  return 2.0 * atom.omega_a / hbar * dwd * delta_i(surface, omega) / pi;
}

DiscreteBath build_bath(const AtomModel& atom, const SurfaceModel& surface, double z, std::size_t n_modes,
                        const BathConfig& config, const QuadratureConfig& quad) {
  atom.validate();
  surface.validate();
  if (atom.kind != AtomKind::Oscillator || !atom.dipole)
    throw DomainError("bath oracle: needs an oscillator atom with a dipole vector");
  if (!(z > 0.0)) throw DomainError("bath oracle: height z must be > 0");
  if (n_modes < 2) throw ConfigError("bath oracle: N must be >= 2");
  if (!(config.design_velocity >= 0.0)) throw ConfigError("bath oracle: design velocity must be >= 0");

  DiscreteBath bath;
  bath.atom = atom;
  bath.surface = surface;
  bath.z = z;
  bath.design_velocity = config.design_velocity;
  bath.dipole = atom.dipole->norm();
  if (bath.dipole == 0.0) throw DomainError("bath oracle: dipole must be nonzero");
  bath.axis = *atom.dipole / bath.dipole;

  const double wa = atom.omega_a;
  const double scale = bath_frequency_scale(surface, wa);
  const bool lossy = !surface.is_vacuum() && !std::holds_alternative<ConstantPermittivity>(surface.kind);
  if (std::holds_alternative<ConstantPermittivity>(surface.kind) && !surface.is_vacuum() &&
      std::get<ConstantPermittivity>(surface.kind).epsilon.imag() != 0.0)
    throw DomainError("bath oracle: a lossy constant permittivity has no finite bath (flat spectral density)");

  const double nwn = bath.axis.dot(nearfield_k_integrated(z) * bath.axis);
  const double pref = 2.0 * wa * bath.dipole * bath.dipole / (pi * hbar); // J = pref * weight * Delta_I
  std::vector<double> widths;
  auto add = [&](double w, double kx, double weight) {
    const double g2 = lossy ? pref * weight * delta_i(surface, w) : 0.0;
    bath.modes.push_back({w, kx, std::sqrt(std::max(g2, 0.0))});
  };

  double top = 0.0;
  if (!bath.moving_layout()) {
    const auto nu = std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(config.uniform_fraction * n_modes)),
                                            1, n_modes - 1);
    const std::size_t ng = n_modes - nu;
    const double wu = config.uniform_span * scale;
    top = wu * config.graded_span;
    const double dw = wu / nu;
    for (std::size_t i = 0; i < nu; ++i) {
      add((i + 0.5) * dw, 0.0, nwn * dw);
      widths.push_back(dw);
    }
    const double r = std::log(config.graded_span) / ng;
    for (std::size_t i = 0; i < ng; ++i) {
      const double a = wu * std::exp(r * i), b = wu * std::exp(r * (i + 1));
      add(std::sqrt(a * b), 0.0, nwn * (b - a));
      widths.push_back(b - a);
    }
    bath.revival_time = 2.0 * pi / dw;
  } else {
    const double v = config.design_velocity;
    const int nk = std::max(1, config.kx_nodes_per_sign);
    const auto n_dress = std::max<std::size_t>(
        2, static_cast<std::size_t>(std::lround(config.dressing_fraction * n_modes)));
    if (n_modes < n_dress + 2 * nk) throw ConfigError("bath oracle: N too small for the moving layout");
    const int n_low = static_cast<int>((n_modes - n_dress) / (2 * nk));
    const std::size_t n_dressing = n_modes - static_cast<std::size_t>(2 * nk * n_low);
    bath.low_modes_per_kx = n_low;

    const auto gl = gauss_legendre(nk);
    const double kmax = config.kx_max / z;
    std::vector<double> kx(nk), kw(nk), fold(nk), band(nk);
    for (int i = 0; i < nk; ++i) {
      kx[i] = 0.5 * kmax * (gl.x[i] + 1.0);
      kw[i] = 0.5 * kmax * gl.w[i];
      fold[i] = ky_folded_weight(bath.axis, kx[i], z, quad);
      band[i] = (kx[i] + config.doppler_margin / z) * v;
      bath.band_max = std::max(bath.band_max, band[i]);
    }
    for (int i = 0; i < nk; ++i)
      for (double sgn : {1.0, -1.0}) {
        const double dw = band[i] / n_low;
        for (int j = 0; j < n_low; ++j) {
          const double w = (j + 0.5) * dw;
          add(w, sgn * kx[i], kw[i] * fold[i] * dw * handover(w / band[i], config.handover_start, 1.0));
          widths.push_back(dw);
        }
      }
    // The rest of the spectrum, k-integrated.
    const double lo = config.dressing_low * scale, hi = config.dressing_high * scale;
    top = hi;
    const auto gd = gauss_legendre(static_cast<int>(n_dressing));
    const double la = std::log(lo), lb = std::log(hi);
    for (std::size_t j = 0; j < n_dressing; ++j) {
      const double w = std::exp(0.5 * (lb - la) * (gd.x[j] + 1.0) + la);
      const double dw = 0.5 * (lb - la) * gd.w[j] * w;
      double low = 0.0;
      for (int i = 0; i < nk; ++i) low += 2.0 * kw[i] * fold[i] * handover(w / band[i], config.handover_start, 1.0);
      add(w, 0.0, std::max(nwn - low, 0.0) * dw);
      widths.push_back(std::max(dw, 1e-3 * w));
    }
    bath.revival_time = 2.0 * pi * n_low / bath.band_max;
  }
  bath.omega_top = top;

  if (lossy) {
    auto f = [&](double w) { return bath_spectral_density(atom, surface, z, w) / w; };
    const auto est = integrate_semi_infinite(f, top, top, Substitution::Rational, quad);
    require_converged(est, "bath oracle: tail shift did not converge");
    bath.tail_shift = 2.0 / wa * est.value;
    auto jf = [&](double w) { return bath_spectral_density(atom, surface, z, w); };
    const auto tot = integrate_positive_axis([&](double w) { return w < top ? jf(w) : 0.0; },
                                             {scale, top}, quad);
    reconstruction_stats(bath, widths, tot.value, config.reconstruction_tolerance);
  }
  return bath;
}

StaticOracleResult evolve_static(const DiscreteBath& bath, const std::vector<double>& tau) {
  StaticOracleResult out;
  out.tau = tau;
  out.revival_time = bath.revival_time;
  const Quadratic q = quadratic_form(bath, 0.0);
  const NormalModes nm = normal_modes(q);
  const Eigen::Index n = nm.freq.size();
  const double d2 = bath.dipole * bath.dipole;
  const double wa = bath.atom.omega_a;
  out.mode_frequency.resize(n);
  out.mode_weight.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.mode_frequency[k] = nm.freq(k);
    out.mode_weight[k] = d2 * wa * nm.U(0, k) * nm.U(0, k) / nm.freq(k);
  }
  out.correlation.reserve(tau.size());
  for (double t : tau) {
    cd c = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) c += out.mode_weight[k] * std::exp(cd(0.0, -nm.freq(k) * t));
    out.correlation.push_back(c);
  }
  // Uncertainty bound of the ground-state covariance.
  const Eigen::MatrixXd s = ground_covariance(nm);
  const Eigen::MatrixXcd m = s.cast<cd>() + cd(0.0, 0.5) * symplectic(n).cast<cd>();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
  out.min_uncertainty_eigenvalue = es.eigenvalues()(0);
  const double tmax = tau.empty() ? 0.0 : *std::max_element(tau.begin(), tau.end());
  if (tmax > 0.5 * bath.revival_time) {
    out.converged = false;
    out.note = "tau grid reaches past half the revival time";
  }
  return out;
}

double oracle_spectrum(const StaticOracleResult& result, double omega, double width) {
  double s = 0.0;
  for (std::size_t k = 0; k < result.mode_frequency.size(); ++k) {
    const double x = (omega - result.mode_frequency[k]) / width;
    s += result.mode_weight[k] * std::exp(-0.5 * x * x);
  }
  return s / (std::sqrt(2.0 * pi) * width);
}

MovingOracleResult evolve_moving(const DiscreteBath& bath, double v, const std::vector<double>& t_grid,
                                 const MovingOracleConfig& config) {
  if (!bath.moving_layout()) throw ConfigError("bath oracle: moving run needs a bath built with a design velocity");
  MovingOracleResult out;
  out.v = v;
  const double z = bath.z;
  const double wa = bath.atom.omega_a;

  double kx_max = 0.0;
  for (const auto& m : bath.modes) kx_max = std::max(kx_max, std::abs(m.kx));

  const double t_end = config.revival_fraction * bath.revival_time;
  if (t_grid.empty()) {
    double period = 2.0 * pi / wa;
    if (v != 0.0 && kx_max > 0.0) period = std::min(period, 2.0 * pi / (kx_max * std::abs(v)));
    const double h = period / config.samples_per_period;
    const auto steps = static_cast<std::size_t>(std::ceil(t_end / h));
    for (std::size_t i = 0; i <= steps; ++i) out.t.push_back(i * h);
  } else {
    out.t = t_grid;
  }

  const Quadratic q = quadratic_form(bath, v);
  const Eigen::Index n = q.T.size();
  Eigen::VectorXd f = Eigen::VectorXd::Zero(2 * n);
  for (std::size_t i = 0; i < bath.size(); ++i) {
    const Eigen::Index j = static_cast<Eigen::Index>(i) + 1;
    f(n + j) = -hbar * bath.modes[i].kx * q.kappa(j); // F = -hbar sum kx kappa <x_a p_n>
  }

  Eigen::MatrixXd sigma0;
  if (config.initial == InitialState::DressedStatic) {
    sigma0 = ground_covariance(normal_modes(quadratic_form(bath, 0.0)));
  } else {
    sigma0 = 0.5 * Eigen::MatrixXd::Identity(2 * n, 2 * n);
  }

  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  K.topRightCorner(n, n) = q.T.asDiagonal();
  K.bottomLeftCorner(n, n) = -q.V;
  auto energy = [&](const Eigen::MatrixXd& s) {
    return 0.5 * ((q.V * s.topLeftCorner(n, n)).trace() + (q.T.asDiagonal() * s.bottomRightCorner(n, n)).trace());
  };

  if (v == 0.0 && config.initial == InitialState::DressedStatic) {
    // The dressed ground state is stationary: the force is constant.
    const double f0 = f.dot(sigma0.col(0));
    out.force.assign(out.t.size(), f0);
    out.min_covariance_eigenvalue = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sigma0, Eigen::EigenvaluesOnly)
                                        .eigenvalues()(0);
  } else {
    Eigen::EigenSolver<Eigen::MatrixXd> es(K);
    if (es.info() != Eigen::Success) throw NonConvergence("bath oracle: propagator eigensolver failed", 0.0, 0.0);
    const Eigen::MatrixXcd Vv = es.eigenvectors();
    const Eigen::VectorXcd lam = es.eigenvalues();
    out.max_growth_rate = lam.real().cwiseAbs().maxCoeff();
    const Eigen::MatrixXcd Vi = Vv.inverse();
    const Eigen::MatrixXcd Q = Vi * sigma0.cast<cd>() * Vi.transpose();
    const Eigen::VectorXcd a = Vv.row(0).transpose();
    const Eigen::VectorXcd b = Vv.transpose() * f.cast<cd>();
    const Eigen::MatrixXcd W = a.asDiagonal() * Q * b.asDiagonal();

    // F(t) = e(t)^T W e(t), e = exp(lambda t), in blocks of time samples.
    out.force.resize(out.t.size());
    const Eigen::Index block = 256;
    for (Eigen::Index s0 = 0; s0 < static_cast<Eigen::Index>(out.t.size()); s0 += block) {
      const Eigen::Index m = std::min<Eigen::Index>(block, static_cast<Eigen::Index>(out.t.size()) - s0);
      Eigen::MatrixXcd E(2 * n, m);
      for (Eigen::Index c = 0; c < m; ++c) E.col(c) = (lam * out.t[s0 + c]).array().exp();
      const Eigen::MatrixXcd WE = W * E;
      for (Eigen::Index c = 0; c < m; ++c) out.force[s0 + c] = (E.col(c).transpose() * WE.col(c)).value().real();
    }

    // Covariance at the last sample: positivity and (v = 0) energy bookkeeping.
    const double tl = out.t.empty() ? 0.0 : out.t.back();
    const Eigen::VectorXcd e = (lam * tl).array().exp();
    const Eigen::MatrixXd st = (Vv * (e.asDiagonal() * Q * e.asDiagonal()) * Vv.transpose()).real();
    out.min_covariance_eigenvalue =
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(0.5 * (st + st.transpose()), Eigen::EigenvaluesOnly)
            .eigenvalues()(0);
    if (v == 0.0) {
      const double e0 = energy(sigma0);
      out.energy_drift = e0 != 0.0 ? std::abs(energy(st) - e0) / std::abs(e0) : 0.0;
    }
  }

  // Plateau window.
  out.window_end = t_end;
  out.window_start = v != 0.0 ? config.transient * z / std::abs(v) : 0.5 * t_end;
  std::vector<double> tw, fw;
  for (std::size_t i = 0; i < out.t.size(); ++i)
    if (out.t[i] >= out.window_start && out.t[i] <= out.window_end) {
      tw.push_back(out.t[i]);
      fw.push_back(out.force[i]);
    }
  if (static_cast<int>(tw.size()) < config.min_plateau_samples) {
    out.converged = false;
    out.note = "no plateau before revival";
    out.window_start = 0.5 * out.window_end;
    tw.clear();
    fw.clear();
    for (std::size_t i = 0; i < out.t.size(); ++i)
      if (out.t[i] >= out.window_start && out.t[i] <= out.window_end) {
        tw.push_back(out.t[i]);
        fw.push_back(out.force[i]);
      }
  }
  if (!fw.empty()) {
    const double m = static_cast<double>(fw.size());
    double sf = 0.0, st = 0.0;
    for (std::size_t i = 0; i < fw.size(); ++i) sf += fw[i], st += tw[i];
    const double mf = sf / m, mt = st / m;
    double vf = 0.0, ctf = 0.0, vt = 0.0;
    for (std::size_t i = 0; i < fw.size(); ++i) {
      vf += (fw[i] - mf) * (fw[i] - mf);
      ctf += (tw[i] - mt) * (fw[i] - mf);
      vt += (tw[i] - mt) * (tw[i] - mt);
    }
    out.plateau = mf;
    out.plateau_spread = std::sqrt(vf / m);
    out.plateau_drift = vt > 0.0 ? ctf / vt * (tw.back() - tw.front()) : 0.0;
  }
  if (out.max_growth_rate * t_end > config.max_growth) {
    out.converged = false;
    out.note = "dynamically unstable propagator";
  }
  return out;
}

} // namespace qfric
