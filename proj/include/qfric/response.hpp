#pragma once

// Atomic response above a surface: the dressed (velocity dependent) oscillator
// polarizability, the perturbative two-level response and the phenomenological
// QRT correlation model.
//
// An atom is handled as a set of independent dipole channels (unit vector n_c, squared
// moment d_c^2). A dipole atom has one channel along d; an isotropic atom of static
// polarizability alpha0 has three axis channels with d_c^2 = hbar omega_a alpha0 / 2, which
// reproduces alpha0 on each axis. The polarizability tensor is sum_c a_c n_c n_c^T.

#include "qfric/kspace.hpp"
#include "qfric/materials.hpp"
#include "qfric/quadrature.hpp"

#include <Eigen/Core>

#include <limits>
#include <optional>
#include <vector>

namespace qfric {

enum class AtomKind { Oscillator, TwoLevel, QRT };

/// Normalisation of the scalar polarizability of an isotropic atom: the full trace of
/// alpha G_I alpha^dagger, or a third of it.
enum class TraceNorm { FullTrace, ThirdTrace };

struct DipoleChannel {
  Eigen::Vector3d n;
  double d2; // (C m)^2
};

struct AtomModel {
  AtomKind kind = AtomKind::Oscillator;
  std::optional<Eigen::Vector3d> dipole; // C m
  std::optional<double> alpha0;          // C m^2 / V, isotropic atoms only
  double omega_a = 0.0;                  // rad/s
  std::optional<double> gamma_a;         // rad/s, QRT only

  static AtomModel isotropic(AtomKind kind, double alpha0, double omega_a);
  static AtomModel with_dipole(AtomKind kind, const Eigen::Vector3d& d, double omega_a);

  void validate() const;
  bool is_isotropic() const { return alpha0.has_value(); }
  std::vector<DipoleChannel> channels() const;
  /// d d^T, or (|d|^2 / 3) I for an isotropic atom.
  Eigen::Matrix3d dd() const;
  /// |d|^2; 3 hbar omega_a alpha0 / 2 for an isotropic atom.
  double dipole_norm2() const;
  /// Static free-space polarizability per unit vector, 2 |d|^2 / (3 hbar omega_a) or alpha0.
  double static_polarizability() const;
};

struct SelfEnergySample {
  cdouble value; // rad^2/s^2
  double omega, v, z;
  double error_bound = 0.0;
};

struct PolarizabilityTensor {
  Matrix3c value; // C m^2 / V
  double omega, v, z;
};

/// Channel amplitudes of a polarizability tensor: alpha = sum_c a_c n_c n_c^T.
struct ChannelPolarizability {
  std::vector<Eigen::Vector3d> n;
  std::vector<cdouble> a;

  Matrix3c tensor() const;
  /// Tr[alpha X alpha^dagger Y] for diagonal X and Y.
  cdouble sandwich_trace(const Eigen::Vector3cd& x, const Eigen::Vector3cd& y) const;
  /// alpha X alpha^dagger for diagonal X.
  Matrix3c sandwich(const Eigen::Vector3cd& x) const;
};

/// Diagonal of int d^2k/(2 pi)^2 G(k, omega + kx v), symmetrised.
IntegralEstimate<Eigen::Vector3cd> green_k_integrated(const SurfaceModel& surface, double z, double omega, double v,
                                                      const QuadratureConfig& quad);

/// Sigma(omega; v) = (2 omega_a / hbar) Tr[dd int G]. For an isotropic atom this is the sum
/// of the three channel self-energies.
SelfEnergySample self_energy(const AtomModel& atom, const SurfaceModel& surface, double z, double omega, double v,
                             const QuadratureConfig& quad);

/// Dressed channels. A finite detuning means omega = omega_a + detuning and is used for the
/// resonance factor, which keeps sub-ulp structure near omega_a.
ChannelPolarizability oscillator_channels(const AtomModel& atom, const SurfaceModel& surface, double z, double omega,
                                          double v, const QuadratureConfig& quad,
                                          double detuning = std::numeric_limits<double>::quiet_NaN());

PolarizabilityTensor polarizability_oscillator(const AtomModel& atom, const SurfaceModel& surface, double z,
                                               double omega, double v, const QuadratureConfig& quad);

/// Dressed static-atom polarizability at omega = i xi (real tensor).
Eigen::Matrix3d polarizability_imaginary_axis(const AtomModel& atom, const SurfaceModel& surface, double z, double xi);

/// Bare channel polarizability A omega_a^2 / (omega_a^2 - omega^2), A = 2 d^2 / (hbar omega_a).
ChannelPolarizability bare_channels(const AtomModel& atom, double omega);

/// Scalar polarizability of an isotropic atom, lowest order in the coupling:
/// alpha_bare(omega) + i c Tr int alpha_b G_I alpha_b, c = 1 (full trace) or 1/3.
cdouble alpha_scalar(const AtomModel& atom, const SurfaceModel& surface, double z, double omega, double v,
                     const QuadratureConfig& quad, TraceNorm norm = TraceNorm::FullTrace);

/// d alpha_I / d omega at omega = 0 of alpha_scalar, from the analytic slope of Delta_I.
double alpha_scalar_slope_at_zero(const AtomModel& atom, const SurfaceModel& surface, double z,
                                  TraceNorm norm = TraceNorm::FullTrace);

/// Slope at omega = 0 of Im of the dressed v = 0 tensor, sum_c Im a_c'(0) n_c n_c^T.
Eigen::Matrix3d dressed_alpha_slope_at_zero(const AtomModel& atom, const SurfaceModel& surface, double z);

/// Two-level decay rate gamma(omega; v) = (2/hbar) int sign(omega + kx v) d.G_I.d.
double tls_gamma(const AtomModel& atom, const SurfaceModel& surface, double z, double omega, double v,
                 const QuadratureConfig& quad);

/// Decay rate of one channel (n, d^2).
double tls_channel_gamma(const DipoleChannel& ch, const SurfaceModel& surface, double z, double omega, double v,
                         const QuadratureConfig& quad);

/// Dimensionless shift 2 P int_0^inf (dw'/pi) (w^2 / wa^2) gamma(w') / (w^2 - w'^2) for an
/// arbitrary rate profile gamma(w').
template <class Gamma>
auto shift_from_rate(Gamma&& gamma, double omega, double omega_a, const QuadratureConfig& quad) {
  using T = std::decay_t<decltype(gamma(omega))>;
  IntegralEstimate<T> out;
  const double w = std::abs(omega);
  if (w == 0.0) {
    out.value = zero_value<T>() * 0.0;
    out.converged = true;
    out.substitution = "omega=0";
    return out;
  }
  auto g = [&](double x) -> T { return gamma(x) * (-1.0 / (x + w)); };
  out = principal_value(g, w, 0.0, quad);
  const double pref = 2.0 * w * w / (Constants::pi * omega_a * omega_a);
  out.value = out.value * pref;
  out.error_bound *= pref;
  return out;
}

double tls_delta_shift(const AtomModel& atom, const SurfaceModel& surface, double z, double omega, double v,
                       const QuadratureConfig& quad);

ChannelPolarizability tls_channels(const AtomModel& atom, const SurfaceModel& surface, double z, double omega,
                                   double v, const QuadratureConfig& quad,
                                   double detuning = std::numeric_limits<double>::quiet_NaN());

PolarizabilityTensor tls_polarizability(const AtomModel& atom, const SurfaceModel& surface, double z, double omega,
                                        double v, const QuadratureConfig& quad);

/// Channels of the atom's polarizability for its kind (oscillator: dressed; two-level:
/// fourth-order form).
ChannelPolarizability atom_channels(const AtomModel& atom, const SurfaceModel& surface, double z, double omega,
                                   double v, const QuadratureConfig& quad,
                                   double detuning = std::numeric_limits<double>::quiet_NaN());

/// alpha(omega; v) - alpha(omega; 0) per channel. Formed from the velocity increment of the
/// self-energy (or rate and shift) integrals, so it stays accurate as v -> 0.
ChannelPolarizability atom_channels_increment(const AtomModel& atom, const SurfaceModel& surface, double z,
                                             double omega, double v, const QuadratureConfig& quad);

/// d_i d_j exp(-i (omega_a - i gamma_a / 2) tau).
Matrix3c qrt_correlation(const AtomModel& atom, double tau);

/// [alpha~(i xi) + alpha~(-i xi)] / 2 with alpha~ the QRT response.
Eigen::Matrix3d qrt_alpha_symmetrised(const AtomModel& atom, double xi);

/// Unit conversion for isotropic atoms: |d|^2 from alpha0.
double dipole_norm2_from_alpha0(double alpha0, double omega_a);

} // namespace qfric
