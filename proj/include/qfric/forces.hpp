#pragma once

// Casimir-Polder force on a static atom and the quantum frictional force on an atom in
// uniform motion parallel to the surface.

#include "qfric/response.hpp"
#include "qfric/spectrum.hpp"

#include <string>
#include <vector>

namespace qfric {

enum class ForceMethod { FullIntegral, LowVelocityAsymptotic, NearfieldClosedForm, QRT, CasimirPolder };

std::string to_string(ForceMethod m);

struct ForceResult {
  double value = 0.0;              // N
  double abs_error_estimate = 0.0; // N
  std::size_t n_evaluations = 0;
  ForceMethod method = ForceMethod::FullIntegral;
  double z = 0.0, v = 0.0;
  std::string note; // e.g. "parity: v=0", "higher-order in v required"
};

/// F = -(hbar/pi) int_0^inf dxi Tr[alpha(i xi) diag(1,1,2)] 3 Delta(i xi) / (64 pi eps0 z^4),
/// with the dressed static polarizability.
ForceResult casimir_polder_fdt(const AtomModel& atom, const SurfaceModel& surface, double z,
                               const QuadratureConfig& quad);

/// Same integral with alpha(i xi) replaced by the symmetrised QRT response.
ForceResult casimir_polder_qrt(const AtomModel& atom, const SurfaceModel& surface, double z,
                               const QuadratureConfig& quad);

/// Stationary friction from the full spectrum,
///   F = -2 int d^2k/(2pi)^2 kx int_0^inf dw Tr[S(kx v - w; v) G_I(k, w)],
/// evaluated as -2 int du Tr[S(u; v) K(u)] with K(u) = int kx theta(kx v - u) G_I(k, kx v - u).
ForceResult friction_full(const AtomModel& atom, const SurfaceModel& surface, double z, double v,
                          const QuadratureConfig& quad);

struct LowVelocityFriction {
  ForceResult line1; // 2-D k quadrature
  ForceResult line2; // moment closed form
  double relative_agreement = 0.0;
};

/// Cubic low-velocity friction, -(2 hbar v^3 / 3 (2pi)^3) int dky int_0^inf dkx kx^4 Tr[alpha_I'(0) G_I'(k, 0)],
/// from a 2-D quadrature (line 1) and from the k-moment closed form (line 2), which for an
/// isotropic atom reads -(45 hbar v^3 / (256 pi^2 eps0 z^7)) alpha_I'(0) Delta_I'(0).
LowVelocityFriction friction_lowv_lines(const AtomModel& atom, const SurfaceModel& surface, double z, double v,
                                        const QuadratureConfig& quad, TraceNorm norm = TraceNorm::FullTrace);

/// Line 2 of the above, with line 1 evaluated and its agreement recorded in the note.
ForceResult friction_lowv(const AtomModel& atom, const SurfaceModel& surface, double z, double v,
                          const QuadratureConfig& quad, TraceNorm norm = TraceNorm::FullTrace);

/// Slope tensor alpha_I'(0) entering the cubic law: the scalar convention for isotropic
/// atoms, alpha(0) G_I'(0) alpha(0) for dipole atoms.
Eigen::Matrix3d lowv_alpha_slope(const AtomModel& atom, const SurfaceModel& surface, double z,
                                 const QuadratureConfig& quad, TraceNorm norm = TraceNorm::FullTrace);

/// -(90 / pi^3) hbar rho^2 alpha0^2 v^3 / (2 z)^10.
ForceResult friction_nearfield_ohmic(double alpha0, double rho, double z, double v);

/// Linear-in-v friction from the QRT correlator (isotropic atom, drag sign):
///   F = -v (2 |d|^2 gamma_a / 3 pi) int d^2k/(2pi)^2 kx^2 int_0^inf dw (w + wa) / ((w + wa)^2 + gamma_a^2/4)^2 Tr G_I(k, w).
ForceResult friction_qrt(const AtomModel& atom, const SurfaceModel& surface, double z, double v,
                         const QuadratureConfig& quad);

/// Oscillator with the same orientation and frequency as `atom`, its coupling rescaled so
/// that the dressed static decay rate at omega_a, Im Sigma(omega_a) / omega_a averaged over
/// the channels with weights d_c^2, equals gamma.
AtomModel oscillator_with_width(const AtomModel& atom, const SurfaceModel& surface, double z, double gamma,
                                const QuadratureConfig& quad);

struct QrtComparison {
  double gamma_a;  // rad/s
  ForceResult fdt; // dressed oscillator whose width is gamma_a
  ForceResult qrt; // QRT atom with the same dipole and gamma_a
  double deviation; // |F_qrt / F_fdt - 1|
};

/// Casimir-Polder force from the exact (dressed) response and from the QRT response at matched
/// decay rate, for each gamma_a.
std::vector<QrtComparison> compare_qrt_cp(const AtomModel& atom, const SurfaceModel& surface, double z,
                                          const std::vector<double>& gammas, const QuadratureConfig& quad);

struct ExponentFit {
  double exponent = 0.0;
  double exponent_stderr = 0.0;
  double prefactor = 0.0;          // F ~ prefactor v^exponent
  double linear_coefficient = 0.0; // c1 of F = c1 v + c3 v^3 + c5 v^5
  double linear_stderr = 0.0;
  /// |c1| v_max / |F(v_max)|: the largest relative share of a linear term on the grid.
  double linear_share = 0.0;
};

/// Least-squares slope of log|F| against log v, and a polynomial fit bounding any linear term.
/// Needs >= 5 points spanning >= one decade.
ExponentFit friction_exponent_fit(const std::vector<double>& v, const std::vector<double>& f);
ExponentFit friction_exponent_fit(const std::vector<ForceResult>& results);

/// Two-level low-velocity integrals at fixed k (kx > 0):
///   I1 = int_0^{kx v} dw Tr[alpha~_I(kx v - w; 0) G_I(k, w)],
///   I2 = (v^2 / 2) int_0^{kx v} dw Tr[eta~(kx v - w; 0) G_I(k, w)].
struct TlsIntegrals {
  double i1 = 0.0, i2 = 0.0;
};
TlsIntegrals tls_lowv_integrals(const AtomModel& atom, const SurfaceModel& surface, double z, double kx, double ky,
                                double v, const QuadratureConfig& quad);

} // namespace qfric
