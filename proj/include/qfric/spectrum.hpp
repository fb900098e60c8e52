#pragma once

// Stationary dipole power spectrum of a moving atom, its equilibrium-like part and
// current, the low-velocity expansion tensors, and time-domain correlations.
//
//   S(w; v) = (hbar/pi) alpha(w; v) M(w; v) alpha^dagger(w; v),
//   M(w; v) = int d^2k/(2pi)^2 theta(w + kx v) G_I(k, w + kx v).

#include "qfric/response.hpp"

#include <Eigen/Core>

#include <vector>

namespace qfric {

struct SpectrumTensor {
  Eigen::Matrix3d value; // (C m)^2 s
  double omega, v, z;
};

struct CorrelationSample {
  Matrix3c value; // (C m)^2
  double tau, v;
  double error_bound = 0.0;
  bool converged = true;
};

struct FdtResidual {
  double fdt = 0.0;
  double identity = 0.0;
};

/// Frequency scale on which the surface response varies: 1/(2 eps0 rho), gamma_d (or wp),
/// or omega_a for a constant permittivity.
double surface_frequency_scale(const SurfaceModel& surface, double omega_a);

/// z times the surface frequency scale: the velocity on which the spectrum changes.
double velocity_scale(const AtomModel& atom, const SurfaceModel& surface, double z);

/// Diagonal of M(w; v).
Eigen::Vector3d doppler_dissipative_window(const SurfaceModel& surface, double z, double omega, double v,
                                           const QuadratureConfig& quad);

SpectrumTensor power_spectrum(const AtomModel& atom, const SurfaceModel& surface, double z, double omega, double v,
                              const QuadratureConfig& quad);

/// alpha_I = (alpha - alpha^dagger) / 2i of the atom's polarizability (real symmetric part).
Eigen::Matrix3d alpha_dissipative(const AtomModel& atom, const SurfaceModel& surface, double z, double omega,
                                  double v, const QuadratureConfig& quad);

/// J = int d^2k/(2pi)^2 [theta(w) - theta(w + kx v)] alpha G_I(k, w + kx v) alpha^dagger.
Eigen::Matrix3d current_J(const AtomModel& atom, const SurfaceModel& surface, double z, double omega, double v,
                          const QuadratureConfig& quad);

/// g(w) = int d^2k/(2pi)^2 kx^2 d^2/dw^2 G_I(k, w).
Eigen::Matrix3d g_tensor(const SurfaceModel& surface, double z, double omega, const QuadratureConfig& quad);

/// eta = alpha'' G_I alpha^dagger + alpha g alpha^dagger + alpha G_I alpha''^dagger at v = 0,
/// with velocity derivatives from Richardson-extrapolated central differences.
Eigen::Matrix3d eta_tensor(const AtomModel& atom, const SurfaceModel& surface, double z, double omega,
                           const QuadratureConfig& quad);

/// C(tau) = int dw e^{-i w tau} S(w; v) on each tau of the grid.
std::vector<CorrelationSample> correlation_from_spectrum(const AtomModel& atom, const SurfaceModel& surface, double z,
                                                         const std::vector<double>& taus, double v,
                                                         const QuadratureConfig& quad);

/// Lorentzian spectrum implied by the QRT correlator, dd (gamma_a / 2 pi) / ((w - w_a)^2 + gamma_a^2 / 4).
Eigen::Matrix3d qrt_spectrum(const AtomModel& atom, double omega);

/// Pointwise relative residuals, maximised over the grid, of
///   S = (hbar/pi) [theta(w) alpha_I - J]   (J = 0 at v = 0: the FDT)
///   alpha_I = int alpha G_I alpha^dagger   (oscillator atoms; identity stays 0 for QRT).
/// For a QRT atom the Lorentzian spectrum is compared with its own response function.
FdtResidual fdt_residual(const AtomModel& atom, const SurfaceModel& surface, double z,
                         const std::vector<double>& omegas, const QuadratureConfig& quad, double v = 0.0);

} // namespace qfric
