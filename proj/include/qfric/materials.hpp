#pragma once

// Planar half-space: permittivity models, quasi-static surface response and the
// near-field (evanescent, p-polarised) Green tensor at coincident points.

#include "qfric/constants.hpp"

#include <Eigen/Core>

#include <complex>
#include <string>
#include <variant>

namespace qfric {

using cdouble = std::complex<double>;
using Matrix3c = Eigen::Matrix3cd;

struct Ohmic {
  double resistivity; // Ohm m
};

struct Drude {
  double plasma_frequency; // rad/s
  double damping;          // rad/s
};

struct ConstantPermittivity {
  cdouble epsilon;
};

/// Dielectric half-space z <= 0.
struct SurfaceModel {
  std::variant<Ohmic, Drude, ConstantPermittivity> kind;

  static SurfaceModel ohmic(double rho) { return {Ohmic{rho}}; }
  static SurfaceModel drude(double wp, double gd) { return {Drude{wp, gd}}; }
  static SurfaceModel constant(cdouble eps) { return {ConstantPermittivity{eps}}; }
  static SurfaceModel vacuum() { return constant(1.0); }

  /// Throws DomainError when the parameters violate the model's invariants.
  void validate() const;
  bool is_vacuum() const;
  std::string describe() const;
};

cdouble permittivity(const SurfaceModel& model, cdouble omega);

/// Delta(omega) = (eps - 1) / (eps + 1).
cdouble surface_response(const SurfaceModel& model, cdouble omega);

/// n-th derivative of Delta with respect to real omega (n = 0, 1, 2), analytic for
/// every model. At omega = 0 the limit from the model's closed form is returned.
cdouble surface_response_derivative(const SurfaceModel& model, double omega, int n);

/// d Delta_I / d omega at omega = 0.
double surface_response_slope_at_zero(const SurfaceModel& model);

/// Angular factor T(k_hat) of the near-field tensor, so that
/// G = (k Delta / (2 eps0)) e^{-2 k z} T.
Matrix3c nearfield_angular_tensor(double cos_t, double sin_t);

/// Complex 3x3 near-field Green tensor sample G(k, z, z, omega), convention E = G d.
struct GreenTensorSample {
  Matrix3c value;
  double kx, ky, z, omega;
};

GreenTensorSample green_nearfield(double kx, double ky, double z, double omega, const SurfaceModel& model);

/// Anti-Hermitian part (G - G^dagger) / 2i. Its symmetric block is the entrywise imaginary part.
Matrix3c green_dissipative(const Matrix3c& g);

/// int_0^inf k^p e^{-2 k z} dk = p! / (2 z)^{p+1}.
double k_moment(int p, double z);

/// Angular weight n.T_sym(theta).n of a real unit vector n: (nx cos + ny sin)^2 + nz^2.
inline double dipole_angular_weight(const Eigen::Vector3d& n, double cos_t, double sin_t) {
  const double in_plane = n.x() * cos_t + n.y() * sin_t;
  return in_plane * in_plane + n.z() * n.z();
}

/// int d^2k/(2pi)^2 of the symmetric near-field tensor at v = 0, per unit Delta:
/// diag(1, 1, 2) / (32 pi eps0 z^3).
Eigen::Matrix3d nearfield_k_integrated(double z);

} // namespace qfric
