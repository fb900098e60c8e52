#pragma once

// Doppler-shifted k-space integrals of the near-field Green tensor.
//
// Every k-integral in the library has the form
//
//   int d^2k/(2pi)^2  kx^p  W(omega + kx v)  X(omega + kx v)  (k / 2 eps0) e^{-2 k z}  T_sym(k_hat)
//
// with a frequency window W (all, theta, sign) and a spectral factor X (Delta, Delta_I or
// Delta_I''). After symmetrising theta -> -theta the angular tensor is diagonal,
// diag(cos^2, sin^2, 1), so results are returned as the three diagonal entries.

#include "qfric/materials.hpp"
#include "qfric/quadrature.hpp"

#include <Eigen/Core>

namespace qfric {

enum class FrequencyWindow { All, Positive, Negative, Sign };
enum class SpectralFactor { Response, Dissipative, DissipativeSecondDerivative };

struct DopplerIntegral {
  double z;
  double omega;
  double v;
  int kx_power = 0;
  FrequencyWindow window = FrequencyWindow::All;
  SpectralFactor factor = SpectralFactor::Response;
  /// Integrate X W (omega + kx v) - X W (omega): the velocity increment, free of the
  /// cancellation that differencing two full integrals would suffer.
  bool subtract_static = false;
};

/// Step function with theta(0) = 1/2.
inline double step(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? 0.0 : 0.5); }
inline double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

/// Diagonal of the integrated tensor. At v = 0 the closed form is used unless
/// cfg disables closed forms.
IntegralEstimate<Eigen::Vector3cd> doppler_green_integral(const SurfaceModel& surface, const DopplerIntegral& spec,
                                                          const QuadratureConfig& cfg);

/// Closed-form v = 0 value of the same integral (window evaluated at omega).
Eigen::Vector3cd doppler_green_integral_static(const SurfaceModel& surface, const DopplerIntegral& spec);

} // namespace qfric
