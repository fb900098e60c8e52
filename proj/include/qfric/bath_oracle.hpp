#pragma once

// Brute-force check of the spectrum and friction results: a single-dipole oscillator coupled
// to a finite set of surface modes, treated as a closed quadratic system. Nothing here uses
// the fluctuation-dissipation relation; correlations come from exact normal modes.
//
// Units inside: quadratures are dimensionless (hbar = 1), frequencies in rad/s. A mode n is
// a bosonic field oscillator of frequency omega_n and in-plane wavevector component kx_n whose
// coupling g_n obeys  sum_n g_n^2 delta(w - w_n) = (2 w_a / hbar) d.G_I(w).d / pi  (k-integrated).

#include "qfric/response.hpp"

#include <complex>
#include <string>
#include <vector>

namespace qfric {

struct BathMode {
  double omega; // rad/s
  double kx;    // 1/m, 0 for k-integrated (static or dressing) modes
  double g;     // rad/s, >= 0
};

struct BathConfig {
  /// 0 builds k-integrated modes for the atom at rest. A positive value builds Doppler-window
  /// modes around that velocity plus k-integrated dressing modes.
  double design_velocity = 0.0; // m/s

  // Static layout: uniform nodes on (0, uniform_span * max(w_a, surface scale)] then
  // geometric nodes up to graded_span times further.
  double uniform_span = 3.5;
  double uniform_fraction = 0.875;
  double graded_span = 75.0;

  // Moving layout.
  int kx_nodes_per_sign = 4;
  double kx_max = 8.0;           // in units of 1/z
  double doppler_margin = 6.0;   // band of kx node: omega < (|kx| + margin / z) v
  double handover_start = 0.6;   // smooth hand-over to dressing modes, fraction of the band
  double dressing_fraction = 0.125;
  double dressing_low = 1e-4;    // dressing grid, relative to max(w_a, surface scale)
  double dressing_high = 100.0;

  double reconstruction_tolerance = 0.05; // relative L2, spectral density
};

struct DiscreteBath {
  std::vector<BathMode> modes;
  /// Adiabatic shift of the oscillator frequency from the continuum above the grid (rad/s).
  double tail_shift = 0.0;
  double omega_top = 0.0; // upper end of the discretised band
  double z = 0.0;
  double design_velocity = 0.0;
  AtomModel atom;
  SurfaceModel surface = SurfaceModel::vacuum();
  Eigen::Vector3d axis = Eigen::Vector3d::UnitX();
  double dipole = 0.0; // C m
  // Moving layout bookkeeping.
  int low_modes_per_kx = 0;
  double band_max = 0.0; // widest Doppler band (rad/s)
  /// Relative L2 error of the spectral density smoothed over each node's cell, and of its integral.
  double reconstruction_error = 0.0;
  double weight_error = 0.0;
  bool reconstruction_ok = true;
  /// 2 pi over the coarsest spacing that matters for the run: uniform band (static) or
  /// widest Doppler band (moving).
  double revival_time = 0.0;

  std::size_t size() const { return modes.size(); }
  bool moving_layout() const { return design_velocity > 0.0; }
};

/// Target spectral density (2 w_a / hbar) d.G_I(w).d / pi, k-integrated, in rad/s.
double bath_spectral_density(const AtomModel& atom, const SurfaceModel& surface, double z, double omega);

/// Requires an oscillator atom with a dipole vector and N >= 2.
DiscreteBath build_bath(const AtomModel& atom, const SurfaceModel& surface, double z, std::size_t n_modes,
                        const BathConfig& config = {}, const QuadratureConfig& quad = {});

struct StaticOracleResult {
  std::vector<double> tau;
  std::vector<std::complex<double>> correlation; // <d(tau) d(0)>, (C m)^2
  /// Normal modes of the coupled system and their weights in the dipole correlation,
  /// C(tau) = sum_k w_k e^{-i W_k tau}.
  std::vector<double> mode_frequency, mode_weight;
  double revival_time = 0.0;
  double min_uncertainty_eigenvalue = 0.0; // of sigma + i J / 2, should be >= 0
  bool converged = true;
  std::string note;
};

/// Stationary dipole correlation of the coupled ground state (v = 0).
StaticOracleResult evolve_static(const DiscreteBath& bath, const std::vector<double>& tau);

/// Kernel-smoothed spectrum estimate from the normal-mode weights, (C m)^2 s.
double oracle_spectrum(const StaticOracleResult& result, double omega, double width);

enum class InitialState { DressedStatic, FactorizedVacuum };

struct MovingOracleConfig {
  InitialState initial = InitialState::DressedStatic;
  double transient = 6.0;  // plateau starts after this many z / v
  double revival_fraction = 0.5;
  double samples_per_period = 50.0;
  int min_plateau_samples = 20;
  /// Largest tolerated e-folding count over the window. Exactly opposite Doppler-shifted
  /// frequencies make weak parametric pairs; their growth is the discrete form of the drag.
  double max_growth = 0.5;
};

struct MovingOracleResult {
  std::vector<double> t, force; // s, N
  double v = 0.0;
  double plateau = 0.0;        // N
  double plateau_spread = 0.0; // standard deviation over the window, N
  double plateau_drift = 0.0;  // change of the linear fit across the window, N
  double window_start = 0.0, window_end = 0.0;
  double max_growth_rate = 0.0; // largest |Re lambda| of the propagator, 1/s
  double min_covariance_eigenvalue = 0.0;
  double energy_drift = 0.0;   // relative, only meaningful at v = 0
  bool converged = true;
  std::string note;
};

/// Atom moving at v (the bath must have the moving layout). Couplings carry the phases
/// exp(i kx v t); in the frame co-moving with these phases the generator is constant and
/// the covariance is propagated exactly through its eigen-decomposition. An empty t grid
/// selects a uniform grid to the revival window.
MovingOracleResult evolve_moving(const DiscreteBath& bath, double v, const std::vector<double>& t_grid = {},
                                 const MovingOracleConfig& config = {});

} // namespace qfric
