#include "doctest.h"

#include "qfric/errors.hpp"
#include "qfric/response.hpp"

#include <cmath>
#include <random>

using namespace qfric;

namespace {

const double pi = Constants::pi;
const double eps0 = Constants::eps0;
const double hbar = Constants::hbar;

const double alpha0 = 5.26e-39, omega_a = 2.4e15, rho = 640.0, z = 1e-8;

AtomModel iso() { return AtomModel::isotropic(AtomKind::Oscillator, alpha0, omega_a); }

AtomModel tilted(AtomKind kind = AtomKind::Oscillator) {
  const double d = std::sqrt(1.5 * hbar * omega_a * alpha0);
  return AtomModel::with_dipole(kind, Eigen::Vector3d(0.6, 0.0, 0.8) * d, omega_a);
}

QuadratureConfig numeric_only(double tol = 1e-10) {
  QuadratureConfig cfg;
  cfg.rel_tol = tol;
  cfg.closed_forms = false;
  return cfg;
}

} // namespace

TEST_CASE("atom model invariants") {
  CHECK_NOTHROW(iso().validate());
  AtomModel bad = iso();
  bad.dipole = Eigen::Vector3d::UnitX();
  CHECK_THROWS_AS(bad.validate(), DomainError);
  CHECK_THROWS_AS(AtomModel::isotropic(AtomKind::Oscillator, alpha0, 0.0).validate(), DomainError);
  CHECK(iso().dipole_norm2() == doctest::Approx(dipole_norm2_from_alpha0(alpha0, omega_a)));
  CHECK(tilted().static_polarizability() == doctest::Approx(alpha0));
}

TEST_CASE("self-energy: vacuum, closed form and parity") {
  const SurfaceModel m = SurfaceModel::ohmic(rho);
  QuadratureConfig cfg;
  CHECK(std::abs(self_energy(tilted(), SurfaceModel::vacuum(), z, 1e12, 300.0, cfg).value) == 0.0);

  const AtomModel a = tilted();
  const Eigen::Vector3d d = *a.dipole;
  for (double w : {0.0, 1e10, 3e13}) {
    const cdouble closed = 2.0 * omega_a / hbar * surface_response(m, w) *
                           (d.x() * d.x() + d.y() * d.y() + 2.0 * d.z() * d.z()) / (32.0 * pi * eps0 * z * z * z);
    CHECK(std::abs(self_energy(a, m, z, w, 0.0, cfg).value - closed) <= 1e-13 * std::abs(closed));
    const cdouble num = self_energy(a, m, z, w, 1e-300, numeric_only()).value;
    CHECK(std::abs(num - closed) <= 1e-8 * std::abs(closed));
  }
  for (double w : {-3e10, 2e11}) {
    const cdouble p = self_energy(a, m, z, w, 400.0, cfg).value, n = self_energy(a, m, z, w, -400.0, cfg).value;
    CHECK(std::abs(p - n) <= 1e-7 * std::abs(p));
  }
  // Damping sign at v = 0 and omega > 0.
  CHECK(self_energy(a, m, z, 1e11, 0.0, cfg).value.imag() > 0.0);
}

TEST_CASE("dressed polarizability") {
  const SurfaceModel m = SurfaceModel::ohmic(rho);
  QuadratureConfig cfg;
  const Matrix3c a0 = polarizability_oscillator(iso(), SurfaceModel::vacuum(), z, 0.0, 0.0, cfg).value;
  CHECK((a0 - Matrix3c::Identity() * alpha0).norm() <= 1e-14 * alpha0);

  // Crossing on random samples, including v != 0.
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> uw(1e9, 1e13), uv(-500.0, 500.0);
  for (int i = 0; i < 6; ++i) {
    const double w = uw(rng), v = uv(rng);
    const Matrix3c p = polarizability_oscillator(tilted(), m, z, w, v, cfg).value;
    const Matrix3c n = polarizability_oscillator(tilted(), m, z, -w, v, cfg).value;
    CHECK((n - p.conjugate()).norm() <= 1e-7 * p.norm());
    const Matrix3c q = polarizability_oscillator(tilted(), m, z, w, -v, cfg).value;
    CHECK((q - p).norm() <= 1e-7 * p.norm());
  }

  // Low-frequency linearity of Im alpha, slope against the analytic value.
  const Eigen::Matrix3d slope = dressed_alpha_slope_at_zero(iso(), m, z);
  const double h = 3e4;
  const Matrix3c ap = polarizability_oscillator(iso(), m, z, h, 0.0, cfg).value;
  const Matrix3c am = polarizability_oscillator(iso(), m, z, -h, 0.0, cfg).value;
  const Eigen::Matrix3d fd = (ap - am).imag() / (2.0 * h);
  CHECK((fd - slope).norm() <= 1e-6 * slope.norm());
  // Second order in the coupling: alpha0^2 * 2 eps0 rho * weight / (32 pi eps0 z^3).
  CHECK(slope(0, 0) == doctest::Approx(alpha0 * alpha0 * 2.0 * eps0 * rho / (32.0 * pi * eps0 * z * z * z))
                           .epsilon(1e-3));
  CHECK(slope(2, 2) == doctest::Approx(2.0 * slope(0, 0)).epsilon(1e-3));

  CHECK_THROWS_AS(polarizability_oscillator(iso(), SurfaceModel::vacuum(), z, omega_a, 0.0, cfg), DomainError);
}

TEST_CASE("weak-coupling convergence is quadratic in the dipole scale") {
  const SurfaceModel m = SurfaceModel::constant({4.0, 2.0});
  QuadratureConfig cfg;
  const double w = 0.3 * omega_a;
  double prev = 0.0;
  for (double s : {1.0, 0.5, 0.25}) {
    AtomModel a = tilted();
    *a.dipole *= s;
    const Matrix3c dressed = polarizability_oscillator(a, m, z, w, 0.0, cfg).value;
    const Matrix3c bare = bare_channels(a, w).tensor();
    const double rel = (dressed - bare).norm() / bare.norm();
    if (prev > 0.0) CHECK(prev / rel == doctest::Approx(4.0).epsilon(1e-3));
    prev = rel;
  }
}

TEST_CASE("scalar polarizability") {
  const SurfaceModel m = SurfaceModel::ohmic(rho);
  const double expected = alpha0 * alpha0 * rho / (4.0 * pi * z * z * z);
  CHECK(alpha_scalar_slope_at_zero(iso(), m, z) == doctest::Approx(expected).epsilon(1e-13));
  CHECK(alpha_scalar_slope_at_zero(iso(), m, z, TraceNorm::ThirdTrace) == doctest::Approx(expected / 3.0));

  const double h = 1e5;
  const double fd = (alpha_scalar(iso(), m, z, h, 1e-300, numeric_only()).imag() -
                     alpha_scalar(iso(), m, z, -h, 1e-300, numeric_only()).imag()) /
                    (2.0 * h);
  CHECK(fd == doctest::Approx(expected).epsilon(1e-7));

  CHECK(alpha_scalar(iso(), SurfaceModel::vacuum(), z, 1e12, 0.0, QuadratureConfig{}).imag() == 0.0);
  CHECK(alpha_scalar(iso(), m, z, 0.0, 0.0, QuadratureConfig{}).real() == doctest::Approx(alpha0));
}

TEST_CASE("imaginary-axis polarizability") {
  const SurfaceModel m = SurfaceModel::ohmic(rho);
  const Eigen::Matrix3d a = polarizability_imaginary_axis(iso(), SurfaceModel::vacuum(), z, omega_a);
  CHECK(a(0, 0) == doctest::Approx(alpha0 / 2.0));
  const Eigen::Matrix3d b = polarizability_imaginary_axis(iso(), m, z, 1e10);
  CHECK(b(2, 2) > b(0, 0));
  CHECK(b(0, 1) == 0.0);
}

TEST_CASE("two-level rate") {
  const SurfaceModel m = SurfaceModel::ohmic(rho);
  const AtomModel a = tilted(AtomKind::TwoLevel);
  const Eigen::Vector3d d = *a.dipole;
  QuadratureConfig cfg;
  CHECK(tls_gamma(a, SurfaceModel::vacuum(), z, 1e12, 300.0, cfg) == 0.0);
  for (double w : {1e9, 1e12}) {
    const double closed = 2.0 / hbar * surface_response(m, w).imag() *
                          (d.x() * d.x() + d.y() * d.y() + 2.0 * d.z() * d.z()) / (32.0 * pi * eps0 * z * z * z);
    CHECK(tls_gamma(a, m, z, w, 0.0, cfg) == doctest::Approx(closed).epsilon(1e-13));
    CHECK(tls_gamma(a, m, z, w, 1e-300, numeric_only()) == doctest::Approx(closed).epsilon(1e-8));
  }
  for (double w : {3e9, 4e10}) {
    CHECK(tls_gamma(a, m, z, w, 250.0, cfg) == doctest::Approx(tls_gamma(a, m, z, -w, 250.0, cfg)).epsilon(1e-7));
    CHECK(tls_gamma(a, m, z, w, 250.0, cfg) == doctest::Approx(tls_gamma(a, m, z, w, -250.0, cfg)).epsilon(1e-7));
  }
}

TEST_CASE("frequency shift from a rate profile") {
  QuadratureConfig cfg;
  cfg.rel_tol = 1e-10;
  CHECK(shift_from_rate([](double) { return 0.0; }, 1e12, omega_a, cfg).value == 0.0);

  // gamma = c w e^{-w / W}: P int = -(c/2) [-e^{-b} Ei(b) + e^{b} E1(b)], b = w / W.
  const double c = 1e-3, W = 1e13;
  for (double w : {1e11, 1e13, 5e13}) {
    const double b = w / W;
    const double pv = -0.5 * c * (-std::exp(-b) * std::expint(b) + std::exp(b) * (-std::expint(-b)));
    const double expected = 2.0 * w * w / (pi * omega_a * omega_a) * pv;
    const auto est = shift_from_rate([&](double x) { return c * x * std::exp(-x / W); }, w, omega_a, cfg);
    CHECK(est.value == doctest::Approx(expected).epsilon(1e-8));
    const auto neg = shift_from_rate([&](double x) { return c * x * std::exp(-x / W); }, -w, omega_a, cfg);
    CHECK(neg.value == est.value);
  }
}

TEST_CASE("two-level shift and polarizability") {
  const SurfaceModel m = SurfaceModel::ohmic(rho);
  const AtomModel a = tilted(AtomKind::TwoLevel);
  QuadratureConfig cfg;
  cfg.rel_tol = 1e-7;
  const double w = 2e10;
  const double sp = tls_delta_shift(a, m, z, w, 300.0, cfg), sn = tls_delta_shift(a, m, z, w, -300.0, cfg);
  CHECK(sp == doctest::Approx(sn).epsilon(1e-5));

  // Free two-level response in vacuum.
  const Matrix3c free = tls_polarizability(a, SurfaceModel::vacuum(), z, w, 0.0, cfg).value;
  const Eigen::Matrix3d dd = a.dd();
  CHECK((free - (2.0 * omega_a / hbar * dd / (omega_a * omega_a - w * w)).cast<cdouble>()).norm() <=
        1e-14 * free.norm());

  const Matrix3c p = tls_polarizability(a, m, z, w, 300.0, cfg).value;
  const Matrix3c n = tls_polarizability(a, m, z, -w, 300.0, cfg).value;
  CHECK((n - p.conjugate()).norm() <= 1e-6 * p.norm());

  // Weak-coupling agreement with the oscillator near omega = 0.
  const Matrix3c osc = polarizability_oscillator(tilted(), m, z, 1e9, 0.0, cfg).value;
  const Matrix3c tls = tls_polarizability(a, m, z, 1e9, 0.0, cfg).value;
  CHECK((osc - tls).norm() <= 1e-3 * osc.norm());
}

TEST_CASE("QRT correlation") {
  AtomModel a = tilted(AtomKind::QRT);
  a.gamma_a = 1e-2 * omega_a;
  const double g = *a.gamma_a;
  CHECK((qrt_correlation(a, 0.0) - a.dd().cast<cdouble>()).norm() == 0.0);
  CHECK(std::abs(qrt_correlation(a, 2.0 / g).trace()) == doctest::Approx(a.dipole_norm2() * std::exp(-1.0)));

  // One-sided transform: int_0^inf e^{i w t} C(t) dt = dd i / (w - omega_a + i g / 2).
  QuadratureConfig cfg;
  cfg.rel_tol = 1e-10;
  const double inf = std::numeric_limits<double>::infinity();
  for (double w : {omega_a - g, omega_a, omega_a + 3.0 * g}) {
    auto est = fourier_transform([&](double t) { return qrt_correlation(a, t)(0, 0); }, -w, 0.0, inf, cfg, 1.0 / g);
    const cdouble exact = a.dd()(0, 0) * cdouble(0.0, 1.0) / cdouble(w - omega_a, g / 2.0);
    CHECK(std::abs(est.value - exact) <= 1e-6 * std::abs(exact));
    CHECK(est.value.real() ==
          doctest::Approx(a.dd()(0, 0) * (g / 2.0) / ((w - omega_a) * (w - omega_a) + g * g / 4.0)).epsilon(1e-6));
  }
}

TEST_CASE("QRT symmetrised polarizability reduces to the bare one at zero damping") {
  AtomModel a = AtomModel::isotropic(AtomKind::QRT, alpha0, omega_a);
  a.gamma_a = 0.0;
  for (double xi : {0.0, 1e14, 5e15}) {
    const double bare = alpha0 * omega_a * omega_a / (omega_a * omega_a + xi * xi);
    CHECK(qrt_alpha_symmetrised(a, xi)(1, 1) == doctest::Approx(bare).epsilon(1e-13));
  }
}

TEST_CASE("velocity increment of the polarizability") {
  const SurfaceModel m = SurfaceModel::ohmic(rho);
  QuadratureConfig cfg;
  cfg.rel_tol = 1e-11;
  for (AtomKind kind : {AtomKind::Oscillator, AtomKind::TwoLevel}) {
    const AtomModel a = tilted(kind);
    // Close to the surface and fast, so the difference of full values is well above rounding.
    const double zz = 1e-9, w = 2e9, v = 5.0;
    const auto full = atom_channels(a, m, zz, w, v, cfg);
    const auto stat = atom_channels(a, m, zz, w, 0.0, cfg);
    const auto inc = atom_channels_increment(a, m, zz, w, v, cfg);
    const cdouble diff = full.a[0] - stat.a[0];
    INFO(int(kind), " ", inc.a[0], " ", diff, " ", stat.a[0]);
    CHECK(std::abs(inc.a[0] - diff) <= 1e-4 * std::abs(diff));
    CHECK(atom_channels_increment(a, m, z, w, 0.0, cfg).a[0] == cdouble(0.0));
  }
}
