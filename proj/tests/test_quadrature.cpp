#include "doctest.h"

#include "qfric/quadrature.hpp"

#include <cmath>
#include <complex>

using namespace qfric;

namespace {
const double pi = std::numbers::pi;
}

TEST_CASE("semi-infinite oracles") {
  QuadratureConfig cfg;
  cfg.rel_tol = 1e-12;
  auto e1 = integrate_semi_infinite([](double x) { return std::exp(-x); }, 0.0, 1.0, Substitution::Exponential, cfg);
  CHECK(e1.converged);
  CHECK(std::abs(e1.value - 1.0) < 1e-12);
  CHECK(e1.substitution.find("exponential") != std::string::npos);

  const double z = 3e-9;
  auto e2 = integrate_semi_infinite([&](double k) { return std::pow(k, 6) * std::exp(-2.0 * k * z); }, 0.0, 1.0 / z,
                                    Substitution::Exponential, cfg);
  CHECK(e2.value == doctest::Approx(720.0 / (128.0 * std::pow(z, 7))).epsilon(1e-11));

  auto e3 = integrate_semi_infinite([](double w) { return w / ((w * w + 1) * (w * w + 1)); }, cfg);
  CHECK(e3.value == doctest::Approx(0.5).epsilon(1e-11));
  CHECK(e3.substitution.find("rational") != std::string::npos);
}

TEST_CASE("finite adaptive rule with breaks and complex values") {
  QuadratureConfig cfg;
  cfg.rel_tol = 1e-12;
  auto est = integrate_with_breaks([](double x) { return std::abs(x - 0.3); }, {0.0, 0.3, 1.0}, cfg);
  CHECK(est.value == doctest::Approx(0.5 * 0.09 + 0.5 * 0.49).epsilon(1e-13));
  auto c = integrate([](double x) { return std::exp(std::complex<double>(0.0, x)); }, 0.0, pi, cfg);
  CHECK(std::abs(c.value - std::complex<double>(0.0, 2.0)) < 1e-12);
}

TEST_CASE("tolerance is honoured and tighter tolerance never hurts") {
  auto f = [](double x) { return 1.0 / (1e-3 + x * x); };
  const double exact = std::atan(1.0 / std::sqrt(1e-3)) / std::sqrt(1e-3);
  double previous = 1.0;
  for (double tol : {1e-4, 5e-5, 1e-6, 5e-7, 1e-8, 5e-9, 1e-10}) {
    QuadratureConfig cfg;
    cfg.rel_tol = tol;
    auto est = integrate(f, 0.0, 1.0, cfg);
    CHECK(est.converged);
    CHECK(est.error_bound <= tol * std::abs(est.value));
    const double err = std::abs(est.value - exact) / exact;
    CHECK(err <= tol);
    CHECK(err <= previous * 1.0001 + 1e-15);
    previous = err;
  }
}

TEST_CASE("evaluation budget produces a non-converged estimate") {
  QuadratureConfig cfg;
  cfg.rel_tol = 1e-14;
  cfg.max_evaluations = 200;
  auto est = integrate([](double x) { return std::sqrt(std::abs(std::sin(40.0 * x))); }, 0.0, 10.0, cfg);
  CHECK_FALSE(est.converged);
  CHECK(est.error_bound > 0.0);
}

TEST_CASE("deterministic estimates") {
  QuadratureConfig cfg;
  auto f = [](double x) { return std::exp(-x) * std::cos(5.0 * x); };
  auto a = integrate_semi_infinite(f, cfg);
  auto b = integrate_semi_infinite(f, cfg);
  CHECK(a.value == b.value);
  CHECK(a.evaluations == b.evaluations);
}

TEST_CASE("polar rule oracles") {
  QuadratureConfig cfg;
  cfg.rel_tol = 1e-10;
  const double z = 1e-8;
  auto e1 = integrate_polar_2d([&](double k, double) { return k * std::exp(-2.0 * k * z); }, 40.0 / z, cfg);
  CHECK(e1.value == doctest::Approx(1.0 / (8.0 * pi * z * z * z)).epsilon(1e-9));

  // Wallis: <cos^4> over the circle is 3/8.
  auto e2 = integrate_polar_2d([&](double k, double th) { return std::pow(std::cos(th), 4) * 4.0 * pi * pi / k; },
                               1.0, cfg);
  CHECK(e2.value / (2.0 * pi) == doctest::Approx(3.0 / 8.0).epsilon(1e-10));

  cfg.abs_tol = 1e-12;
  auto e3 = integrate_polar_2d([&](double k, double th) { return k * std::cos(th) * std::exp(-k); }, 40.0, cfg);
  CHECK(std::abs(e3.value) < 1e-12);
}

TEST_CASE("gauss-legendre integrates polynomials exactly") {
  const auto gl = gauss_legendre(12);
  double acc = 0.0;
  for (std::size_t i = 0; i < gl.x.size(); ++i) acc += gl.w[i] * std::pow(gl.x[i], 22);
  CHECK(acc == doctest::Approx(2.0 / 23.0).epsilon(1e-14));
}

TEST_CASE("principal value oracles") {
  QuadratureConfig cfg;
  cfg.rel_tol = 1e-11;
  // P int_0^inf dx / (x^2 - 1) = 0: g = 1 / (x + 1).
  auto a = principal_value([](double x) { return 1.0 / (x + 1.0); }, 1.0, 0.0, cfg);
  CHECK(std::abs(a.value) < 1e-10);

  // P int_0^2 dx / (x - 1) = 0 for a constant numerator on a symmetric interval; add a decaying far part.
  auto b = principal_value([](double x) { return x < 2.0 ? 1.0 : 0.0; }, 1.0, 0.0, cfg);
  CHECK(std::abs(b.value) < 1e-10);

  // P int_0^inf e^{-x} / (x - 1) dx = -e^{-1} Ei(1).
  auto c = principal_value([](double x) { return std::exp(-x); }, 1.0, 0.0, cfg);
  CHECK(c.value == doctest::Approx(-std::exp(-1.0) * std::expint(1.0)).epsilon(1e-9));

  CHECK_THROWS(principal_value([](double) { return 1.0; }, 0.0, 0.0, cfg));
}

TEST_CASE("fourier transform oracles") {
  QuadratureConfig cfg;
  cfg.rel_tol = 1e-10;
  const double inf = std::numeric_limits<double>::infinity();
  for (double tau : {0.1, 1.0, 10.0}) {
    auto est = fourier_transform([](double w) { return std::exp(-w); }, tau, 0.0, inf, cfg);
    const std::complex<double> exact = 1.0 / std::complex<double>(1.0, tau);
    CHECK(std::abs(est.value - exact) < 1e-9 * std::abs(exact));
  }
  // Ohmic toy: transform of w e^{-w} is 1/(1 + i tau)^2, tail slope -2.
  std::vector<double> taus, mags;
  for (double tau = 1e2; tau <= 1e4 * 1.0001; tau *= std::pow(10.0, 0.25)) {
    auto est = fourier_transform([](double w) { return w * std::exp(-w); }, tau, 0.0, inf, cfg);
    const std::complex<double> exact = 1.0 / std::pow(std::complex<double>(1.0, tau), 2);
    CHECK(std::abs(est.value - exact) < 1e-6 * std::abs(exact));
    taus.push_back(std::log(tau));
    mags.push_back(std::log(std::abs(est.value)));
  }
  const double slope = (mags.back() - mags.front()) / (taus.back() - taus.front());
  CHECK(slope == doctest::Approx(-2.0).epsilon(0.025));

  // Lorentzian on a finite window -> damped exponential.
  const double g = 0.2, w0 = 5.0;
  auto lor = [&](double w) { return (g / (2.0 * pi)) / ((w - w0) * (w - w0) + g * g / 4.0); };
  auto est = fourier_transform(lor, 3.0, w0 - 4000.0, w0 + 4000.0, cfg);
  const std::complex<double> exact = std::exp(std::complex<double>(-g / 2.0 * 3.0, -w0 * 3.0));
  CHECK(std::abs(est.value - exact) < 1e-3);
}

TEST_CASE("spherical bessel recurrences") {
  std::array<double, 24> j;
  for (double x : {1e-3, 0.5, 3.14159, 7.0, 23.0, 24.5, 100.0, 1e5}) {
    detail::spherical_bessel_all(x, j);
    for (int n : {0, 1, 5, 12, 23}) {
      if (x < 1e3) CHECK(j[n] == doctest::Approx(std::sph_bessel(n, x)).epsilon(1e-10).scale(1e-300));
    }
  }
  detail::spherical_bessel_all(1e5, j);
  CHECK(j[0] == doctest::Approx(std::sin(1e5) / 1e5).epsilon(1e-12));
}
