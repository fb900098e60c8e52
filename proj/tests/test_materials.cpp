#include "doctest.h"

#include "qfric/errors.hpp"
#include "qfric/materials.hpp"
#include "qfric/quadrature.hpp"

#include <cmath>
#include <random>

using namespace qfric;

namespace {

const double eps0 = Constants::eps0;
const double pi = Constants::pi;

std::vector<SurfaceModel> lossy_models() {
  return {SurfaceModel::ohmic(640.0), SurfaceModel::ohmic(1e-6), SurfaceModel::drude(1.4e16, 3e13),
          SurfaceModel::constant({3.0, 0.5})};
}

} // namespace

TEST_CASE("permittivity closed forms") {
  CHECK(permittivity(SurfaceModel::vacuum(), {1e12, 0.0}) == cdouble(1.0, 0.0));

  const cdouble e = permittivity(SurfaceModel::ohmic(640.0), 1e10);
  const double expected = 1.0 / (eps0 * 640.0 * 1e10);
  CHECK(e.real() == doctest::Approx(1.0));
  CHECK(e.imag() == doctest::Approx(expected).epsilon(1e-14));
  CHECK(e.imag() == doctest::Approx(1.7649e-2).epsilon(2e-4));

  const SurfaceModel drude = SurfaceModel::drude(1e16, 1e14);
  CHECK(std::abs(permittivity(drude, 1e22) - 1.0) < 1e-11);

  CHECK_THROWS_AS(permittivity(SurfaceModel::ohmic(1.0), 0.0), DomainError);
  CHECK_THROWS_AS(permittivity(drude, 0.0), DomainError);
}

TEST_CASE("permittivity on the imaginary axis is real and >= 1") {
  for (const auto& m : {SurfaceModel::ohmic(640.0), SurfaceModel::drude(1e16, 1e14)}) {
    for (double xi : {1e6, 1e10, 1e14, 1e18}) {
      const cdouble e = permittivity(m, cdouble(0.0, xi));
      CHECK(std::abs(e.imag()) < 1e-12 * std::abs(e));
      CHECK(e.real() >= 1.0);
    }
  }
}

TEST_CASE("surface response values") {
  CHECK(surface_response(SurfaceModel::constant(3.0), 1.0).real() == doctest::Approx(0.5));
  const cdouble near_conductor = surface_response(SurfaceModel::constant({0.0, 1e9}), 1.0);
  CHECK(std::abs(near_conductor - 1.0) < 1e-8);

  // Lossless Drude surface plasmon.
  const double wp = 1e16;
  CHECK_THROWS_AS(surface_response(SurfaceModel::drude(wp, 0.0), wp / std::sqrt(2.0)), DomainError);
}

TEST_CASE("ohmic slope at zero is 2 eps0 rho") {
  const double rho = 640.0;
  const SurfaceModel m = SurfaceModel::ohmic(rho);
  CHECK(surface_response_slope_at_zero(m) == doctest::Approx(2.0 * eps0 * rho).epsilon(1e-14));
  // Central finite difference on the response itself.
  const double h = 1e-3 / (2.0 * eps0 * rho);
  const double fd = (surface_response(m, h).imag() - surface_response(m, -h).imag()) / (2.0 * h);
  CHECK(fd == doctest::Approx(2.0 * eps0 * rho).epsilon(1e-5));

  const SurfaceModel d = SurfaceModel::drude(1e16, 1e14);
  CHECK(surface_response_slope_at_zero(d) == doctest::Approx(2.0 * 1e14 / 1e32).epsilon(1e-12));
}

TEST_CASE("derivatives match finite differences") {
  for (const auto& m : lossy_models()) {
    for (double w : {1e9, 3e12, 2e15}) {
      const double h = w * 1e-4;
      const cdouble f0 = surface_response(m, w), fp = surface_response(m, w + h), fm = surface_response(m, w - h);
      const cdouble d1 = (fp - fm) / (2.0 * h);
      const cdouble d2 = (fp - 2.0 * f0 + fm) / (h * h);
      const cdouble a1 = surface_response_derivative(m, w, 1);
      const cdouble a2 = surface_response_derivative(m, w, 2);
      CHECK(std::abs(d1 - a1) <= 1e-6 * (std::abs(a1) + std::abs(f0) / w));
      CHECK(std::abs(d2 - a2) <= 1e-3 * (std::abs(a2) + std::abs(f0) / (w * w)));
    }
  }
}

TEST_CASE("crossing relation and oddness of the dissipative part") {
  for (const auto& m : lossy_models()) {
    for (int e = 6; e <= 18; ++e) {
      const double w = std::pow(10.0, e) * 1.37;
      const cdouble p = surface_response(m, w), n = surface_response(m, -w);
      CHECK(std::abs(n - std::conj(p)) <= 1e-15 * std::abs(p));
    }
  }
  for (const auto& m : {SurfaceModel::ohmic(640.0), SurfaceModel::drude(1e16, 1e14)}) {
    CHECK(std::abs(surface_response(m, 1e-6).imag()) < 1e-9);
  }
}

TEST_CASE("green tensor trace, parity and vacuum") {
  const SurfaceModel m = SurfaceModel::ohmic(640.0);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-3e8, 3e8);
  const double z = 1e-8;
  for (int i = 0; i < 50; ++i) {
    const double kx = u(rng), ky = u(rng), w = std::abs(u(rng)) * 1e3;
    const Matrix3c g = green_nearfield(kx, ky, z, w, m).value;
    const double k = std::hypot(kx, ky);
    const cdouble tr = k * surface_response(m, w) / eps0 * std::exp(-2.0 * k * z);
    CHECK(std::abs(g.trace() - tr) <= 1e-12 * std::abs(tr));

    const Matrix3c gm = green_nearfield(-kx, ky, z, w, m).value;
    const Matrix3c sym = 0.5 * (g + g.transpose()), symm = 0.5 * (gm + gm.transpose());
    CHECK(std::abs(sym(0, 0) - symm(0, 0)) <= 1e-14 * std::abs(sym(0, 0)));
    CHECK(std::abs(sym(2, 2) - symm(2, 2)) <= 1e-14 * std::abs(sym(2, 2)));

    const Matrix3c gneg = green_nearfield(-kx, -ky, z, w, m).value;
    CHECK(std::abs(g(0, 2) + gneg(0, 2)) <= 1e-14 * std::abs(g(0, 2)));
    CHECK(std::abs(g(1, 2) + gneg(1, 2)) <= 1e-14 * std::abs(g(1, 2)) + 1e-300);
  }
  CHECK(green_nearfield(1e8, 2e8, z, 1e12, SurfaceModel::vacuum()).value.norm() == 0.0);
  CHECK(green_nearfield(0.0, 0.0, z, 1e12, m).value.norm() == 0.0);
  CHECK_THROWS_AS(green_nearfield(1e8, 0.0, 0.0, 1e12, m), DomainError);
}

TEST_CASE("dissipative trace to first order in omega") {
  const double rho = 640.0, z = 1e-8, k = 1e8, w = 1e3;
  const SurfaceModel m = SurfaceModel::ohmic(rho);
  const Matrix3c gi = green_dissipative(green_nearfield(k, 0.0, z, w, m).value);
  const double expected = k / eps0 * std::exp(-2.0 * k * z) * 2.0 * eps0 * rho * w;
  CHECK(gi.trace().real() == doctest::Approx(expected).epsilon(1e-9));
  // Symmetric block of the anti-Hermitian part is the entrywise imaginary part.
  const Matrix3c g = green_nearfield(k, 0.3 * k, z, w, m).value;
  CHECK(std::abs(green_dissipative(g)(0, 1) - g(0, 1).imag()) < 1e-12 * std::abs(g(0, 1)));
}

TEST_CASE("k_moment") {
  CHECK(k_moment(0, 0.5) == doctest::Approx(1.0));
  const double z = 1e-8;
  CHECK(k_moment(2, z) == doctest::Approx(1.0 / (4.0 * z * z * z)).epsilon(1e-14));
  CHECK(k_moment(6, z) == doctest::Approx(720.0 / (128.0 * std::pow(z, 7))).epsilon(1e-14));
  QuadratureConfig cfg;
  cfg.rel_tol = 1e-12;
  for (int p = 0; p <= 8; ++p) {
    auto est = integrate_semi_infinite([&](double k) { return std::pow(k, p) * std::exp(-2.0 * k * z); }, 0.0,
                                       1.0 / z, Substitution::Exponential, cfg);
    CHECK(est.value == doctest::Approx(k_moment(p, z)).epsilon(1e-10));
  }
  CHECK_THROWS_AS(k_moment(2, 0.0), DomainError);
}

TEST_CASE("kx^4 weighted half-plane moment") {
  // int over kx > 0 of kx^4 * k^... : (int cos^4 over half circle) * k_moment(6) = 135 pi / (64 z^7).
  const double z = 1e-8;
  const double closed = 3.0 * pi / 8.0 * k_moment(6, z);
  CHECK(closed == doctest::Approx(135.0 * pi / (64.0 * std::pow(z, 7))).epsilon(1e-14));

  QuadratureConfig cfg;
  cfg.rel_tol = 1e-10;
  auto est = integrate_2d(
      [&](double k, double th) { return std::pow(k * std::cos(th), 4) * k * k * std::exp(-2.0 * k * z); }, 0.0,
      40.0 / z, [](double) { return std::make_pair(-pi / 2, pi / 2); }, cfg);
  CHECK(est.value == doctest::Approx(closed).epsilon(1e-9));
}

TEST_CASE("k-integrated tensor") {
  const double z = 2e-8;
  const Eigen::Matrix3d m = nearfield_k_integrated(z);
  CHECK(m(0, 0) == doctest::Approx(1.0 / (32.0 * pi * eps0 * z * z * z)).epsilon(1e-14));
  CHECK(m(2, 2) == doctest::Approx(2.0 * m(0, 0)));
}
