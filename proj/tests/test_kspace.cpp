#include "doctest.h"

#include "qfric/kspace.hpp"

#include <cmath>

using namespace qfric;

namespace {

const double pi = Constants::pi;
const double eps0 = Constants::eps0;

QuadratureConfig numeric_only(double tol = 1e-10) {
  QuadratureConfig cfg;
  cfg.rel_tol = tol;
  cfg.closed_forms = false;
  return cfg;
}

} // namespace

TEST_CASE("static closed form matches the nested quadrature") {
  const double z = 1e-8, rho = 640.0;
  const SurfaceModel m = SurfaceModel::ohmic(rho);
  const double w = 1.0 / (2.0 * eps0 * rho);
  for (auto factor : {SpectralFactor::Response, SpectralFactor::Dissipative,
                      SpectralFactor::DissipativeSecondDerivative}) {
    for (int p : {0, 2}) {
      DopplerIntegral spec{z, 0.3 * w, 0.0, p, FrequencyWindow::All, factor};
      const auto closed = doppler_green_integral_static(m, spec);
      spec.v = 1e-300;
      const auto num = doppler_green_integral(m, spec, numeric_only());
      CHECK(num.converged);
      CHECK((num.value - closed).norm() <= 1e-8 * closed.norm());
    }
  }
}

TEST_CASE("static diagonal is diag(1,1,2) / (32 pi eps0 z^3) per unit Delta") {
  const double z = 5e-9;
  const SurfaceModel m = SurfaceModel::constant(3.0);
  DopplerIntegral spec{z, 1e12, 0.0};
  const auto d = doppler_green_integral(m, spec, QuadratureConfig{});
  const double base = 0.5 / (32.0 * pi * eps0 * z * z * z);
  CHECK(d.value(0).real() == doctest::Approx(base).epsilon(1e-13));
  CHECK(d.value(1).real() == doctest::Approx(base).epsilon(1e-13));
  CHECK(d.value(2).real() == doctest::Approx(2.0 * base).epsilon(1e-13));
}

TEST_CASE("vacuum integrals vanish") {
  DopplerIntegral spec{1e-8, 1e12, 300.0, 1, FrequencyWindow::Positive, SpectralFactor::Dissipative};
  CHECK(doppler_green_integral(SurfaceModel::vacuum(), spec, QuadratureConfig{}).value.norm() == 0.0);
}

TEST_CASE("parity in v") {
  const double z = 1e-8, rho = 640.0, v = 300.0;
  const SurfaceModel m = SurfaceModel::ohmic(rho);
  const double w0 = v / z;
  QuadratureConfig cfg;
  for (double w : {-2.0 * w0, -0.3 * w0, 0.0, 0.7 * w0, 3.0 * w0}) {
    // Even powers with the all-window are even in v.
    DopplerIntegral a{z, w, v, 0, FrequencyWindow::All, SpectralFactor::Response};
    DopplerIntegral b = a;
    b.v = -v;
    const auto pa = doppler_green_integral(m, a, cfg).value, pb = doppler_green_integral(m, b, cfg).value;
    CHECK((pa - pb).norm() <= 1e-7 * pa.norm());
    // kx-odd integrals flip sign with v.
    a.kx_power = b.kx_power = 1;
    a.window = b.window = FrequencyWindow::Positive;
    a.factor = b.factor = SpectralFactor::Dissipative;
    const auto qa = doppler_green_integral(m, a, cfg).value, qb = doppler_green_integral(m, b, cfg).value;
    CHECK((qa + qb).norm() <= 1e-7 * qa.norm() + 1e-300);
  }
}

TEST_CASE("sign window makes the rate even in omega") {
  const double z = 1e-8, v = 500.0;
  const SurfaceModel m = SurfaceModel::drude(1e16, 1e14);
  for (double w : {1e9, 2e10, 1e11}) {
    DopplerIntegral a{z, w, v, 0, FrequencyWindow::Sign, SpectralFactor::Dissipative};
    DopplerIntegral b = a;
    b.omega = -w;
    const auto pa = doppler_green_integral(m, a, QuadratureConfig{}).value;
    const auto pb = doppler_green_integral(m, b, QuadratureConfig{}).value;
    CHECK((pa - pb).norm() <= 1e-7 * pa.norm());
  }
}

TEST_CASE("positive window is empty beyond the Doppler band") {
  // omega < 0 with |omega| >> kmax v: theta(omega + kx v) = 0 for every k below the cutoff.
  const double z = 1e-8, v = 1.0;
  DopplerIntegral spec{z, -1e12, v, 0, FrequencyWindow::Positive, SpectralFactor::Dissipative};
  const auto d = doppler_green_integral(SurfaceModel::ohmic(640.0), spec, QuadratureConfig{});
  CHECK(d.converged);
  CHECK(d.value.norm() == 0.0);
}

TEST_CASE("velocity increment equals the difference of full integrals") {
  const double z = 1e-8, v = 200.0;
  const SurfaceModel m = SurfaceModel::ohmic(640.0);
  QuadratureConfig cfg;
  cfg.rel_tol = 1e-11;
  for (auto win : {FrequencyWindow::All, FrequencyWindow::Positive, FrequencyWindow::Sign}) {
    DopplerIntegral full{z, 1.5e10, v, 0, win, SpectralFactor::Dissipative};
    DopplerIntegral inc = full;
    inc.subtract_static = true;
    DopplerIntegral stat = full;
    stat.v = 0.0;
    const Eigen::Vector3cd diff = doppler_green_integral(m, full, cfg).value - doppler_green_integral(m, stat, cfg).value;
    const auto d = doppler_green_integral(m, inc, cfg).value;
    CHECK((d - diff).norm() <= 1e-6 * diff.norm());
  }
  DopplerIntegral zero{z, 1e10, 0.0, 0, FrequencyWindow::All, SpectralFactor::Response, true};
  CHECK(doppler_green_integral(m, zero, cfg).value.norm() == 0.0);
}

TEST_CASE("positive and negative windows partition the all-window integral") {
  const double z = 1e-8, v = 300.0;
  const SurfaceModel m = SurfaceModel::drude(1e16, 1e14);
  QuadratureConfig cfg;
  cfg.rel_tol = 1e-10;
  for (double w : {-1e10, 5e9, 4e10}) {
    DopplerIntegral all{z, w, v, 0, FrequencyWindow::All, SpectralFactor::Dissipative};
    DopplerIntegral pos = all, neg = all;
    pos.window = FrequencyWindow::Positive;
    neg.window = FrequencyWindow::Negative;
    const auto a = doppler_green_integral(m, all, cfg).value;
    const Eigen::Vector3cd s = doppler_green_integral(m, pos, cfg).value + doppler_green_integral(m, neg, cfg).value;
    CHECK((a - s).norm() <= 1e-8 * a.norm());
  }
}
