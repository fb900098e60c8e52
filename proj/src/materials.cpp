#include "qfric/materials.hpp"

#include "qfric/errors.hpp"

#include <cmath>
#include <sstream>

namespace qfric {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double eps0 = Constants::eps0;

// Drude: Delta = wp^2 / D(w) with D = wp^2 - 2 w^2 - 2 i gd w.
cdouble drude_denominator(const Drude& d, cdouble w) {
  const cdouble i(0.0, 1.0);
  return d.plasma_frequency * d.plasma_frequency - 2.0 * w * w - 2.0 * i * d.damping * w;
}

} // namespace

void SurfaceModel::validate() const {
  std::visit(overloaded{
                 [](const Ohmic& o) {
                   if (!(o.resistivity > 0.0)) throw DomainError("ohmic surface: resistivity must be > 0");
                 },
                 [](const Drude& d) {
                   if (!(d.plasma_frequency > 0.0)) throw DomainError("drude surface: plasma frequency must be > 0");
                   if (!(d.damping >= 0.0)) throw DomainError("drude surface: damping must be >= 0");
                 },
                 [](const ConstantPermittivity& c) {
                   if (c.epsilon.imag() < 0.0) throw DomainError("constant surface: Im eps must be >= 0");
                 },
             },
             kind);
}

bool SurfaceModel::is_vacuum() const {
  const auto* c = std::get_if<ConstantPermittivity>(&kind);
  return c != nullptr && c->epsilon == cdouble(1.0, 0.0);
}

std::string SurfaceModel::describe() const {
  std::ostringstream os;
  os.precision(17);
  std::visit(overloaded{
                 [&](const Ohmic& o) { os << "ohmic(rho=" << o.resistivity << ")"; },
                 [&](const Drude& d) { os << "drude(wp=" << d.plasma_frequency << ",gd=" << d.damping << ")"; },
                 [&](const ConstantPermittivity& c) {
                   os << "constant(eps=" << c.epsilon.real() << "+" << c.epsilon.imag() << "i)";
                 },
             },
             kind);
  return os.str();
}

cdouble permittivity(const SurfaceModel& model, cdouble omega) {
  const cdouble i(0.0, 1.0);
  return std::visit(overloaded{
                        [&](const Ohmic& o) -> cdouble {
                          if (omega == cdouble(0.0)) throw DomainError("ohmic permittivity: 1/omega pole at omega = 0");
                          return 1.0 + i / (eps0 * o.resistivity * omega);
                        },
                        [&](const Drude& d) -> cdouble {
                          const cdouble den = omega * (omega + i * d.damping);
                          if (den == cdouble(0.0)) throw DomainError("drude permittivity: pole at omega = 0");
                          return 1.0 - d.plasma_frequency * d.plasma_frequency / den;
                        },
                        [&](const ConstantPermittivity& c) -> cdouble {
                          // Crossing relation eps(-w*) = eps*(w) for a frequency-independent value.
                          if (omega.real() < 0.0) return std::conj(c.epsilon);
                          if (omega.real() == 0.0) return c.epsilon.real();
                          return c.epsilon;
                        },
                    },
                    model.kind);
}

namespace {

// Delta and its first two derivatives at complex omega, from the closed forms of each model.
cdouble response_derivative(const SurfaceModel& model, cdouble w, int n) {
  const cdouble i(0.0, 1.0);
  return std::visit(
      overloaded{
          [&](const Ohmic& o) -> cdouble {
            // eps = 1 + i/(eps0 rho w)  =>  Delta = 1 / (1 - i w tau), tau = 2 eps0 rho.
            const double tau = 2.0 * eps0 * o.resistivity;
            const cdouble den = 1.0 - i * w * tau;
            if (den == cdouble(0.0)) throw DomainError("ohmic surface response: eps = -1 pole");
            if (n == 0) return 1.0 / den;
            if (n == 1) return i * tau / (den * den);
            return -2.0 * tau * tau / (den * den * den);
          },
          [&](const Drude& d) -> cdouble {
            const double wp2 = d.plasma_frequency * d.plasma_frequency;
            const cdouble den = drude_denominator(d, w);
            if (std::abs(den) <= 1e-14 * wp2)
              throw DomainError("drude surface response: surface-mode pole (eps = -1) at omega = wp/sqrt(2)");
            const cdouble d1 = -4.0 * w - 2.0 * i * d.damping;
            if (n == 0) return wp2 / den;
            if (n == 1) return -wp2 * d1 / (den * den);
            return wp2 * (2.0 * d1 * d1 / (den * den * den) + 4.0 / (den * den));
          },
          [&](const ConstantPermittivity& c) -> cdouble {
            const cdouble e = permittivity(model, w);
            if (std::abs(e + 1.0) == 0.0) throw DomainError("constant surface response: eps = -1 pole");
            return n == 0 ? (e - 1.0) / (e + 1.0) : cdouble(0.0);
          },
      },
      model.kind);
}

} // namespace

cdouble surface_response(const SurfaceModel& model, cdouble omega) { return response_derivative(model, omega, 0); }

cdouble surface_response_derivative(const SurfaceModel& model, double omega, int n) {
  if (n < 0 || n > 2) throw std::invalid_argument("surface_response_derivative: order must be 0, 1 or 2");
  return response_derivative(model, omega, n);
}

double surface_response_slope_at_zero(const SurfaceModel& model) {
  return response_derivative(model, 0.0, 1).imag();
}

Matrix3c nearfield_angular_tensor(double c, double s) {
  const cdouble i(0.0, 1.0);
  Matrix3c t;
  t << c * c, c * s, -i * c,
       c * s, s * s, -i * s,
       i * c, i * s, 1.0;
  return t;
}

GreenTensorSample green_nearfield(double kx, double ky, double z, double omega, const SurfaceModel& model) {
  if (!(z > 0.0)) throw DomainError("green_nearfield: height z must be > 0");
  GreenTensorSample out{Matrix3c::Zero(), kx, ky, z, omega};
  const double k = std::hypot(kx, ky);
  if (k == 0.0) return out;
  const cdouble delta = surface_response(model, omega);
  out.value = nearfield_angular_tensor(kx / k, ky / k) * (k * delta / (2.0 * eps0) * std::exp(-2.0 * k * z));
  return out;
}

Matrix3c green_dissipative(const Matrix3c& g) {
  return (g - g.adjoint()) / cdouble(0.0, 2.0);
}

double k_moment(int p, double z) {
  if (!(z > 0.0)) throw DomainError("k_moment: z must be > 0");
  if (p < 0) throw std::invalid_argument("k_moment: p must be >= 0");
  return std::tgamma(p + 1.0) / std::pow(2.0 * z, p + 1);
}

Eigen::Matrix3d nearfield_k_integrated(double z) {
  // (1/(4 pi^2)) * (1/(2 eps0)) * k_moment(2, z) * int T_sym dtheta, int T_sym = pi diag(1, 1, 2).
  const double scale = k_moment(2, z) / (2.0 * eps0) / (4.0 * Constants::pi);
  return Eigen::Vector3d(1.0, 1.0, 2.0).asDiagonal() * scale;
}

} // namespace qfric
