#include "doctest.h"

#include "qfric/config.hpp"
#include "qfric/errors.hpp"

#include <string>

using namespace qfric;

namespace {

const std::string base = R"(atom:
  kind: oscillator
  alpha0_C_m2_per_V: 5.26e-39
  omega_a_rad_s: 2.4e15
surface: {kind: ohmic, rho_ohm_m: 640}
geometry: {z_m: [1e-8, 2e-8]}
motion: {v_m_s: 340}
)";

std::string error_of(const std::string& text) {
  try {
    parse_config(text, "t.yaml");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

} // namespace

TEST_CASE("presets") {
  const auto rb = preset("rb-si-nearfield");
  REQUIRE(std::holds_alternative<Ohmic>(rb.surface.kind));
  CHECK(std::get<Ohmic>(rb.surface.kind).resistivity == 6.4e2);
  CHECK(*rb.atom.alpha0 == 5.26e-39);
  CHECK(rb.z == std::vector<double>{1e-8});
  CHECK(rb.v == std::vector<double>{340.0});

  const auto toy = preset("ohmic-toy");
  CHECK(parse_config(serialize_config(toy)) == toy);
  CHECK(serialize_config(parse_config(serialize_config(toy))) == serialize_config(toy));

  const auto drude = preset("drude-toy");
  REQUIRE(std::holds_alternative<Drude>(drude.surface.kind));
  CHECK(std::get<Drude>(drude.surface.kind).damping > 0.0);
  for (const auto& name : preset_names()) CHECK(parse_config(serialize_config(preset(name))) == preset(name));

  CHECK_THROWS_AS(preset("rb-au"), ConfigError);
}

TEST_CASE("parsing a full config") {
  const auto c = parse_config(base + R"(task: friction
quadrature: {rel_tol: 1e-6, kmax_policy: fixed, kmax_fixed_per_m: 1e10, closed_forms: false}
friction: {method: lowv}
oracle: {mode: static, modes_count: [64, 128], initial_state: factorized}
output: {path: out.csv, format: jsonl}
)");
  CHECK(c.task == Task::Friction);
  CHECK(c.z.size() == 2);
  CHECK(c.v == std::vector<double>{340.0});
  CHECK(c.quad.rel_tol == 1e-6);
  CHECK(c.quad.kmax_policy == KmaxPolicy::Fixed);
  CHECK_FALSE(c.quad.closed_forms);
  CHECK(c.friction_method == FrictionMethod::LowVelocity);
  CHECK(c.oracle_mode == OracleMode::Static);
  CHECK(c.oracle_modes == std::vector<std::size_t>{64, 128});
  CHECK(c.oracle_initial == InitialState::FactorizedVacuum);
  CHECK(c.format == OutputFormat::Jsonl);
  CHECK(c.out_path == "out.csv");
  CHECK(parse_config(serialize_config(c)) == c);

  const auto d = parse_config(R"(atom: {kind: qrt, dipole_C_m: [1e-29, 0, 2e-29], omega_a_rad_s: 1e15, gamma_a_rad_s: 1e7}
surface: {kind: constant, epsilon_re: 4}
geometry: {z_m: 1e-8}
)");
  CHECK(d.atom.kind == AtomKind::QRT);
  CHECK(d.atom.dipole->z() == 2e-29);
  CHECK(*d.atom.gamma_a == 1e7);
  CHECK(parse_config(serialize_config(d)) == d);
}

TEST_CASE("config diagnostics") {
  CHECK(error_of(base + "colour: red\n").find("t.yaml:8:1: unknown key 'colour'") != std::string::npos);
  CHECK(error_of(base + "output: {fmt: csv}\n").find("unknown key 'fmt' in 'output'") != std::string::npos);

  const auto nm = error_of("geometry:\n  z_nm: 10\n");
  CHECK(nm.find("t.yaml:2:3") != std::string::npos);
  CHECK(nm.find("expected 'z_m'") != std::string::npos);
  CHECK(error_of("motion: {v: 3}\n").find("expected 'v_m_s'") != std::string::npos);
  CHECK(error_of("geometry: {z_m: 10 nm}\n").find("plain SI number") != std::string::npos);
  CHECK(error_of("geometry: {z_m: []}\n").find("non-empty") != std::string::npos);
  CHECK(error_of("atom: {alpha0_C_m2_per_V: 1e-39, dipole_C_m: [1, 0, 0], omega_a_rad_s: 1}\n")
            .find("exactly one") != std::string::npos);
  CHECK(error_of("surface: {kind: ohmic, omega_p_rad_s: 1}\n").find("does not apply") != std::string::npos);
  CHECK(error_of("surface: {kind: metal}\n").find("not one of") != std::string::npos);
  CHECK(error_of("friction: {method: fast}\n").find("not one of") != std::string::npos);
  CHECK(error_of("quadrature: {rel_tol: 0.5}\n").find("rel_tol") != std::string::npos);
  CHECK(error_of("atom: [1, 2]\n").find("must be a mapping") != std::string::npos);
  CHECK(error_of("a: [1, 2\n").find("t.yaml:") == 0);
}

TEST_CASE("task validation") {
  auto c = parse_config(base + "task: cp\n");
  CHECK_NOTHROW(c.validate(Task::Cp));
  CHECK_THROWS_AS(c.validate(Task::Friction), ConfigError);
  c.task.reset();
  CHECK_THROWS_AS(c.validate(Task::Spectrum), ConfigError);
  CHECK_THROWS_AS(c.validate(Task::CompareQrt), ConfigError);
  CHECK_THROWS_AS(RunConfig{}.validate(Task::Cp), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/qfric.yaml"), ConfigError);
}

TEST_CASE("config hash") {
  auto a = preset("rb-si-nearfield");
  const auto h = config_hash(a);
  CHECK(h.size() == 16);
  CHECK(config_hash(preset("rb-si-nearfield")) == h);
  a.out_path = "elsewhere.csv";
  a.format = OutputFormat::Jsonl;
  CHECK(config_hash(a) == h);
  a.quad.rel_tol = 1e-6;
  CHECK(config_hash(a) != h);
  CHECK(config_hash(preset("ohmic-toy")) != h);
}
