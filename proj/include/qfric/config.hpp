#pragma once

// Run configuration: YAML in, YAML out. Every dimensional key carries its SI unit as a suffix
// (z_m, v_m_s, omega_a_rad_s, ...); a key with the right stem but another suffix is rejected
// with a hint, as is any key the schema does not know.
//
//   atom:       kind (oscillator | two-level | qrt), alpha0_C_m2_per_V or dipole_C_m [x, y, z],
//               omega_a_rad_s, gamma_a_rad_s (qrt)
//   surface:    kind (ohmic | drude | constant | vacuum), rho_ohm_m, omega_p_rad_s, gamma_d_rad_s,
//               epsilon_re, epsilon_im
//   geometry:   z_m (scalar or list)
//   motion:     v_m_s (scalar or list)
//   quadrature: rel_tol, abs_tol, max_evaluations, kmax_policy (auto | fixed), kmax_fixed_per_m,
//               omega_max_rad_s, oscillatory_rule (filon | adaptive), closed_forms
//   friction:   method (auto | full | lowv | closed-form | qrt)
//   sweep:      methods (list of the above, auto excluded)
//   spectrum:   omega_rad_s
//   correlation: tau_s
//   compare_qrt: gamma_a_rad_s
//   oracle:     mode (moving | static), modes_count, initial_state (dressed | factorized),
//               t_s (optional grid: tau for static, time for moving)
//   output:     path, format (csv | jsonl)
//   task:       optional; must match the subcommand when present

#include "qfric/bath_oracle.hpp"
#include "qfric/quadrature.hpp"
#include "qfric/response.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qfric {

enum class Task { Cp, Friction, Spectrum, Correlation, CompareQrt, Oracle, Sweep };
enum class FrictionMethod { Auto, Full, LowVelocity, ClosedForm, Qrt };
enum class OracleMode { Moving, Static };
enum class OutputFormat { Csv, Jsonl };

std::string to_string(Task t);
std::string to_string(FrictionMethod m);
Task parse_task(const std::string& s);

struct RunConfig {
  std::optional<Task> task;
  AtomModel atom;
  SurfaceModel surface = SurfaceModel::vacuum();
  std::vector<double> z;        // m
  std::vector<double> v = {0.0}; // m/s
  QuadratureConfig quad;

  FrictionMethod friction_method = FrictionMethod::Auto;
  std::vector<FrictionMethod> sweep_methods = {FrictionMethod::Full, FrictionMethod::LowVelocity};
  std::vector<double> omegas; // rad/s
  std::vector<double> taus;   // s
  std::vector<double> gammas; // rad/s

  OracleMode oracle_mode = OracleMode::Moving;
  std::vector<std::size_t> oracle_modes = {128, 256, 512};
  InitialState oracle_initial = InitialState::DressedStatic;
  std::vector<double> oracle_times; // s, empty selects the automatic grid

  std::string out_path; // empty: stdout
  OutputFormat format = OutputFormat::Csv;

  bool has_atom() const;
  /// Semantic checks for running `task`. Throws ConfigError.
  void validate(Task task) const;
};

bool operator==(const RunConfig& a, const RunConfig& b);

/// Parses YAML text; `origin` names the source in diagnostics. Throws ConfigError.
RunConfig parse_config(const std::string& text, const std::string& origin = "config");
RunConfig load_config(const std::string& path);

/// Canonical YAML with every field spelled out; parse_config(serialize_config(c)) == c.
std::string serialize_config(const RunConfig& config);

/// 16 hex digits over the canonical form of everything that can change a number
/// (output destination and format excluded).
std::string config_hash(const RunConfig& config);

std::vector<std::string> preset_names();
/// Throws ConfigError for an unknown name.
RunConfig preset(const std::string& name);

std::string library_version();

} // namespace qfric
