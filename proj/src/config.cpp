#include "qfric/config.hpp"

#include "qfric/errors.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <variant>

namespace qfric {

namespace {

const std::map<Task, std::string> task_names = {
    {Task::Cp, "cp"},         {Task::Friction, "friction"},       {Task::Spectrum, "spectrum"},
    {Task::Correlation, "correlation"}, {Task::CompareQrt, "compare-qrt"}, {Task::Oracle, "oracle"},
    {Task::Sweep, "sweep"}};

const std::map<FrictionMethod, std::string> method_names = {{FrictionMethod::Auto, "auto"},
                                                            {FrictionMethod::Full, "full"},
                                                            {FrictionMethod::LowVelocity, "lowv"},
                                                            {FrictionMethod::ClosedForm, "closed-form"},
                                                            {FrictionMethod::Qrt, "qrt"}};

const std::map<AtomKind, std::string> kind_names = {
    {AtomKind::Oscillator, "oscillator"}, {AtomKind::TwoLevel, "two-level"}, {AtomKind::QRT, "qrt"}};

template <class E>
std::optional<E> lookup(const std::map<E, std::string>& names, const std::string& s) {
  for (const auto& [e, n] : names)
    if (n == s) return e;
  return std::nullopt;
}

template <class E>
std::string choices(const std::map<E, std::string>& names) {
  std::string out;
  for (const auto& [e, n] : names) out += (out.empty() ? "" : " | ") + n;
  return out;
}

// Longest first, so that "_m_s" wins over "_s".
const std::vector<std::string> unit_suffixes = {"_C_m2_per_V", "_ohm_m", "_rad_s", "_per_m", "_count",
                                                "_C_m",        "_m_s",   "_m",     "_s"};

std::string stem_of(const std::string& key) {
  for (const auto& s : unit_suffixes)
    if (key.size() > s.size() && key.compare(key.size() - s.size(), s.size(), s) == 0)
      return key.substr(0, key.size() - s.size());
  return key;
}

class Reader {
public:
  explicit Reader(std::string origin) : origin_(std::move(origin)) {}

  [[noreturn]] void fail(const YAML::Node& n, const std::string& msg) const {
    const auto m = n.Mark();
    std::ostringstream os;
    os << origin_;
    if (!m.is_null()) os << ':' << m.line + 1 << ':' << m.column + 1;
    os << ": " << msg;
    throw ConfigError(os.str());
  }

  void check_map(const YAML::Node& n, const std::string& where) const {
    if (!n.IsMap()) fail(n, "'" + where + "' must be a mapping");
  }

  /// Rejects unknown keys; a known stem with a foreign unit suffix gets a targeted hint.
  void check_keys(const YAML::Node& n, const std::string& where, const std::vector<std::string>& allowed) const {
    check_map(n, where);
    for (const auto& kv : n) {
      const std::string key = kv.first.as<std::string>();
      if (std::find(allowed.begin(), allowed.end(), key) != allowed.end()) continue;
      for (const auto& a : allowed) {
        const std::string stem = stem_of(a);
        if (stem == a) continue;
        if (key == stem || key.rfind(stem + "_", 0) == 0)
          fail(kv.first, "key '" + key + "' in '" + where + "': wrong or missing unit suffix, expected '" + a +
                             "' (SI units only)");
      }
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      fail(kv.first, "unknown key '" + key + "' in '" + where + "' (allowed: " + list + ")");
    }
  }

  double number(const YAML::Node& n, const std::string& what) const {
    if (!n.IsScalar()) fail(n, what + ": expected a number");
    double x = 0.0;
    try {
      x = n.as<double>();
    } catch (const YAML::Exception&) {
      fail(n, what + ": expected a plain SI number, got '" + n.Scalar() + "'");
    }
    if (!std::isfinite(x)) fail(n, what + ": must be finite");
    return x;
  }

  std::vector<double> numbers(const YAML::Node& n, const std::string& what) const {
    if (n.IsScalar()) return {number(n, what)};
    if (!n.IsSequence()) fail(n, what + ": expected a number or a list of numbers");
    if (n.size() == 0) fail(n, what + ": list must be non-empty");
    std::vector<double> out;
    for (const auto& e : n) out.push_back(number(e, what));
    return out;
  }

  std::size_t count(const YAML::Node& n, const std::string& what) const {
    const double x = number(n, what);
    if (x < 0.0 || x != std::floor(x) || x > 1e9) fail(n, what + ": expected a non-negative integer");
    return static_cast<std::size_t>(x);
  }

  std::string text(const YAML::Node& n, const std::string& what) const {
    if (!n.IsScalar()) fail(n, what + ": expected a string");
    return n.Scalar();
  }

  bool flag(const YAML::Node& n, const std::string& what) const {
    try {
      return n.as<bool>();
    } catch (const YAML::Exception&) {
      fail(n, what + ": expected true or false");
    }
  }

  template <class E>
  E choice(const YAML::Node& n, const std::map<E, std::string>& names, const std::string& what) const {
    const auto e = lookup(names, text(n, what));
    if (!e) fail(n, what + ": '" + n.Scalar() + "' is not one of " + choices(names));
    return *e;
  }

private:
  std::string origin_;
};

void parse_atom(const Reader& r, const YAML::Node& n, RunConfig& c) {
  r.check_keys(n, "atom", {"kind", "alpha0_C_m2_per_V", "dipole_C_m", "omega_a_rad_s", "gamma_a_rad_s"});
  AtomModel a;
  if (n["kind"]) a.kind = r.choice(n["kind"], kind_names, "atom.kind");
  if (n["alpha0_C_m2_per_V"]) a.alpha0 = r.number(n["alpha0_C_m2_per_V"], "atom.alpha0_C_m2_per_V");
  if (const auto d = n["dipole_C_m"]) {
    if (!d.IsSequence() || d.size() != 3) r.fail(d, "atom.dipole_C_m: expected [x, y, z]");
    a.dipole = Eigen::Vector3d(r.number(d[0], "atom.dipole_C_m"), r.number(d[1], "atom.dipole_C_m"),
                               r.number(d[2], "atom.dipole_C_m"));
  }
  if (a.alpha0.has_value() == a.dipole.has_value())
    r.fail(n, "atom: give exactly one of alpha0_C_m2_per_V and dipole_C_m");
  if (!n["omega_a_rad_s"]) r.fail(n, "atom: omega_a_rad_s is required");
  a.omega_a = r.number(n["omega_a_rad_s"], "atom.omega_a_rad_s");
  if (n["gamma_a_rad_s"]) {
    if (a.kind != AtomKind::QRT) r.fail(n["gamma_a_rad_s"], "atom.gamma_a_rad_s applies to kind qrt only");
    a.gamma_a = r.number(n["gamma_a_rad_s"], "atom.gamma_a_rad_s");
  }
  c.atom = a;
}

void parse_surface(const Reader& r, const YAML::Node& n, RunConfig& c) {
  r.check_keys(n, "surface", {"kind", "rho_ohm_m", "omega_p_rad_s", "gamma_d_rad_s", "epsilon_re", "epsilon_im"});
  if (!n["kind"]) r.fail(n, "surface: kind is required (ohmic | drude | constant | vacuum)");
  const std::string kind = r.text(n["kind"], "surface.kind");
  const auto only = [&](std::vector<std::string> keys) {
    keys.push_back("kind");
    for (const auto& kv : n) {
      const auto k = kv.first.as<std::string>();
      if (std::find(keys.begin(), keys.end(), k) == keys.end())
        r.fail(kv.first, "surface." + k + " does not apply to kind " + kind);
    }
    for (const auto& k : keys)
      if (!n[k] && k != "epsilon_im") r.fail(n, "surface: " + k + " is required for kind " + kind);
  };
  if (kind == "ohmic") {
    only({"rho_ohm_m"});
    c.surface = SurfaceModel::ohmic(r.number(n["rho_ohm_m"], "surface.rho_ohm_m"));
  } else if (kind == "drude") {
    only({"omega_p_rad_s", "gamma_d_rad_s"});
    c.surface = SurfaceModel::drude(r.number(n["omega_p_rad_s"], "surface.omega_p_rad_s"),
                                    r.number(n["gamma_d_rad_s"], "surface.gamma_d_rad_s"));
  } else if (kind == "constant") {
    only({"epsilon_re", "epsilon_im"});
    const double im = n["epsilon_im"] ? r.number(n["epsilon_im"], "surface.epsilon_im") : 0.0;
    c.surface = SurfaceModel::constant({r.number(n["epsilon_re"], "surface.epsilon_re"), im});
  } else if (kind == "vacuum") {
    only({});
    c.surface = SurfaceModel::vacuum();
  } else {
    r.fail(n["kind"], "surface.kind: '" + kind + "' is not one of ohmic | drude | constant | vacuum");
  }
}

void parse_quadrature(const Reader& r, const YAML::Node& n, QuadratureConfig& q) {
  r.check_keys(n, "quadrature",
               {"rel_tol", "abs_tol", "max_evaluations", "kmax_policy", "kmax_fixed_per_m", "omega_max_rad_s",
                "oscillatory_rule", "closed_forms"});
  if (n["rel_tol"]) q.rel_tol = r.number(n["rel_tol"], "quadrature.rel_tol");
  if (n["abs_tol"]) q.abs_tol = r.number(n["abs_tol"], "quadrature.abs_tol");
  if (n["max_evaluations"]) q.max_evaluations = r.count(n["max_evaluations"], "quadrature.max_evaluations");
  if (n["kmax_policy"]) {
    const std::map<KmaxPolicy, std::string> names = {{KmaxPolicy::AutoExponentialCutoff, "auto"},
                                                     {KmaxPolicy::Fixed, "fixed"}};
    q.kmax_policy = r.choice(n["kmax_policy"], names, "quadrature.kmax_policy");
  }
  if (n["kmax_fixed_per_m"]) q.kmax_fixed = r.number(n["kmax_fixed_per_m"], "quadrature.kmax_fixed_per_m");
  if (n["omega_max_rad_s"]) q.omega_max = r.number(n["omega_max_rad_s"], "quadrature.omega_max_rad_s");
  if (n["oscillatory_rule"]) {
    const std::map<OscillatoryRule, std::string> names = {{OscillatoryRule::FilonType, "filon"},
                                                          {OscillatoryRule::AdaptiveSubdivision, "adaptive"}};
    q.oscillatory_rule = r.choice(n["oscillatory_rule"], names, "quadrature.oscillatory_rule");
  }
  if (n["closed_forms"]) q.closed_forms = r.flag(n["closed_forms"], "quadrature.closed_forms");
  try {
    q.validate();
  } catch (const std::invalid_argument& e) {
    r.fail(n, std::string("quadrature: ") + e.what());
  }
}

std::string num(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string list(const std::vector<double>& xs) {
  std::string out = "[";
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? ", " : "") + num(xs[i]);
  return out + "]";
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

} // namespace

std::string to_string(Task t) { return task_names.at(t); }
std::string to_string(FrictionMethod m) { return method_names.at(m); }

Task parse_task(const std::string& s) {
  const auto t = lookup(task_names, s);
  if (!t) throw ConfigError("unknown task '" + s + "' (" + choices(task_names) + ")");
  return *t;
}

std::string library_version() { return QFRIC_VERSION; }

void RunConfig::validate(Task t) const {
  if (task && *task != t)
    throw ConfigError("config task is '" + to_string(*task) + "' but the subcommand is '" + to_string(t) + "'");
  if (!has_atom()) throw ConfigError("config: atom section is required");
  if (z.empty()) throw ConfigError("config: geometry.z_m is required");
  if (v.empty()) throw ConfigError("config: motion.v_m_s must be non-empty");
  switch (t) {
  case Task::Spectrum:
    if (omegas.empty()) throw ConfigError("task spectrum needs spectrum.omega_rad_s");
    break;
  case Task::Correlation:
    if (taus.empty()) throw ConfigError("task correlation needs correlation.tau_s");
    break;
  case Task::CompareQrt:
    if (gammas.empty()) throw ConfigError("task compare-qrt needs compare_qrt.gamma_a_rad_s");
    if (atom.kind != AtomKind::Oscillator) throw ConfigError("task compare-qrt needs an oscillator atom");
    break;
  case Task::Oracle:
    if (oracle_modes.empty()) throw ConfigError("task oracle needs oracle.modes_count");
    for (auto n : oracle_modes)
      if (n < 2) throw ConfigError("oracle.modes_count entries must be >= 2");
    break;
  case Task::Sweep:
    if (sweep_methods.empty()) throw ConfigError("task sweep needs sweep.methods");
    break;
  default:
    break;
  }
}

bool RunConfig::has_atom() const { return atom.omega_a > 0.0 || atom.dipole || atom.alpha0; }

bool operator==(const RunConfig& a, const RunConfig& b) { return serialize_config(a) == serialize_config(b); }

RunConfig parse_config(const std::string& text, const std::string& origin) {
  const Reader r(origin);
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(origin + ":" + std::to_string(e.mark.line + 1) + ":" + std::to_string(e.mark.column + 1) +
                      ": " + e.msg);
  }
  RunConfig c;
  if (root.IsNull()) return c;
  r.check_keys(root, "top level",
               {"task", "atom", "surface", "geometry", "motion", "quadrature", "friction", "sweep", "spectrum",
                "correlation", "compare_qrt", "oracle", "output"});

  if (root["task"]) {
    try {
      c.task = parse_task(r.text(root["task"], "task"));
    } catch (const ConfigError& e) {
      r.fail(root["task"], e.what());
    }
  }
  if (root["atom"]) parse_atom(r, root["atom"], c);
  if (root["surface"]) parse_surface(r, root["surface"], c);
  if (const auto n = root["geometry"]) {
    r.check_keys(n, "geometry", {"z_m"});
    if (n["z_m"]) c.z = r.numbers(n["z_m"], "geometry.z_m");
  }
  if (const auto n = root["motion"]) {
    r.check_keys(n, "motion", {"v_m_s"});
    if (n["v_m_s"]) c.v = r.numbers(n["v_m_s"], "motion.v_m_s");
  }
  if (root["quadrature"]) parse_quadrature(r, root["quadrature"], c.quad);
  if (const auto n = root["friction"]) {
    r.check_keys(n, "friction", {"method"});
    if (n["method"]) c.friction_method = r.choice(n["method"], method_names, "friction.method");
  }
  if (const auto n = root["sweep"]) {
    r.check_keys(n, "sweep", {"methods"});
    if (const auto m = n["methods"]) {
      if (!m.IsSequence() || m.size() == 0) r.fail(m, "sweep.methods: expected a non-empty list");
      c.sweep_methods.clear();
      for (const auto& e : m) {
        const auto fm = r.choice(e, method_names, "sweep.methods");
        if (fm == FrictionMethod::Auto) r.fail(e, "sweep.methods: name methods explicitly");
        c.sweep_methods.push_back(fm);
      }
    }
  }
  if (const auto n = root["spectrum"]) {
    r.check_keys(n, "spectrum", {"omega_rad_s"});
    if (n["omega_rad_s"]) c.omegas = r.numbers(n["omega_rad_s"], "spectrum.omega_rad_s");
  }
  if (const auto n = root["correlation"]) {
    r.check_keys(n, "correlation", {"tau_s"});
    if (n["tau_s"]) c.taus = r.numbers(n["tau_s"], "correlation.tau_s");
  }
  if (const auto n = root["compare_qrt"]) {
    r.check_keys(n, "compare_qrt", {"gamma_a_rad_s"});
    if (n["gamma_a_rad_s"]) c.gammas = r.numbers(n["gamma_a_rad_s"], "compare_qrt.gamma_a_rad_s");
  }
  if (const auto n = root["oracle"]) {
    r.check_keys(n, "oracle", {"mode", "modes_count", "initial_state", "t_s"});
    if (n["mode"]) {
      const std::map<OracleMode, std::string> names = {{OracleMode::Moving, "moving"}, {OracleMode::Static, "static"}};
      c.oracle_mode = r.choice(n["mode"], names, "oracle.mode");
    }
    if (const auto m = n["modes_count"]) {
      c.oracle_modes.clear();
      if (m.IsScalar()) {
        c.oracle_modes.push_back(r.count(m, "oracle.modes_count"));
      } else {
        if (!m.IsSequence() || m.size() == 0) r.fail(m, "oracle.modes_count: expected a non-empty list");
        for (const auto& e : m) c.oracle_modes.push_back(r.count(e, "oracle.modes_count"));
      }
    }
    if (n["initial_state"]) {
      const std::map<InitialState, std::string> names = {{InitialState::DressedStatic, "dressed"},
                                                         {InitialState::FactorizedVacuum, "factorized"}};
      c.oracle_initial = r.choice(n["initial_state"], names, "oracle.initial_state");
    }
    if (n["t_s"]) c.oracle_times = r.numbers(n["t_s"], "oracle.t_s");
  }
  if (const auto n = root["output"]) {
    r.check_keys(n, "output", {"path", "format"});
    if (n["path"]) c.out_path = r.text(n["path"], "output.path");
    if (n["format"]) {
      const std::map<OutputFormat, std::string> names = {{OutputFormat::Csv, "csv"}, {OutputFormat::Jsonl, "jsonl"}};
      c.format = r.choice(n["format"], names, "output.format");
    }
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

std::string serialize_config(const RunConfig& c) {
  std::ostringstream os;
  if (c.task) os << "task: " << to_string(*c.task) << '\n';
  if (c.has_atom()) {
    os << "atom:\n  kind: " << kind_names.at(c.atom.kind) << '\n';
    if (c.atom.alpha0) os << "  alpha0_C_m2_per_V: " << num(*c.atom.alpha0) << '\n';
    if (c.atom.dipole) {
      const auto& d = *c.atom.dipole;
      os << "  dipole_C_m: " << list({d.x(), d.y(), d.z()}) << '\n';
    }
    os << "  omega_a_rad_s: " << num(c.atom.omega_a) << '\n';
    if (c.atom.gamma_a) os << "  gamma_a_rad_s: " << num(*c.atom.gamma_a) << '\n';
  }
  os << "surface:\n";
  std::visit(
      [&](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Ohmic>) {
          os << "  kind: ohmic\n  rho_ohm_m: " << num(s.resistivity) << '\n';
        } else if constexpr (std::is_same_v<S, Drude>) {
          os << "  kind: drude\n  omega_p_rad_s: " << num(s.plasma_frequency) << "\n  gamma_d_rad_s: "
             << num(s.damping) << '\n';
        } else {
          os << "  kind: constant\n  epsilon_re: " << num(s.epsilon.real()) << "\n  epsilon_im: "
             << num(s.epsilon.imag()) << '\n';
        }
      },
      c.surface.kind);
  if (!c.z.empty()) os << "geometry:\n  z_m: " << list(c.z) << '\n';
  if (!c.v.empty()) os << "motion:\n  v_m_s: " << list(c.v) << '\n';
  const auto& q = c.quad;
  os << "quadrature:\n  rel_tol: " << num(q.rel_tol) << "\n  abs_tol: " << num(q.abs_tol)
     << "\n  max_evaluations: " << q.max_evaluations
     << "\n  kmax_policy: " << (q.kmax_policy == KmaxPolicy::Fixed ? "fixed" : "auto")
     << "\n  kmax_fixed_per_m: " << num(q.kmax_fixed) << "\n  omega_max_rad_s: " << num(q.omega_max)
     << "\n  oscillatory_rule: " << (q.oscillatory_rule == OscillatoryRule::FilonType ? "filon" : "adaptive")
     << "\n  closed_forms: " << (q.closed_forms ? "true" : "false") << '\n';
  os << "friction:\n  method: " << to_string(c.friction_method) << '\n';
  os << "sweep:\n  methods: [";
  for (std::size_t i = 0; i < c.sweep_methods.size(); ++i) os << (i ? ", " : "") << to_string(c.sweep_methods[i]);
  os << "]\n";
  if (!c.omegas.empty()) os << "spectrum:\n  omega_rad_s: " << list(c.omegas) << '\n';
  if (!c.taus.empty()) os << "correlation:\n  tau_s: " << list(c.taus) << '\n';
  if (!c.gammas.empty()) os << "compare_qrt:\n  gamma_a_rad_s: " << list(c.gammas) << '\n';
  os << "oracle:\n  mode: " << (c.oracle_mode == OracleMode::Moving ? "moving" : "static") << "\n  modes_count: [";
  for (std::size_t i = 0; i < c.oracle_modes.size(); ++i) os << (i ? ", " : "") << c.oracle_modes[i];
  os << "]\n  initial_state: " << (c.oracle_initial == InitialState::DressedStatic ? "dressed" : "factorized")
     << '\n';
  if (!c.oracle_times.empty()) os << "  t_s: " << list(c.oracle_times) << '\n';
  os << "output:\n  format: " << (c.format == OutputFormat::Csv ? "csv" : "jsonl") << '\n';
  if (!c.out_path.empty()) {
    YAML::Emitter e;
    e << YAML::DoubleQuoted << c.out_path;
    os << "  path: " << e.c_str() << '\n';
  }
  return os.str();
}

std::string config_hash(const RunConfig& config) {
  RunConfig c = config;
  c.out_path.clear();
  c.format = OutputFormat::Csv;
  c.task.reset();
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(library_version() + '\n' + serialize_config(c))));
  return buf;
}

std::vector<std::string> preset_names() { return {"rb-si-nearfield", "ohmic-toy", "drude-toy"}; }

RunConfig preset(const std::string& name) {
  RunConfig c;
  if (name == "rb-si-nearfield") {
    // Rubidium ground state over silicon; omega_a is the D2 line (780.24 nm). The closed-form
    // friction depends only on alpha0, rho, z and v.
    c.atom = AtomModel::isotropic(AtomKind::Oscillator, 5.26e-39, 2.4148e15);
    c.surface = SurfaceModel::ohmic(6.4e2);
    c.z = {1e-8};
    c.v = {340.0};
  } else if (name == "ohmic-toy") {
    // Round numbers with strong coupling: gamma / omega_a ~ 0.3 and a surface scale 1/(2 eps0 rho)
    // of 1.1e15 rad/s, so a few hundred bath modes resolve both the line and the Doppler window.
    c.atom = AtomModel::with_dipole(AtomKind::Oscillator, Eigen::Vector3d(5.5e-27, 0.0, 0.0), 1e15);
    c.surface = SurfaceModel::ohmic(5e-5);
    c.z = {1e-8};
    c.v = {1e6};
  } else if (name == "drude-toy") {
    // Rb-like polarizability over a damped Drude metal; gamma_d > 0 keeps omega_p / sqrt 2 off the axis.
    c.atom = AtomModel::isotropic(AtomKind::Oscillator, 5.26e-39, 1e15);
    c.surface = SurfaceModel::drude(2e15, 1e14);
    c.z = {1e-8};
    c.v = {1e3};
    c.gammas = {1e12, 1e13, 1e14};
  } else {
    std::string list;
    for (const auto& n : preset_names()) list += (list.empty() ? "" : ", ") + n;
    throw ConfigError("unknown preset '" + name + "' (" + list + ")");
  }
  return c;
}

} // namespace qfric
