#include "qfric/runner.hpp"

#include "qfric/bath_oracle.hpp"
#include "qfric/errors.hpp"
#include "qfric/forces.hpp"
#include "qfric/spectrum.hpp"

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <map>
#include <mutex>
#include <ostream>
#include <thread>

namespace qfric {

namespace {

const std::vector<std::string> trailer = {"method", "converged", "status", "note", "version", "config_hash"};

struct Context {
  const RunConfig& cfg;
  std::string version, hash;
};

struct PointOutput {
  std::vector<Row> rows;
  std::string summary;
  std::string status = "ok";
};

struct Point {
  std::string label;
  std::function<PointOutput()> compute;
  /// Row echoing the inputs with empty results, for a point that threw.
  std::function<Row()> blank;
  std::string method;
};

Row finish(Row r, const Context& ctx, const std::string& method, Cell converged, const std::string& status,
           const std::string& note) {
  r.push_back(method);
  r.push_back(std::move(converged));
  r.push_back(status);
  r.push_back(note);
  r.push_back(ctx.version);
  r.push_back(ctx.hash);
  return r;
}

std::vector<std::string> with_trailer(std::vector<std::string> cols) {
  cols.insert(cols.end(), trailer.begin(), trailer.end());
  return cols;
}

Cell nothing() { return std::monostate{}; }

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

bool is_ohmic(const SurfaceModel& s) { return std::holds_alternative<Ohmic>(s.kind); }

FrictionMethod resolve(FrictionMethod m, const RunConfig& c) {
  if (m != FrictionMethod::Auto) return m;
  if (c.atom.kind == AtomKind::QRT) return FrictionMethod::Qrt;
  if (c.atom.kind == AtomKind::Oscillator && c.atom.is_isotropic() && is_ohmic(c.surface))
    return FrictionMethod::ClosedForm;
  return FrictionMethod::Full;
}

std::string method_label(FrictionMethod m) {
  switch (m) {
  case FrictionMethod::Full: return to_string(ForceMethod::FullIntegral);
  case FrictionMethod::LowVelocity: return to_string(ForceMethod::LowVelocityAsymptotic);
  case FrictionMethod::ClosedForm: return to_string(ForceMethod::NearfieldClosedForm);
  case FrictionMethod::Qrt: return to_string(ForceMethod::QRT);
  default: return "auto";
  }
}

ForceResult friction(const RunConfig& c, FrictionMethod m, double z, double v) {
  switch (resolve(m, c)) {
  case FrictionMethod::Full: return friction_full(c.atom, c.surface, z, v, c.quad);
  case FrictionMethod::LowVelocity: return friction_lowv(c.atom, c.surface, z, v, c.quad);
  case FrictionMethod::Qrt: return friction_qrt(c.atom, c.surface, z, v, c.quad);
  case FrictionMethod::ClosedForm:
    if (c.atom.kind != AtomKind::Oscillator || !c.atom.is_isotropic() || !is_ohmic(c.surface))
      throw DomainError("closed-form friction needs an isotropic oscillator over an ohmic surface");
    return friction_nearfield_ohmic(*c.atom.alpha0, std::get<Ohmic>(c.surface.kind).resistivity, z, v);
  default: break;
  }
  throw DomainError("unresolved friction method");
}

// ---- cp, friction, sweep ------------------------------------------------------------------

void force_rows(const Context& ctx, Task task, Table& t, std::vector<Point>& pts) {
  const auto& c = ctx.cfg;
  if (task == Task::Cp) {
    t.schema = "qfric.cp/1";
    t.columns = with_trailer({"z_m", "force_N", "abs_error_N", "n_evaluations_count"});
    const std::string method = to_string(ForceMethod::CasimirPolder);
    for (double z : c.z) {
      pts.push_back({"cp z_m=" + sci(z),
                     [&ctx, z, method] {
                       const auto& c = ctx.cfg;
                       const auto r = c.atom.kind == AtomKind::QRT ? casimir_polder_qrt(c.atom, c.surface, z, c.quad)
                                                                   : casimir_polder_fdt(c.atom, c.surface, z, c.quad);
                       const std::string m = c.atom.kind == AtomKind::QRT ? method + "_qrt" : method;
                       PointOutput o;
                       o.rows.push_back(finish({z, r.value, r.abs_error_estimate, (long long)r.n_evaluations}, ctx, m,
                                               true, "ok", r.note));
                       o.summary = "force_N=" + sci(r.value) + " [" + m + "]";
                       return o;
                     },
                     [z] { return Row{z, nothing(), nothing(), nothing()}; }, method});
    }
    return;
  }

  const bool sweep = task == Task::Sweep;
  t.schema = sweep ? "qfric.sweep/1" : "qfric.friction/1";
  t.columns = sweep ? with_trailer({"row_kind", "z_m", "v_m_s", "force_N", "abs_error_N", "n_evaluations_count",
                                    "exponent_dimless", "exponent_stderr_dimless", "linear_share_dimless"})
                    : with_trailer({"z_m", "v_m_s", "force_N", "abs_error_N", "n_evaluations_count"});
  const std::vector<FrictionMethod> methods =
      sweep ? c.sweep_methods : std::vector<FrictionMethod>{c.friction_method};
  for (double z : c.z)
    for (FrictionMethod m : methods)
      for (double v : c.v) {
        const std::string label = method_label(resolve(m, c));
        const auto echo = [sweep, z, v](Row r) {
          if (sweep) {
            r.insert(r.begin(), std::string("point"));
            r.insert(r.end(), {nothing(), nothing(), nothing()});
          }
          return r;
        };
        pts.push_back({(sweep ? "sweep" : "friction") + std::string(" z_m=") + sci(z) + " v_m_s=" + sci(v),
                       [&ctx, m, z, v, label, echo] {
                         const auto r = friction(ctx.cfg, m, z, v);
                         PointOutput o;
                         o.rows.push_back(finish(echo({z, v, r.value, r.abs_error_estimate, (long long)r.n_evaluations}),
                                                 ctx, label, true, "ok", r.note));
                         o.summary = "force_N=" + sci(r.value) + " [" + label + "]";
                         return o;
                       },
                       [echo, z, v] { return echo({z, v, nothing(), nothing(), nothing()}); }, label});
      }
}

/// Exponent fits over v for each (z, method) of a sweep, appended after the points.
void sweep_fits(const Context& ctx, Table& t) {
  const auto cz = t.column("z_m"), cv = t.column("v_m_s"), cf = t.column("force_N"), cm = t.column("method"),
             cs = t.column("status");
  std::vector<std::pair<double, std::string>> order;
  std::map<std::pair<double, std::string>, std::pair<std::vector<double>, std::vector<double>>> groups;
  for (const auto& r : t.rows) {
    const auto key = std::make_pair(std::get<double>(r[cz]), std::get<std::string>(r[cm]));
    if (!groups.count(key)) order.push_back(key);
    auto& g = groups[key];
    if (std::get<std::string>(r[cs]) != "ok") continue;
    const double v = std::abs(std::get<double>(r[cv])), f = std::get<double>(r[cf]);
    if (v > 0.0 && f != 0.0) {
      g.first.push_back(v);
      g.second.push_back(f);
    }
  }
  for (const auto& key : order) {
    const auto& [v, f] = groups[key];
    Row r{std::string("fit"), key.first, nothing(), nothing(), nothing(), nothing()};
    try {
      const auto fit = friction_exponent_fit(v, f);
      r.insert(r.end(), {fit.exponent, fit.exponent_stderr, fit.linear_share});
      t.rows.push_back(finish(r, ctx, key.second, nothing(), "ok", "log-log fit over v"));
    } catch (const DomainError& e) {
      r.insert(r.end(), {nothing(), nothing(), nothing()});
      t.rows.push_back(finish(r, ctx, key.second, nothing(), "skipped", e.what()));
    }
  }
}

// ---- spectrum, correlation, compare-qrt ------------------------------------------------------

void spectrum_rows(const Context& ctx, Table& t, std::vector<Point>& pts) {
  t.schema = "qfric.spectrum/1";
  t.columns = with_trailer({"z_m", "v_m_s", "omega_rad_s", "S_xx_C2m2s", "S_yy_C2m2s", "S_zz_C2m2s", "S_xy_C2m2s",
                            "S_xz_C2m2s", "S_yz_C2m2s", "abs_error_C2m2s"});
  const std::string method = ctx.cfg.atom.kind == AtomKind::QRT ? "qrt_lorentzian" : "nonequilibrium_spectrum";
  for (double z : ctx.cfg.z)
    for (double v : ctx.cfg.v)
      for (double w : ctx.cfg.omegas)
        pts.push_back({"spectrum z_m=" + sci(z) + " v_m_s=" + sci(v) + " omega_rad_s=" + sci(w),
                       [&ctx, z, v, w, method] {
                         const auto& c = ctx.cfg;
                         const auto s = power_spectrum(c.atom, c.surface, z, w, v, c.quad).value;
                         PointOutput o;
                         // The integrators throw unless rel_tol is met, so rel_tol bounds the error.
                         const double err = c.quad.rel_tol * s.cwiseAbs().maxCoeff();
                         o.rows.push_back(finish(
                             {z, v, w, s(0, 0), s(1, 1), s(2, 2), s(0, 1), s(0, 2), s(1, 2), err}, ctx, method, true,
                             "ok", ""));
                         o.summary = "trace_C2m2s=" + sci(s.trace());
                         return o;
                       },
                       [z, v, w] {
                         Row r{z, v, w};
                         r.resize(10);
                         return r;
                       },
                       method});
}

void correlation_rows(const Context& ctx, Table& t, std::vector<Point>& pts) {
  t.schema = "qfric.correlation/1";
  t.columns = with_trailer({"z_m", "v_m_s", "tau_s", "C_xx_re_C2m2", "C_xx_im_C2m2", "C_yy_re_C2m2", "C_yy_im_C2m2",
                            "C_zz_re_C2m2", "C_zz_im_C2m2", "C_xz_re_C2m2", "C_xz_im_C2m2", "abs_error_C2m2"});
  const std::string method = "fourier_of_spectrum";
  for (double z : ctx.cfg.z)
    for (double v : ctx.cfg.v)
      pts.push_back({"correlation z_m=" + sci(z) + " v_m_s=" + sci(v),
                     [&ctx, z, v, method] {
                       const auto& c = ctx.cfg;
                       const auto samples = correlation_from_spectrum(c.atom, c.surface, z, c.taus, v, c.quad);
                       PointOutput o;
                       std::size_t bad = 0;
                       for (const auto& s : samples) {
                         const auto& m = s.value;
                         bad += !s.converged;
                         o.rows.push_back(finish({z, v, s.tau, m(0, 0).real(), m(0, 0).imag(), m(1, 1).real(),
                                                  m(1, 1).imag(), m(2, 2).real(), m(2, 2).imag(), m(0, 2).real(),
                                                  m(0, 2).imag(), s.error_bound},
                                                 ctx, method, s.converged, s.converged ? "ok" : "nonconverged", ""));
                       }
                       if (bad) o.status = "nonconverged";
                       o.summary = std::to_string(samples.size()) + " lags, " + std::to_string(bad) + " nonconverged";
                       return o;
                     },
                     [z, v] {
                       Row r{z, v};
                       r.resize(12);
                       return r;
                     },
                     method});
}

void compare_rows(const Context& ctx, Table& t, std::vector<Point>& pts) {
  t.schema = "qfric.compare_qrt/1";
  t.columns = with_trailer({"z_m", "gamma_a_rad_s", "force_fdt_N", "force_qrt_N", "deviation_dimless",
                            "abs_error_fdt_N", "abs_error_qrt_N"});
  const std::string method = "casimir_polder_fdt_vs_qrt";
  for (double z : ctx.cfg.z)
    pts.push_back({"compare-qrt z_m=" + sci(z),
                   [&ctx, z, method] {
                     const auto& c = ctx.cfg;
                     const auto rows = compare_qrt_cp(c.atom, c.surface, z, c.gammas, c.quad);
                     PointOutput o;
                     for (const auto& r : rows)
                       o.rows.push_back(finish({z, r.gamma_a, r.fdt.value, r.qrt.value, r.deviation,
                                                r.fdt.abs_error_estimate, r.qrt.abs_error_estimate},
                                               ctx, method, true, "ok", "oscillator coupling matched to gamma_a"));
                     o.summary = std::to_string(rows.size()) + " widths, max deviation " +
                                 sci(rows.empty() ? 0.0 : rows.back().deviation);
                     return o;
                   },
                   [z] {
                     Row r{z};
                     r.resize(7);
                     return r;
                   },
                   method});
}

// ---- oracle ---------------------------------------------------------------------------------

void oracle_moving_rows(const Context& ctx, Table& t, std::vector<Point>& pts) {
  t.schema = "qfric.oracle_moving/1";
  t.columns = with_trailer({"row_kind", "z_m", "v_m_s", "n_modes_count", "t_s", "force_N", "abs_error_N",
                            "window_start_s", "window_end_s", "reference_full_N", "reference_lowv_N",
                            "reconstruction_error_dimless"});
  const auto& c = ctx.cfg;
  double vmax = 0.0;
  for (double v : c.v) vmax = std::max(vmax, std::abs(v));
  if (vmax == 0.0) throw ConfigError("moving oracle needs a nonzero velocity in motion.v_m_s");
  const std::string method = "oracle_moving";
  for (double z : c.z)
    for (double v : c.v)
      pts.push_back({"oracle z_m=" + sci(z) + " v_m_s=" + sci(v),
                     [&ctx, z, v, vmax, method] {
                       const auto& c = ctx.cfg;
                       PointOutput o;
                       // References: a failure here leaves the column empty rather than losing the oracle.
                       Cell full = nothing(), lowv = nothing();
                       std::string ref_note;
                       try {
                         full = friction_full(c.atom, c.surface, z, v, c.quad).value;
                         lowv = friction_lowv(c.atom, c.surface, z, v, c.quad).value;
                       } catch (const std::exception& e) {
                         ref_note = std::string("; reference failed: ") + e.what();
                       }
                       BathConfig bc;
                       bc.design_velocity = v == 0.0 ? vmax : std::abs(v);
                       MovingOracleConfig mc;
                       mc.initial = c.oracle_initial;
                       for (std::size_t n : c.oracle_modes) {
                         const auto bath = build_bath(c.atom, c.surface, z, n, bc, c.quad);
                         const auto r = evolve_moving(bath, v, c.oracle_times, mc);
                         const long long nn = static_cast<long long>(n);
                         for (std::size_t i = 0; i < r.t.size(); ++i)
                           o.rows.push_back(finish({std::string("series"), z, v, nn, r.t[i], r.force[i], nothing(),
                                                    nothing(), nothing(), nothing(), nothing(), nothing()},
                                                   ctx, method, nothing(), "ok", ""));
                         std::string note = r.note;
                         if (!bath.reconstruction_ok)
                           note += std::string(note.empty() ? "" : "; ") + "spectral reconstruction above tolerance";
                         note += ref_note;
                         o.rows.push_back(finish({std::string("plateau"), z, v, nn, nothing(), r.plateau,
                                                  r.plateau_spread, r.window_start, r.window_end, full, lowv,
                                                  bath.reconstruction_error},
                                                 ctx, method, r.converged, r.converged ? "ok" : "nonconverged", note));
                         if (!r.converged) o.status = "nonconverged";
                         o.summary += (o.summary.empty() ? "" : ", ") + std::string("N=") + std::to_string(n) +
                                      " plateau_N=" + sci(r.plateau) + (r.converged ? "" : " (nonconverged)");
                       }
                       return o;
                     },
                     [z, v] {
                       Row r{std::string("plateau"), z, v};
                       r.resize(12);
                       return r;
                     },
                     method});
}

void oracle_static_rows(const Context& ctx, Table& t, std::vector<Point>& pts) {
  t.schema = "qfric.oracle_static/1";
  t.columns = with_trailer({"row_kind", "z_m", "n_modes_count", "tau_s", "C_re_C2m2", "C_im_C2m2",
                            "reference_re_C2m2", "reference_im_C2m2", "abs_error_C2m2",
                            "reconstruction_error_dimless"});
  const std::string method = "oracle_static";
  for (double z : ctx.cfg.z)
    for (std::size_t n : ctx.cfg.oracle_modes)
      pts.push_back({"oracle z_m=" + sci(z) + " N=" + std::to_string(n),
                     [&ctx, z, n, method] {
                       const auto& c = ctx.cfg;
                       std::vector<double> tau = c.oracle_times;
                       if (tau.empty()) {
                         // gamma tau up to 100, the window on which the spectral route is checked.
                         const double gamma =
                             self_energy(c.atom, c.surface, z, c.atom.omega_a, 0.0, c.quad).value.imag() /
                             c.atom.omega_a;
                         if (!(gamma > 0.0)) throw DomainError("static oracle: no dissipation at omega_a");
                         for (int i = 0; i <= 50; ++i) tau.push_back(i * 2.0 / gamma);
                       }
                       const auto bath = build_bath(c.atom, c.surface, z, n, {}, c.quad);
                       const auto r = evolve_static(bath, tau);
                       const auto ref = correlation_from_spectrum(c.atom, c.surface, z, tau, 0.0, c.quad);
                       const Eigen::Vector3d u = c.atom.dipole->normalized();
                       const long long nn = static_cast<long long>(n);
                       PointOutput o;
                       double worst = 0.0;
                       for (std::size_t i = 0; i < tau.size(); ++i) {
                         const std::complex<double> rc = u.cast<std::complex<double>>().dot(ref[i].value * u);
                         const double err = std::abs(r.correlation[i] - rc);
                         worst = std::max(worst, err);
                         o.rows.push_back(finish({std::string("series"), z, nn, tau[i], r.correlation[i].real(),
                                                  r.correlation[i].imag(), rc.real(), rc.imag(), err,
                                                  bath.reconstruction_error},
                                                 ctx, method, r.converged, r.converged ? "ok" : "nonconverged",
                                                 r.note));
                       }
                       if (!r.converged) o.status = "nonconverged";
                       o.summary = "max |dC|/C(0)=" + sci(worst / std::abs(r.correlation.front()));
                       return o;
                     },
                     [z, n] {
                       Row r{std::string("series"), z, static_cast<long long>(n)};
                       r.resize(10);
                       return r;
                     },
                     method});
}

// ---- execution ------------------------------------------------------------------------------

PointOutput execute(const Point& p, const Context& ctx) {
  const auto failed = [&](const std::string& status, const std::string& what) {
    PointOutput o;
    o.rows.push_back(finish(p.blank(), ctx, p.method, false, status, what));
    o.status = status;
    o.summary = status + ": " + what;
    return o;
  };
  try {
    return p.compute();
  } catch (const NonConvergence& e) {
    return failed("nonconverged", e.what());
  } catch (const ConfigError& e) {
    return failed("config-error", e.what());
  } catch (const std::exception& e) {
    return failed("domain-error", e.what());
  }
}

} // namespace

std::size_t Table::column(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw std::out_of_range("no column " + name);
  return static_cast<std::size_t>(it - columns.begin());
}

int RunReport::exit_code(bool allow_nonconverged) const {
  if (config_errors) return ExitConfig;
  if (domain_errors) return ExitDomain;
  if (nonconverged && !allow_nonconverged) return ExitNonConverged;
  return ExitOk;
}

RunReport run(const RunConfig& config, Task task, const RunOptions& options) {
  config.validate(task);
  config.atom.validate();
  config.surface.validate();
  try {
    config.quad.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("quadrature: ") + e.what());
  }
  if (task == Task::Oracle && !config.atom.dipole)
    throw ConfigError("task oracle needs an atom with dipole_C_m (a single dipole channel)");

  const Context ctx{config, library_version(), config_hash(config)};
  RunReport rep;
  std::vector<Point> pts;
  switch (task) {
  case Task::Cp:
  case Task::Friction:
  case Task::Sweep: force_rows(ctx, task, rep.table, pts); break;
  case Task::Spectrum: spectrum_rows(ctx, rep.table, pts); break;
  case Task::Correlation: correlation_rows(ctx, rep.table, pts); break;
  case Task::CompareQrt: compare_rows(ctx, rep.table, pts); break;
  case Task::Oracle:
    if (config.oracle_mode == OracleMode::Moving)
      oracle_moving_rows(ctx, rep.table, pts);
    else
      oracle_static_rows(ctx, rep.table, pts);
    break;
  }

  // Workers claim points in order; summaries and rows are released strictly in grid order.
  std::vector<PointOutput> out(pts.size());
  std::vector<char> done(pts.size(), 0);
  std::size_t released = 0;
  std::mutex mu;
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i; (i = next++) < pts.size();) {
      PointOutput o = execute(pts[i], ctx);
      std::lock_guard lock(mu);
      out[i] = std::move(o);
      done[i] = 1;
      for (; released < pts.size() && done[released]; ++released)
        if (options.on_summary)
          options.on_summary(pts[released].label + ": " + out[released].summary + " [" + out[released].status + "]");
    }
  };
  const unsigned n_threads = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(pts.size())));
  {
    std::vector<std::jthread> pool;
    for (unsigned i = 1; i < n_threads; ++i) pool.emplace_back(worker);
    worker();
  }

  rep.points = pts.size();
  for (auto& o : out) {
    if (o.status == "nonconverged") ++rep.nonconverged;
    if (o.status == "domain-error") ++rep.domain_errors;
    if (o.status == "config-error") ++rep.config_errors;
    for (auto& r : o.rows) rep.table.rows.push_back(std::move(r));
  }
  if (task == Task::Sweep) sweep_fits(ctx, rep.table);
  return rep;
}

std::string format_number(double x) {
  if (!std::isfinite(x)) return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + "\"";
}

struct CellText {
  std::string operator()(std::monostate) const { return ""; }
  std::string operator()(double x) const { return format_number(x); }
  std::string operator()(long long x) const { return std::to_string(x); }
  std::string operator()(bool b) const { return b ? "true" : "false"; }
  std::string operator()(const std::string& s) const { return csv_field(s); }
};

struct CellJson {
  nlohmann::ordered_json operator()(std::monostate) const { return nullptr; }
  nlohmann::ordered_json operator()(double x) const {
    if (!std::isfinite(x)) return format_number(x);
    return x;
  }
  nlohmann::ordered_json operator()(long long x) const { return x; }
  nlohmann::ordered_json operator()(bool b) const { return b; }
  nlohmann::ordered_json operator()(const std::string& s) const { return s; }
};

} // namespace

void write_csv(const Table& table, std::ostream& out) {
  out << "# schema: " << table.schema << '\n';
  for (std::size_t i = 0; i < table.columns.size(); ++i) out << (i ? "," : "") << table.columns[i];
  out << '\n';
  for (const auto& r : table.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << std::visit(CellText{}, r[i]);
    out << '\n';
  }
}

void write_jsonl(const Table& table, std::ostream& out) {
  nlohmann::ordered_json head;
  head["schema"] = table.schema;
  head["columns"] = table.columns;
  out << head.dump() << '\n';
  for (const auto& r : table.rows) {
    nlohmann::ordered_json j;
    for (std::size_t i = 0; i < r.size(); ++i) j[table.columns[i]] = std::visit(CellJson{}, r[i]);
    out << j.dump() << '\n';
  }
}

} // namespace qfric
