// qfric: batch front-end. Data rows go to --out (or stdout), one summary line per grid point to stderr.

#include "qfric/config.hpp"
#include "qfric/errors.hpp"
#include "qfric/runner.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <optional>

namespace {

struct Flags {
  std::string config, preset, out, format;
  std::optional<double> rel_tol;
  bool allow_nonconverged = false, dump_config = false;
  unsigned threads = 1;
};

void add_flags(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "YAML run configuration");
  sub->add_option("--preset", f.preset, "built-in configuration: rb-si-nearfield, ohmic-toy, drude-toy");
  sub->add_option("--out", f.out, "output file (default: stdout)");
  sub->add_option("--format", f.format, "csv or jsonl")->check(CLI::IsMember({"csv", "jsonl"}));
  sub->add_option("--rel-tol", f.rel_tol, "relative quadrature tolerance");
  sub->add_flag("--allow-nonconverged", f.allow_nonconverged, "exit 0 even if some points did not converge");
  sub->add_option("--threads", f.threads, "worker threads")->check(CLI::PositiveNumber);
  sub->add_flag("--dump-config", f.dump_config, "print the effective configuration as YAML and exit");
}

int run(qfric::Task task, const Flags& f) {
  using namespace qfric;
  if (f.config.empty() == f.preset.empty()) throw ConfigError("give exactly one of --config and --preset");
  RunConfig cfg = f.config.empty() ? preset(f.preset) : load_config(f.config);
  if (!f.out.empty()) cfg.out_path = f.out;
  if (!f.format.empty()) cfg.format = f.format == "jsonl" ? OutputFormat::Jsonl : OutputFormat::Csv;
  if (f.rel_tol) cfg.quad.rel_tol = *f.rel_tol;

  if (f.dump_config) {
    std::cout << serialize_config(cfg);
    return ExitOk;
  }

  RunOptions opt;
  opt.allow_nonconverged = f.allow_nonconverged;
  opt.threads = f.threads;
  opt.on_summary = [](const std::string& line) { std::cerr << line << '\n'; };
  const RunReport rep = qfric::run(cfg, task, opt);

  std::ofstream file;
  if (!cfg.out_path.empty()) {
    file.open(cfg.out_path);
    if (!file) throw ConfigError("cannot write output file '" + cfg.out_path + "'");
  }
  std::ostream& out = cfg.out_path.empty() ? std::cout : file;
  if (cfg.format == OutputFormat::Jsonl)
    write_jsonl(rep.table, out);
  else
    write_csv(rep.table, out);
  out.flush();

  const int code = rep.exit_code(f.allow_nonconverged);
  std::cerr << "qfric " << to_string(task) << ": " << rep.points << " points, " << rep.table.rows.size() << " rows, "
            << rep.nonconverged << " nonconverged, " << rep.domain_errors << " domain errors, config "
            << config_hash(cfg) << ", exit " << code << '\n';
  return code;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Casimir-Polder and quantum friction forces on an atom above a planar surface"};
  app.set_version_flag("--version", qfric::library_version());
  app.require_subcommand(1);
  Flags flags;
  const std::vector<std::pair<qfric::Task, std::string>> subs = {
      {qfric::Task::Cp, "Casimir-Polder force at each height"},
      {qfric::Task::Friction, "friction force on the (z, v) grid"},
      {qfric::Task::Spectrum, "dipole power spectrum tensor"},
      {qfric::Task::Correlation, "dipole correlation C(tau) from the spectrum"},
      {qfric::Task::CompareQrt, "exact vs QRT Casimir-Polder force over gamma_a"},
      {qfric::Task::Oracle, "discrete-bath oracle: correlation (static) or drag time series (moving)"},
      {qfric::Task::Sweep, "friction over v for several methods, with exponent fits"}};
  std::vector<std::pair<CLI::App*, qfric::Task>> cmds;
  for (const auto& [task, help] : subs) {
    auto* sub = app.add_subcommand(qfric::to_string(task), help);
    add_flags(sub, flags);
    cmds.emplace_back(sub, task);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : qfric::ExitConfig;
  }

  try {
    for (const auto& [sub, task] : cmds)
      if (sub->parsed()) return run(task, flags);
  } catch (const qfric::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return qfric::ExitConfig;
  } catch (const qfric::NonConvergence& e) {
    std::cerr << "non-convergence: " << e.what() << '\n';
    return qfric::ExitNonConverged;
  } catch (const std::exception& e) {
    std::cerr << "domain error: " << e.what() << '\n';
    return qfric::ExitDomain;
  }
  return qfric::ExitConfig;
}
