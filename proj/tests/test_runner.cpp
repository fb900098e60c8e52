#include "doctest.h"

#include "qfric/errors.hpp"
#include "qfric/runner.hpp"

#include <set>
#include <sstream>

using namespace qfric;

namespace {

std::string csv(const RunReport& r) {
  std::ostringstream os;
  write_csv(r.table, os);
  return os.str();
}

bool has_unit_suffix(const std::string& name) {
  for (const char* s : {"_m", "_m_s", "_s", "_rad_s", "_N", "_C2m2", "_C2m2s", "_count", "_dimless"}) {
    const std::string suf(s);
    if (name.size() > suf.size() && name.compare(name.size() - suf.size(), suf.size(), suf) == 0) return true;
  }
  return false;
}

void check_units(const Table& t) {
  for (std::size_t i = 0; i < t.columns.size(); ++i)
    for (const auto& r : t.rows)
      if (std::holds_alternative<double>(r[i]) || std::holds_alternative<long long>(r[i])) {
        INFO(t.columns[i]);
        CHECK(has_unit_suffix(t.columns[i]));
        break;
      }
}

} // namespace

TEST_CASE("friction on the Rb/Si preset") {
  const auto rep = run(preset("rb-si-nearfield"), Task::Friction);
  REQUIRE(rep.table.rows.size() == 1);
  const auto& row = rep.table.rows[0];
  CHECK(std::get<double>(row[rep.table.column("force_N")]) == doctest::Approx(-1.3e-20).epsilon(0.05));
  CHECK(std::get<bool>(row[rep.table.column("converged")]));
  CHECK(std::get<std::string>(row[rep.table.column("method")]) == "nearfield_closed_form");
  CHECK(std::get<std::string>(row[rep.table.column("config_hash")]) == config_hash(preset("rb-si-nearfield")));
  CHECK(rep.exit_code(false) == ExitOk);
  check_units(rep.table);

  const auto text = csv(rep);
  CHECK(text.rfind("# schema: qfric.friction/1\nz_m,v_m_s,force_N,abs_error_N,", 0) == 0);

  std::ostringstream js;
  write_jsonl(rep.table, js);
  CHECK(js.str().find("\"force_N\":-1.33") != std::string::npos);
}

TEST_CASE("cp over vacuum and grid order") {
  auto c = preset("rb-si-nearfield");
  c.surface = SurfaceModel::vacuum();
  c.z = {3e-8, 1e-8, 2e-8};
  std::vector<std::string> lines;
  RunOptions opt;
  opt.threads = 3;
  opt.on_summary = [&](const std::string& s) { lines.push_back(s); };
  const auto rep = run(c, Task::Cp, opt);
  REQUIRE(rep.table.rows.size() == 3);
  REQUIRE(lines.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(std::get<double>(rep.table.rows[i][0]) == c.z[i]);
    CHECK(std::get<double>(rep.table.rows[i][1]) == 0.0);
    CHECK(lines[i].find("cp z_m=") == 0);
  }
}

TEST_CASE("output is deterministic across thread counts") {
  auto c = preset("rb-si-nearfield");
  c.v = {10.0, 20.0, 40.0, 80.0, 160.0, 320.0};
  c.sweep_methods = {FrictionMethod::ClosedForm, FrictionMethod::LowVelocity};
  RunOptions one, many;
  many.threads = 4;
  const auto a = run(c, Task::Sweep, one), b = run(c, Task::Sweep, many);
  CHECK(csv(a) == csv(b));
  check_units(a.table);
  // Two fit rows, exponent 3 exactly for both closed forms.
  const auto cx = a.table.column("exponent_dimless");
  int fits = 0;
  for (const auto& r : a.table.rows)
    if (std::get<std::string>(r[0]) == "fit") {
      ++fits;
      CHECK(std::get<double>(r[cx]) == doctest::Approx(3.0).epsilon(1e-9));
    }
  CHECK(fits == 2);
}

TEST_CASE("compare-qrt deviation grows with gamma_a") {
  const auto rep = run(preset("drude-toy"), Task::CompareQrt);
  REQUIRE(rep.table.rows.size() == 3);
  const auto cd = rep.table.column("deviation_dimless");
  const double d0 = std::get<double>(rep.table.rows[0][cd]), d1 = std::get<double>(rep.table.rows[1][cd]),
               d2 = std::get<double>(rep.table.rows[2][cd]);
  CHECK(d0 < d1);
  CHECK(d1 < d2);
  check_units(rep.table);
}

TEST_CASE("per-point failures and exit codes") {
  auto c = preset("rb-si-nearfield");
  c.friction_method = FrictionMethod::Qrt; // oscillator atom: domain error on each point
  const auto rep = run(c, Task::Friction);
  CHECK(rep.domain_errors == 1);
  CHECK(rep.exit_code(true) == ExitDomain);
  const auto& row = rep.table.rows.at(0);
  CHECK(std::get<std::string>(row[rep.table.column("status")]) == "domain-error");
  CHECK(std::holds_alternative<std::monostate>(row[rep.table.column("force_N")]));

  RunReport r;
  r.nonconverged = 1;
  CHECK(r.exit_code(false) == ExitNonConverged);
  CHECK(r.exit_code(true) == ExitOk);

  auto bad = preset("rb-si-nearfield");
  bad.task = Task::Cp;
  CHECK_THROWS_AS(run(bad, Task::Friction), ConfigError);
  CHECK_THROWS_AS(run(preset("rb-si-nearfield"), Task::Oracle), ConfigError); // isotropic atom
  auto neg = preset("rb-si-nearfield");
  neg.surface = SurfaceModel::ohmic(-1.0);
  CHECK_THROWS_AS(run(neg, Task::Friction), DomainError);
}

TEST_CASE("spectrum and correlation tables") {
  auto c = preset("ohmic-toy");
  c.omegas = {5e14, 1e15};
  c.taus = {0.0, 1e-15};
  c.v = {0.0};
  const auto s = run(c, Task::Spectrum);
  CHECK(s.table.rows.size() == 2);
  CHECK(std::get<double>(s.table.rows[0][s.table.column("S_xx_C2m2s")]) > 0.0);
  check_units(s.table);
  const auto k = run(c, Task::Correlation);
  CHECK(k.table.rows.size() == 2);
  CHECK(std::get<double>(k.table.rows[0][k.table.column("C_xx_im_C2m2")]) == doctest::Approx(0.0));
  check_units(k.table);
}

TEST_CASE("oracle time series") {
  auto c = preset("ohmic-toy");
  c.oracle_modes = {128};
  const auto rep = run(c, Task::Oracle);
  check_units(rep.table);
  const auto& last = rep.table.rows.back();
  CHECK(std::get<std::string>(last[0]) == "plateau");
  CHECK(std::get<double>(last[rep.table.column("force_N")]) < 0.0);
  CHECK(rep.table.rows.size() > 20);

  c.oracle_mode = OracleMode::Static;
  c.oracle_times = {0.0, 1e-15, 2e-15};
  const auto st = run(c, Task::Oracle);
  CHECK(st.table.rows.size() == 3);
  CHECK(st.exit_code(false) == ExitOk);
}

TEST_CASE("number formatting round-trips") {
  for (double x : {1e-8, 340.0, -1.3314880803326005e-20, 0.1, 5.26e-39}) CHECK(std::stod(format_number(x)) == x);
  CHECK(format_number(1e6) == "1e+06");
  CHECK(format_number(340.0) == "340");
}
