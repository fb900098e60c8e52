#pragma once

// Task orchestration over the (z, v) grid and the tabular output shared by CSV and JSON lines.

#include "qfric/config.hpp"

#include <functional>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace qfric {

enum ExitCode : int { ExitOk = 0, ExitConfig = 2, ExitNonConverged = 3, ExitDomain = 4 };

using Cell = std::variant<std::monostate, double, long long, bool, std::string>;
using Row = std::vector<Cell>;

struct Table {
  std::string schema; // e.g. "qfric.friction/1"
  std::vector<std::string> columns;
  std::vector<Row> rows;

  /// Column index by name; throws std::out_of_range.
  std::size_t column(const std::string& name) const;
};

struct RunOptions {
  bool allow_nonconverged = false;
  unsigned threads = 1;
  /// Receives one line per grid point, in grid order, as soon as it and all earlier points finish.
  std::function<void(const std::string&)> on_summary;
};

struct RunReport {
  Table table;
  std::size_t points = 0, nonconverged = 0, domain_errors = 0, config_errors = 0;

  int exit_code(bool allow_nonconverged) const;
};

/// Runs `task` over the configured grid. Per-point failures become rows with status
/// "nonconverged", "domain-error" or "config-error"; configuration problems found before any
/// point runs throw ConfigError.
RunReport run(const RunConfig& config, Task task, const RunOptions& options = {});

/// Canonical text for a number: shortest round-trip form.
std::string format_number(double x);

void write_csv(const Table& table, std::ostream& out);
void write_jsonl(const Table& table, std::ostream& out);

} // namespace qfric
