#pragma once

// Identity suite: every operator statement is checked as a residual on a
// family of band-limited test states and collected into a Report.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cqop/geometry.hpp"
#include "cqop/grid.hpp"
#include "cqop/operators.hpp"

namespace cqop {

/// How a residual is judged.
///   ceiling: pass when residual <= tolerance
///   floor:   expected-fail counterexample, pass when residual >= tolerance
///   flag:    ceiling comparison that is reported but never counted as a failure
enum class CheckMode { ceiling, floor, flag };

[[nodiscard]] std::string_view to_string(CheckMode mode);

struct CheckResult {
  std::string id;
  std::string description;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  CheckMode mode = CheckMode::ceiling;
  std::string resolution;  // "N1xN2"
  double wall_ms = 0.0;
};

struct ChartDescriptor {
  SurfaceKind kind = SurfaceKind::sphere;
  double radius = 1.0;
  double axial_period = 1.0;
  double hbar = 1.0;
  double mass = 1.0;
  int n1 = 0;
  int n2 = 0;
  std::uint64_t seed = 0;
};

struct Report {
  ChartDescriptor chart;
  std::vector<CheckResult> checks;
  std::vector<std::string> notes;

  [[nodiscard]] int passed() const;
  /// Failed ceiling and floor checks; flagged checks never count.
  [[nodiscard]] int failed() const;
  [[nodiscard]] int flagged() const;
  [[nodiscard]] bool all_pass() const { return failed() == 0; }
  [[nodiscard]] const CheckResult* find(std::string_view id) const;
};

struct SuiteConfig {
  std::uint64_t seed = 7;
  int state_count = 16;
  /// check id -> tolerance; unknown ids are rejected by run_suite.
  std::map<std::string, double, std::less<>> tolerances;
  /// When non-empty, only these ids run (order still follows the registry).
  std::vector<std::string> only;
  /// Overrides the test-state band: (max first index, max second index).
  std::optional<std::pair<int, int>> family;
};

/// Registered check ids for a surface kind, in execution order.
[[nodiscard]] std::vector<std::string> registered_checks(SurfaceKind kind);
/// NaN for the bare-gradient counterexample, whose floor is hbar|M| of the chart.
[[nodiscard]] double default_tolerance(std::string_view id);

/// Analytic eigenvalues of every mode in the grid band, ascending.
[[nodiscard]] std::vector<double> analytic_band_spectrum(const Chart& chart, const Grid& g);

/// Throws Error(unsupported) for custom charts and Error(invalid_argument) for
/// unknown tolerance ids or non-positive tolerances.
[[nodiscard]] Report run_suite(const Chart& chart, const GridPtr& grid, const SuiteConfig& config = {});
/// Same, on an already assembled operator set.
[[nodiscard]] Report run_suite(const OperatorSet& ops, const SuiteConfig& config = {});

[[nodiscard]] std::string report_to_json(const Report& report);
/// Fixed-width table for humans.
[[nodiscard]] std::string report_to_text(const Report& report);

struct ConvergenceRow {
  int n1 = 0;
  int n2 = 0;
  std::vector<double> residuals;  // one per ConvergenceTable::ids
};

struct ConvergenceTable {
  std::vector<std::string> ids;
  std::vector<ConvergenceRow> rows;
  std::vector<bool> monotone;  // per id: never increases from one row to the next
  std::vector<bool> spectral;  // per id: each step shrinks 10x or ends at the floor
  double floor = 1e-12;
};

/// Runs the listed checks at each resolution with the test family fixed at the
/// coarsest grid's band. Needs at least two strictly increasing resolutions.
[[nodiscard]] ConvergenceTable convergence_study(const Chart& chart, const std::vector<std::pair<int, int>>& resolutions,
                                                 std::uint64_t seed, const std::vector<std::string>& ids);
[[nodiscard]] std::string convergence_to_json(const ConvergenceTable& table);

}  // namespace cqop
