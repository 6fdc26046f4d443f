#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "phasecov/bosonic_channels.hpp"
#include "phasecov/pcgc_bounds.hpp"

namespace phasecov::cli {

inline constexpr const char* kVersion = "phasecov 0.1.0";

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 2,
  kExitNumerical = 3,
  kExitVerification = 4,
};

/// Largest oracle Hilbert-space dimension oracle-qfi accepts.
inline constexpr std::size_t kMaxOracleDimension = 4096;

/// Inclusive, evenly spaced grid written start:stop:count.
struct Grid {
  double start = 0.0;
  double stop = 0.0;
  int count = 0;

  std::vector<double> points() const;
  std::string str() const;
};

/// Throws DomainError on malformed text or count < 2.
Grid parse_grid(const std::string& text);

/// Accepts nps, ps, add-noise (case-insensitive; '_' and '-' interchangeable).
Scenario parse_scenario(const std::string& name);
std::string scenario_name(Scenario kind);

/// "%.12g"
std::string format_number(double value);

struct RunConfig {
  std::string subcommand;
  std::string scenario = "ps";
  std::optional<double> point;
  std::optional<Grid> grid;
  double nb = 0.0;
  std::optional<double> n;
  std::optional<double> m;
  std::optional<double> ns;
  std::optional<int> cutoff;
  std::optional<double> tol;
  std::string out;
  std::optional<int> fig;
  std::string suite;
  std::string probe = "tmsv";

  ScenarioId scenario_id() const;
  /// From (N, M) or (N_S, M); M defaults to 1. Throws DomainError when N and
  /// N_S disagree.
  ResourceBudget budget() const;
  /// Grid points, or the single --kappa/--gamma value. Every point must lie
  /// inside the scenario domain.
  std::vector<double> thetas() const;
};

struct CurveRow {
  double theta;
  ScenarioQfis values;
};

std::vector<CurveRow> compute_curve(const ScenarioId& scenario, std::span<const double> thetas,
                                    const ResourceBudget& budget);

/// Largest of tmsv - bound and classical - bound over the rows (negative when
/// every row is dominated).
double worst_dominance_violation(std::span<const CurveRow> rows);

/// `#` comment lines, then theta,bound_per_mode,tmsv_per_mode,classical_per_mode.
void write_curve_csv(std::ostream& os, std::span<const std::string> header,
                     std::span<const CurveRow> rows, double modes);

struct FigurePanel {
  std::string file;
  std::string caption;
  ScenarioId scenario;
  ResourceBudget budget;
};

/// Panels of figures 3, 4 and 5 (PS scenario, per-mode QFI versus kappa).
std::vector<FigurePanel> figure_panels(int fig);
Grid default_figure_grid();

struct CheckResult {
  std::string name;
  double deviation;
  double tol;
  bool pass() const { return deviation <= tol; }
};

const std::vector<std::string>& suite_names();
/// Runs a verification suite; `tol` replaces every check's own tolerance.
std::vector<CheckResult> run_suite(const std::string& suite, std::optional<double> tol);

/// Full command-line entry point; returns the process exit code.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace phasecov::cli
