#include "runner.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include <CLI11.hpp>

#include "phasecov/errors.hpp"
#include "phasecov/oracles.hpp"

namespace phasecov::cli {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) {
    return c == '-' ? '_' : static_cast<char>(std::tolower(c));
  });
  return s;
}

double parse_double(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    throw DomainError("cannot parse " + what + " from '" + text + "'");
  }
  if (used != text.size()) throw DomainError("cannot parse " + what + " from '" + text + "'");
  return value;
}

void check_theta(const ScenarioId& scenario, double theta) {
  if (scenario.kind == Scenario::add_noise) {
    if (!(theta > 0.0) || !std::isfinite(theta)) {
      throw DomainError("gamma must be > 0, got " + format_number(theta));
    }
  } else if (!(theta > 0.0 && theta < 1.0)) {
    throw DomainError("kappa must lie strictly inside (0,1), got " + format_number(theta));
  }
}

std::vector<std::string> config_header(const RunConfig& cfg, const ScenarioId& scenario,
                                       const ResourceBudget& budget) {
  std::vector<std::string> lines{
      kVersion,
      "subcommand=" + cfg.subcommand,
      "scenario=" + scenario_name(scenario.kind),
  };
  if (scenario.kind != Scenario::add_noise) lines.push_back("nb=" + format_number(scenario.background));
  lines.push_back("n=" + format_number(budget.photons()));
  lines.push_back("m=" + format_number(budget.modes()));
  lines.push_back("ns=" + format_number(budget.brightness()));
  return lines;
}

std::string classical_note(const ScenarioId& scenario) {
  return scenario.kind == Scenario::nps_loss
             ? "classical_per_mode=classical_ub (upper bound on classical probes, not achieved)"
             : "classical_per_mode=coherent";
}

struct OutputSink {
  std::ofstream file;
  std::ostream* stream = nullptr;

  OutputSink(const std::string& path, std::ostream& fallback) {
    if (path.empty() || path == "-") {
      stream = &fallback;
      return;
    }
    file.open(path, std::ios::binary);
    if (!file) throw DomainError("cannot open output file " + path);
    stream = &file;
  }
};

int cmd_curve(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const ScenarioId scenario = cfg.scenario_id();
  const ResourceBudget budget = cfg.budget();
  const std::vector<double> thetas = cfg.thetas();
  const std::vector<CurveRow> rows = compute_curve(scenario, thetas, budget);

  std::vector<std::string> header = config_header(cfg, scenario, budget);
  header.push_back(cfg.grid ? "grid=" + cfg.grid->str() : "theta=" + format_number(thetas.front()));
  header.push_back(classical_note(scenario));

  const double violation = worst_dominance_violation(rows);
  if (violation > 1e-9) {
    err << "dominance violated by " << format_number(violation) << "\n";
    return kExitVerification;
  }
  OutputSink sink(cfg.out, out);
  write_curve_csv(*sink.stream, header, rows, budget.modes());
  return kExitOk;
}

int cmd_figures(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const std::vector<int> figs = cfg.fig ? std::vector<int>{*cfg.fig} : std::vector<int>{3, 4, 5};
  const Grid grid = cfg.grid.value_or(default_figure_grid());
  const std::vector<double> thetas = grid.points();
  const std::filesystem::path dir = cfg.out.empty() ? "." : cfg.out;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DomainError("cannot create output directory " + dir.string());

  for (int fig : figs) {
    for (const FigurePanel& panel : figure_panels(fig)) {
      for (double t : thetas) check_theta(panel.scenario, t);
      const std::vector<CurveRow> rows = compute_curve(panel.scenario, thetas, panel.budget);
      const double violation = worst_dominance_violation(rows);
      if (violation > 1e-9) {
        err << panel.file << ": dominance violated by " << format_number(violation) << "\n";
        return kExitVerification;
      }
      std::vector<std::string> header = config_header(cfg, panel.scenario, panel.budget);
      header.push_back("figure=" + std::to_string(fig) + " " + panel.caption);
      header.push_back("grid=" + grid.str());
      header.push_back(classical_note(panel.scenario));
      const std::filesystem::path path = dir / panel.file;
      std::ofstream file(path, std::ios::binary);
      if (!file) throw DomainError("cannot open output file " + path.string());
      write_curve_csv(file, header, rows, panel.budget.modes());
      out << path.string() << "\n";
    }
  }
  return kExitOk;
}

int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto& names = suite_names();
  if (std::find(names.begin(), names.end(), cfg.suite) == names.end()) {
    err << "unknown suite '" << cfg.suite << "'; expected one of:";
    for (const auto& n : names) err << " " << n;
    err << "\n";
    return kExitUsage;
  }
  if (cfg.tol && !(*cfg.tol > 0.0)) throw DomainError("--tol must be > 0");
  const std::vector<CheckResult> results = run_suite(cfg.suite, cfg.tol);
  bool all = true;
  for (const CheckResult& r : results) {
    char line[256];
    std::snprintf(line, sizeof line, "%-34s max_dev=%-12.4e tol=%-10.2e %s", r.name.c_str(),
                  r.deviation, r.tol, r.pass() ? "PASS" : "FAIL");
    out << line << "\n";
    all = all && r.pass();
  }
  out << "suite " << cfg.suite << ": " << (all ? "PASS" : "FAIL") << "\n";
  return all ? kExitOk : kExitVerification;
}

struct OracleRequest {
  OracleProbe probe;
  double copies = 1.0;
  double modes = 1.0;
};

OracleRequest oracle_request(const RunConfig& cfg) {
  const std::string probe = lower(cfg.probe);
  if (probe.rfind("fock:", 0) == 0) {
    std::vector<int> photons;
    std::stringstream list(probe.substr(5));
    std::string item;
    while (std::getline(list, item, ',')) {
      const double v = parse_double(item, "photon number");
      if (v < 0 || v != std::floor(v)) throw DomainError("photon numbers must be nonnegative integers");
      photons.push_back(static_cast<int>(v));
    }
    if (photons.empty() || photons.size() > 2) throw DomainError("fock probes take 1 or 2 modes");
    if (cfg.m && *cfg.m != static_cast<double>(photons.size())) {
      throw DomainError("--m does not match the fock photon list");
    }
    return {fock_probe(photons), 1.0, static_cast<double>(photons.size())};
  }
  const double m = cfg.m.value_or(1.0);
  if (m != 1.0 && m != 2.0) throw DomainError("oracle runs need integer M <= 2");
  const double ns = cfg.budget().brightness();
  if (probe == "tmsv") return {tmsv_probe(ns, cfg.cutoff), m, m};
  if (probe == "coherent") return {coherent_probe(ns, cfg.cutoff), m, m};
  if (probe == "vacuum") return {vacuum_probe(), m, m};
  throw DomainError("unknown probe '" + cfg.probe + "'; expected tmsv, coherent, vacuum or fock:<n-list>");
}

int cmd_oracle_qfi(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const ScenarioId scenario = cfg.scenario_id();
  const std::vector<double> thetas = cfg.thetas();
  if (thetas.size() != 1) throw DomainError("oracle-qfi takes a single --kappa or --gamma value");
  const double theta = thetas.front();
  const OracleRequest req = oracle_request(cfg);
  const std::size_t dim = scenario_output_dimension(scenario, req.probe, thetas);
  if (dim > kMaxOracleDimension) {
    err << "oracle dimension " << dim << " exceeds " << kMaxOracleDimension
        << "; lower --ns or set --cutoff\n";
    return kExitUsage;
  }

  const QfiMatrix single = oracle_scenario_qfim(scenario, thetas, req.probe);
  const double oracle = req.copies * single(0, 0);
  const ResourceBudget budget(req.probe.photons * req.copies, req.modes);
  const double bound = qfim_upper_bound(scenario_cascade(scenario, thetas), budget)(0, 0);

  std::optional<double> reference;
  std::string reference_label;
  const std::string label = req.probe.label;
  if (label == "tmsv") {
    reference = closed_form(scenario, theta, budget).tmsv;
    reference_label = "tmsv";
  } else if (label == "coherent") {
    const ScenarioQfis cf = closed_form(scenario, theta, budget);
    reference = cf.classical;
    reference_label = cf.classical_label;
  } else if (label == "vacuum") {
    reference = closed_form(scenario, theta, ResourceBudget(0.0, req.modes)).tmsv;
    reference_label = "vacuum";
  }

  std::vector<std::string> header = config_header(cfg, scenario, budget);
  header.push_back("theta=" + format_number(theta));
  header.push_back("probe=" + cfg.probe);
  header.push_back("oracle_dimension=" + std::to_string(dim));
  header.push_back("copies=" + format_number(req.copies) + " (iid copies; QFI is additive)");

  OutputSink sink(cfg.out, out);
  std::ostream& os = *sink.stream;
  for (const std::string& line : header) os << "# " << line << "\n";
  os << "entry,oracle,closed_form,closed_form_label,rel_gap_closed_form,bound,rel_gap_bound\n";
  os << "K_00," << format_number(oracle) << ",";
  if (reference) {
    os << format_number(*reference) << "," << reference_label << ","
       << format_number((oracle - *reference) / std::max(std::abs(*reference), 1e-300));
  } else {
    os << ",,";
  }
  os << "," << format_number(bound) << ","
     << format_number((bound - oracle) / std::max(std::abs(bound), 1e-300)) << "\n";
  return kExitOk;
}

}  // namespace

std::vector<double> Grid::points() const {
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    out[static_cast<std::size_t>(i)] =
        i == count - 1 ? stop : start + (stop - start) * static_cast<double>(i) / (count - 1);
  }
  return out;
}

std::string Grid::str() const {
  return format_number(start) + ":" + format_number(stop) + ":" + std::to_string(count);
}

Grid parse_grid(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.size() != 3) throw DomainError("grid must be start:stop:count, got '" + text + "'");
  Grid g;
  g.start = parse_double(parts[0], "grid start");
  g.stop = parse_double(parts[1], "grid stop");
  const double count = parse_double(parts[2], "grid count");
  if (count != std::floor(count) || count < 2 || count > 1e6) {
    throw DomainError("grid count must be an integer >= 2");
  }
  g.count = static_cast<int>(count);
  if (!(g.stop > g.start)) throw DomainError("grid stop must exceed start");
  return g;
}

Scenario parse_scenario(const std::string& name) {
  const std::string s = lower(name);
  if (s == "nps" || s == "nps_loss") return Scenario::nps_loss;
  if (s == "ps" || s == "ps_loss") return Scenario::ps_loss;
  if (s == "add_noise" || s == "addnoise" || s == "additive_noise") return Scenario::add_noise;
  throw DomainError("unknown scenario '" + name + "'; expected nps, ps or add-noise");
}

std::string scenario_name(Scenario kind) {
  switch (kind) {
    case Scenario::nps_loss:
      return "nps";
    case Scenario::ps_loss:
      return "ps";
    case Scenario::add_noise:
      return "add-noise";
  }
  return "unknown";
}

std::string format_number(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

ScenarioId RunConfig::scenario_id() const {
  ScenarioId id;
  id.kind = parse_scenario(scenario);
  if (!(nb >= 0.0)) throw DomainError("--nb must be >= 0");
  id.background = id.kind == Scenario::add_noise ? 0.0 : nb;
  return id;
}

ResourceBudget RunConfig::budget() const {
  const double modes = m.value_or(1.0);
  if (n && ns) {
    if (std::abs(*n - *ns * modes) > 1e-12 * std::max(1.0, std::abs(*n))) {
      throw DomainError("--n and --ns disagree (N must equal N_S * M)");
    }
    return ResourceBudget(*n, modes);
  }
  if (ns) return ResourceBudget::from_brightness(*ns, modes);
  return ResourceBudget(n.value_or(0.0), modes);
}

std::vector<double> RunConfig::thetas() const {
  const ScenarioId id = scenario_id();
  if (point && grid) throw DomainError("give either a single parameter value or --grid, not both");
  if (!point && !grid) throw DomainError("a parameter value (--kappa/--gamma) or --grid is required");
  std::vector<double> out = grid ? grid->points() : std::vector<double>{*point};
  for (double t : out) check_theta(id, t);
  return out;
}

std::vector<CurveRow> compute_curve(const ScenarioId& scenario, std::span<const double> thetas,
                                    const ResourceBudget& budget) {
  std::vector<CurveRow> rows;
  rows.reserve(thetas.size());
  for (double t : thetas) rows.push_back({t, closed_form(scenario, t, budget)});
  return rows;
}

double worst_dominance_violation(std::span<const CurveRow> rows) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const CurveRow& r : rows) {
    worst = std::max({worst, r.values.tmsv - r.values.bound, r.values.classical - r.values.bound});
  }
  return worst;
}

void write_curve_csv(std::ostream& os, std::span<const std::string> header,
                     std::span<const CurveRow> rows, double modes) {
  for (const std::string& line : header) os << "# " << line << "\n";
  os << "theta,bound_per_mode,tmsv_per_mode,classical_per_mode\n";
  for (const CurveRow& r : rows) {
    os << format_number(r.theta) << "," << format_number(r.values.bound / modes) << ","
       << format_number(r.values.tmsv / modes) << "," << format_number(r.values.classical / modes)
       << "\n";
  }
}

std::vector<FigurePanel> figure_panels(int fig) {
  const ScenarioId ps{Scenario::ps_loss, 0.0, false};
  auto with_nb = [&](double nb) {
    ScenarioId id = ps;
    id.background = nb;
    return id;
  };
  std::vector<FigurePanel> out;
  switch (fig) {
    case 3:
      for (double nb : {0.05, 1.0, 5.0}) {
        out.push_back({"fig3_nb_" + format_number(nb) + ".csv", "N_B=" + format_number(nb) + " M=5 N=10",
                       with_nb(nb), ResourceBudget(10.0, 5.0)});
      }
      break;
    case 4:
      for (double n : {2.0, 5.0, 10.0}) {
        out.push_back({"fig4_n_" + format_number(n) + ".csv", "N=" + format_number(n) + " M=5 N_B=1",
                       with_nb(1.0), ResourceBudget(n, 5.0)});
      }
      break;
    case 5:
      for (double m : {1.0, 5.0, 10.0}) {
        out.push_back({"fig5_m_" + format_number(m) + ".csv", "M=" + format_number(m) + " N=5 N_B=0.5",
                       with_nb(0.5), ResourceBudget(5.0, m)});
      }
      break;
    default:
      throw DomainError("--fig must be 3, 4 or 5");
  }
  return out;
}

Grid default_figure_grid() { return {0.01, 0.99, 99}; }

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fisher-information bounds and Fock-space oracles for phase-covariant channel sensing",
               "phasecov"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  RunConfig cfg;
  std::string grid_text;
  double point = 0.0;
  double n = 0.0, m = 1.0, ns = 0.0, tol = 0.0;
  int cutoff = 0, fig = 0;

  auto add_scenario = [&](CLI::App* sub, bool required) {
    auto* opt = sub->add_option("--scenario", cfg.scenario, "nps | ps | add-noise");
    if (required) opt->required();
    auto* kappa = sub->add_option("--kappa", point, "transmittance kappa (loss scenarios)");
    auto* gamma = sub->add_option("--gamma", point, "noise level gamma (add-noise)");
    kappa->excludes(gamma);
    sub->add_option("--nb", cfg.nb, "background brightness N_B")->capture_default_str();
  };
  auto add_budget = [&](CLI::App* sub) {
    sub->add_option("--n", n, "total signal photons N");
    sub->add_option("--m", m, "number of signal modes M");
    sub->add_option("--ns", ns, "per-mode signal brightness N_S = N/M");
  };

  CLI::App* curve = app.add_subcommand("curve", "closed-form bound, TMSV and classical QFIs per mode");
  add_scenario(curve, true);
  add_budget(curve);
  curve->add_option("--grid", grid_text, "parameter grid start:stop:count");
  curve->add_option("--out", cfg.out, "output CSV path (default stdout)");

  CLI::App* verify = app.add_subcommand("verify", "run a verification suite");
  verify->add_option("suite,--suite", cfg.suite, "covariance | cascade | oracle | bounds | appendix | theorem1")
      ->required();
  verify->add_option("--tol", tol, "replace every check tolerance");

  CLI::App* oracle = app.add_subcommand("oracle-qfi", "Fock-space oracle QFI beside the closed forms");
  add_scenario(oracle, true);
  add_budget(oracle);
  oracle->add_option("--probe", cfg.probe, "tmsv | coherent | vacuum | fock:<n-list>")->capture_default_str();
  oracle->add_option("--cutoff", cutoff, "probe photon-number cutoff");
  oracle->add_option("--out", cfg.out, "output CSV path (default stdout)");

  CLI::App* figures = app.add_subcommand("figures", "CSV data for figures 3, 4 and 5");
  figures->add_option("--fig", fig, "figure number (3, 4 or 5; default all)");
  figures->add_option("--grid", grid_text, "kappa grid start:stop:count (default 0.01:0.99:99)");
  figures->add_option("--out", cfg.out, "output directory (default .)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    cfg.subcommand = sub->get_name();
    auto given = [&](const char* name) {
      const CLI::Option* opt = sub->get_option_no_throw(name);
      return opt != nullptr && opt->count() > 0;
    };
    if (given("--kappa") || given("--gamma")) {
      const bool is_gamma = given("--gamma");
      const bool add_noise = parse_scenario(cfg.scenario) == Scenario::add_noise;
      if (is_gamma != add_noise) {
        throw DomainError(add_noise ? "add-noise takes --gamma" : "loss scenarios take --kappa");
      }
      cfg.point = point;
    }
    if (given("--grid")) cfg.grid = parse_grid(grid_text);
    if (given("--n")) cfg.n = n;
    if (given("--m")) cfg.m = m;
    if (given("--ns")) cfg.ns = ns;
    if (given("--tol")) cfg.tol = tol;
    if (given("--cutoff")) {
      if (cutoff < 0) throw DomainError("--cutoff must be >= 0");
      cfg.cutoff = cutoff;
    }
    if (given("--fig")) cfg.fig = fig;

    if (sub == curve) return cmd_curve(cfg, out, err);
    if (sub == verify) return cmd_verify(cfg, out, err);
    if (sub == oracle) return cmd_oracle_qfi(cfg, out, err);
    return cmd_figures(cfg, out, err);
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DimensionMismatch& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const SupportExceedsN0& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const TruncationTooSevere& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace phasecov::cli
