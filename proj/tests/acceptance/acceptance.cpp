// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 iff all pass.

#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "phasecov/bosonic_channels.hpp"
#include "phasecov/errors.hpp"
#include "phasecov/nds_probes.hpp"
#include "phasecov/oracles.hpp"
#include "phasecov/pcgc_bounds.hpp"
#include "phasecov/qfi_engine.hpp"
#include "runner.hpp"
#include "test_support.hpp"

using namespace phasecov;

namespace {

constexpr unsigned kSeed = 20240917;

struct Outcome {
  bool pass;
  std::string detail;
};

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* format, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

double rel_gap(double value, double reference) { return std::abs(value - reference) / std::abs(reference); }

bool close_scaled(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

Outcome ac1() {
  const Timer timer;
  const ScenarioId id{Scenario::ps_loss, 0.2, false};
  const double theta[] = {0.6};
  const double oracle = oracle_scenario_qfim(id, theta, tmsv_probe(0.3))(0, 0);
  const double exact = closed_form_ps(0.6, 0.2, ResourceBudget(0.3, 1.0)).tmsv;
  const double gap = rel_gap(oracle, exact);
  const double t = timer.seconds();
  return {gap < 1e-6 && t < 30.0,
          fmt("oracle=%.12g closed_form=%.12g rel_gap=%.3g (tol 1e-6) time=%.2fs (limit 30s)", oracle, exact, gap, t)};
}

Outcome ac2() {
  const Timer timer;
  const ScenarioId id{Scenario::add_noise, 0.0, false};
  const double theta[] = {0.7};
  const double oracle = oracle_scenario_qfim(id, theta, tmsv_probe(0.4))(0, 0);
  const double exact = closed_form_addnoise(0.7, ResourceBudget(0.4, 1.0)).tmsv;
  const double gap = rel_gap(oracle, exact);
  const double t = timer.seconds();
  return {gap < 1e-6 && t < 30.0,
          fmt("oracle=%.12g closed_form=%.12g rel_gap=%.3g (tol 1e-6) time=%.2fs (limit 30s)", oracle, exact, gap, t)};
}

// 10 parameter values x 3 backgrounds x 3 budgets per scenario. The M = 1
// budget is small enough for the Fock oracle at every grid point.
Outcome ac3() {
  const Timer timer;
  const std::vector<double> backgrounds = {0.05, 0.5, 1.0};
  const std::vector<std::pair<double, double>> budgets = {{0.2, 1.0}, {10.0, 5.0}, {5.0, 10.0}};
  double worst_slack = -1e300;
  double worst_psd = 1e300;
  int closed_points = 0;
  int oracle_points = 0;
  bool psd_ok = true;
  for (Scenario kind : {Scenario::nps_loss, Scenario::ps_loss, Scenario::add_noise}) {
    for (double nb : backgrounds) {
      const ScenarioId id{kind, nb, false};
      for (int i = 0; i < 10; ++i) {
        const double theta = kind == Scenario::add_noise ? 0.2 * (i + 1) : 0.05 + 0.1 * i;
        for (const auto& [n, m] : budgets) {
          const ScenarioQfis q = closed_form(id, theta, ResourceBudget(n, m));
          worst_slack = std::max({worst_slack, q.tmsv - q.bound, q.classical - q.bound});
          ++closed_points;
          if (m != 1.0 || (kind == Scenario::add_noise && nb != backgrounds.front())) continue;
          const double th[] = {theta};
          const QfiMatrix bound = qfim_upper_bound(scenario_cascade(id, th), ResourceBudget(n, m));
          for (const OracleProbe& probe : {tmsv_probe(n), coherent_probe(n)}) {
            const QfiMatrix oracle = oracle_scenario_qfim(id, th, probe);
            const Eigen::MatrixXd diff = bound.entries() - oracle.entries();
            worst_psd = std::min(worst_psd, Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(diff).eigenvalues().minCoeff());
            psd_ok = psd_ok && psd_order(bound.entries(), oracle.entries(), 1e-6);
            ++oracle_points;
          }
        }
      }
    }
  }
  const double t = timer.seconds();
  return {worst_slack <= 1e-9 && psd_ok && t < 300.0,
          fmt("closed-form points=%d max(tmsv-bound, classical-bound)=%.3g (tol 1e-9); oracle points=%d "
              "min eig(bound-oracle)=%.3g (tol -1e-6); time=%.1fs (limit 300s)",
              closed_points, worst_slack, oracle_points, worst_psd, t)};
}

Outcome ac4() {
  double a = 0.0;
  for (double kappa : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    for (const auto& [n, m] : std::vector<std::pair<double, double>>{{1.0, 1.0}, {10.0, 5.0}, {50.0, 2.0}}) {
      const ScenarioQfis q = closed_form_ps(kappa, 0.0, ResourceBudget(n, m));
      const double exact = n / (kappa * (1.0 - kappa));
      a = std::max({a, std::abs(q.tmsv - exact) / std::max(1.0, exact), std::abs(q.bound - exact) / std::max(1.0, exact)});
    }
  }
  double b = 0.0;
  for (double kappa : {0.1, 0.5, 0.9}) {
    for (double nb : {0.1, 1.0, 5.0}) {
      const ScenarioQfis q = closed_form_nps(kappa, nb, ResourceBudget::from_brightness(1e-3, 5.0));
      b = std::max(b, (q.bound - q.tmsv) / q.bound);
    }
  }
  double c = 0.0;
  double d = 0.0;
  for (double gamma : {0.2, 0.7, 1.0, 3.0}) {
    for (double m : {1.0, 2.0, 10.0}) {
      const ScenarioQfis vac = closed_form_addnoise(gamma, ResourceBudget(0.0, m));
      const double exact = m / (gamma * (gamma + 1.0));
      c = std::max({c, std::abs(vac.tmsv - exact) / std::max(1.0, exact),
                    std::abs(vac.classical - exact) / std::max(1.0, exact)});
      const ScenarioQfis bright = closed_form_addnoise(gamma, ResourceBudget::from_brightness(1e3, m));
      d = std::max(d, rel_gap(bright.tmsv, m / (gamma * gamma)));
    }
  }
  return {a <= 1e-12 && b < 0.01 && c <= 1e-12 && d < 0.005,
          fmt("(a) PS N_B=0 |tmsv,bound - N/(k(1-k))|=%.3g (tol 1e-12) (b) NPS N_S=1e-3 rel gap=%.3g (tol 1e-2) "
              "(c) add-noise N=0 |tmsv,classical - M/(g(g+1))|=%.3g (tol 1e-12) (d) N_S=1e3 rel gap to M/g^2=%.3g (tol 5e-3)",
              a, b, c, d)};
}

PhotonDistribution random_distribution(std::mt19937_64& rng, int modes, int cutoff) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  PhotonDistribution d;
  const FockTruncation t = FockTruncation::uniform(static_cast<std::size_t>(modes), cutoff);
  double total = 0.0;
  for (std::size_t i = 0; i < t.dimension(); ++i) {
    if (unit(rng) < 0.25) continue;
    const double w = unit(rng);
    d[t.occupation_of(i)] = w;
    total += w;
  }
  if (d.empty()) d[Occupation(static_cast<std::size_t>(modes), 0)] = total = 1.0;
  for (auto& entry : d) entry.second /= total;
  return d;
}

Outcome ac5() {
  const int c = geometric_cutoff(2.0 / 3.0);
  const double anchor = 1.0 / (std::sqrt(6.0) - std::sqrt(2.0));
  const double thermal = uhlmann_fidelity(thermal_state(1.0, c), thermal_state(2.0, c));
  const PhotonDistribution vac{{{0}, 1.0}};
  const double formula = amp_output_fidelity(vac, vac, 2.0, 3.0, 1);
  double worst = std::max(std::abs(thermal - anchor), std::abs(formula - anchor));

  std::mt19937_64 rng(kSeed);
  std::uniform_real_distribution<double> gain(1.0, 1.6);
  int tuples = 0;
  for (int trial = 0; trial < 24; ++trial) {
    const int modes = trial % 2 == 0 ? 1 : 2;
    const int cutoff = modes == 1 ? 3 : 1;
    const PhotonDistribution r = random_distribution(rng, modes, cutoff);
    const PhotonDistribution s = random_distribution(rng, modes, cutoff);
    const double g = trial % 6 == 0 ? 1.0 : gain(rng);
    const double gp = gain(rng);
    const double closed = amp_output_fidelity(r, s, g, gp, modes);
    const double brute = amp_output_fidelity_bruteforce(r, s, g, gp, modes, 1e-12);
    worst = std::max(worst, std::abs(closed - brute));
    ++tuples;
  }
  return {worst <= 1e-8, fmt("thermal anchor F=%.12g vs 1/(sqrt6-sqrt2)=%.12g; %d random tuples (M=1,2); max |closed-brute|=%.3g (tol 1e-8)",
                             thermal, anchor, tuples, worst)};
}

Outcome ac6() {
  std::mt19937_64 rng(kSeed + 6);
  const double kappa[] = {0.6};
  const double gamma[] = {0.7};
  const ScenarioId ps{Scenario::ps_loss, 0.2, false};
  const ScenarioId add{Scenario::add_noise, 0.0, false};
  double shortfall = -1e300;
  double off_diagonal = 0.0;
  double min_coherence = 1e300;
  int probes = 0;
  while (probes < 10) {
    const StateVector psi = fixtures::random_pure(rng, FockTruncation({1, 3}));
    const std::size_t signal[] = {1};
    CMatrix reduced = partial_trace(DensityOperator::from_state(psi), signal).matrix();
    reduced.diagonal().setZero();
    const double coherence = linalg::trace_norm(reduced);
    if (coherence < 1e-3) continue;  // already NDS
    min_coherence = std::min(min_coherence, coherence);
    const StateVector aug = augment_probe(psi, 1, 3);
    const OracleProbe original = custom_probe(DensityOperator::from_state(psi), {1});
    const OracleProbe augmented = custom_probe(DensityOperator::from_state(aug), {2});
    for (const auto& [id, theta] : {std::pair{ps, std::span<const double>(kappa)}, std::pair{add, std::span<const double>(gamma)}}) {
      shortfall = std::max(shortfall, oracle_scenario_qfim(id, theta, original)(0, 0) -
                                          oracle_scenario_qfim(id, theta, augmented)(0, 0));
    }
    const std::size_t aug_signal[] = {2};
    CMatrix aug_reduced = partial_trace(DensityOperator::from_state(aug), aug_signal).matrix();
    aug_reduced.diagonal().setZero();
    off_diagonal = std::max(off_diagonal, linalg::trace_norm(aug_reduced));
    ++probes;
  }
  return {shortfall <= 1e-8 && off_diagonal <= 1e-12,
          fmt("%d non-NDS probes (min input coherence %.3g), PS and add-noise: max QFI(original)-QFI(augmented)=%.3g "
              "(tol 1e-8); max off-diagonal trace norm=%.3g (tol 1e-12)",
              probes, min_coherence, shortfall, off_diagonal)};
}

Outcome ac7() {
  const std::vector<ProbeSpec> specs = {
      ProbeSpec({{{1}, 1.0}}, 1),
      ProbeSpec({{{0}, 0.5}, {{3}, 0.5}}, 1),
      ProbeSpec::iid_geometric(0.3, 1),
      ProbeSpec::iid_geometric(0.2, 2),
      ProbeSpec({{{0, 1}, 0.2}, {{1, 2}, 0.5}, {{2, 0}, 0.3}}, 2),
      ProbeSpec::iid_geometric(1.0, 1),
  };
  double worst = 0.0;
  int points = 0;
  for (const ProbeSpec& spec : specs) {
    for (double eta : {0.25, 0.6, 0.9}) {
      const DistributionFamily family = [&spec](std::span<const double> t) {
        std::vector<double> p;
        for (const auto& entry : joint_loss_residual_dist(spec, t[0])) p.push_back(entry.second);
        return p;
      };
      const double theta[] = {eta};
      const double expected = spec.mean_photons() / (eta * (1.0 - eta));
      worst = std::max(worst, std::abs(classical_fim(family, theta)(0, 0) - expected));
      ++points;
    }
  }
  return {worst <= 1e-6, fmt("%zu NDS specs x 3 eta (%d points): max |FIM - N/(eta(1-eta))|=%.3g (tol 1e-6)",
                             specs.size(), points, worst)};
}

Outcome ac8() {
  std::mt19937_64 rng(kSeed + 8);
  const FockTruncation t = FockTruncation::single(4);
  std::vector<DensityOperator> samples;
  for (int i = 0; i < 10; ++i) samples.push_back(fixtures::random_density(rng, t));
  const double kappa[] = {0.35};
  const double gamma[] = {0.8};
  double worst = 0.0;
  worst = std::max(worst, check_phase_covariance(scenario_channel({Scenario::nps_loss, 1.0, false}, kappa, t), samples));
  worst = std::max(worst, check_phase_covariance(scenario_channel({Scenario::ps_loss, 1.0, false}, kappa, t), samples));
  worst = std::max(worst, check_phase_covariance(scenario_channel({Scenario::add_noise, 0.0, false}, gamma, t), samples));
  worst = std::max(worst, check_phase_covariance(attenuator_kraus(0.7, t), samples));
  const double displacement = check_phase_covariance(fixtures::displacement_fixture(0.5, 4, 30), samples);
  return {worst < 1e-9 && displacement >= 0.1,
          fmt("max deviation over NPS, PS, add-noise cascades and attenuator on 10 random states=%.3g (tol 1e-9); "
              "displacement deviation=%.3g (must be >= 0.1)",
              worst, displacement)};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::vector<double>> csv_rows(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

int run_figures(const std::filesystem::path& dir) {
  std::vector<std::string> args = {"phasecov", "figures", "--out", dir.string()};
  std::vector<char*> argv;
  for (std::string& a : args) argv.push_back(a.data());
  std::ostringstream out;
  std::ostringstream err;
  return cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

double value_at(const std::vector<std::vector<double>>& rows, double theta, std::size_t column) {
  for (const auto& row : rows) {
    if (std::abs(row[0] - theta) < 1e-12) return row[column];
  }
  return std::nan("");
}

Outcome ac9() {
  const auto base = std::filesystem::temp_directory_path() / ("phasecov_acceptance_" + std::to_string(::getpid()));
  std::filesystem::remove_all(base);
  std::filesystem::create_directories(base / "a");
  std::filesystem::create_directories(base / "b");
  const int code_a = run_figures(base / "a");
  const int code_b = run_figures(base / "b");

  int files = 0;
  bool identical = true;
  double worst_slack = -1e300;
  for (int fig : {3, 4, 5}) {
    for (const cli::FigurePanel& panel : cli::figure_panels(fig)) {
      const std::string a = slurp(base / "a" / panel.file);
      identical = identical && !a.empty() && a == slurp(base / "b" / panel.file);
      for (const auto& row : csv_rows(a)) worst_slack = std::max({worst_slack, row[2] - row[1], row[3] - row[1]});
      ++files;
    }
  }
  // Hand-derived PS anchors at kappa = 0.5.
  const auto fig3 = csv_rows(slurp(base / "a" / "fig3_nb_1.csv"));
  const auto fig4 = csv_rows(slurp(base / "a" / "fig4_n_10.csv"));
  const auto fig5 = csv_rows(slurp(base / "a" / "fig5_m_1.csv"));
  struct Anchor {
    double got;
    double want;
  };
  const std::vector<Anchor> anchors = {
      {value_at(fig3, 0.5, 1), 46.6666666667 / 5.0},  // N=10, M=5, N_B=1
      {value_at(fig3, 0.5, 2), 28.8888888889 / 5.0},
      {value_at(fig4, 0.5, 1), 46.6666666667 / 5.0},
      {value_at(fig5, 0.5, 1), 21.6},  // N=5, M=1, N_B=0.5: 5*0.96^2/0.24 + 3*0.25/(1.25*0.25)
  };
  double anchor_err = 0.0;
  for (const Anchor& a : anchors) anchor_err = std::max(anchor_err, std::isnan(a.got) ? 1.0 : std::abs(a.got - a.want));
  std::filesystem::remove_all(base);
  return {code_a == 0 && code_b == 0 && files == 9 && identical && worst_slack <= 1e-9 && anchor_err <= 1e-9,
          fmt("exit codes %d/%d; %d CSVs byte-identical=%s; max(tmsv,classical - bound)=%.3g (tol 1e-9); "
              "max anchor error=%.3g (tol 1e-9)",
              code_a, code_b, files, identical ? "yes" : "no", worst_slack, anchor_err)};
}

Outcome ac10() {
  const ResourceBudget budget(10.0, 5.0);
  const double theta2[] = {0.5, 1.0};
  const double theta1[] = {0.5};
  const QfiMatrix k = qfim_upper_bound(scenario_cascade({Scenario::ps_loss, 0.0, true}, theta2), budget);
  Eigen::Matrix2d expected;
  expected << 46.6667, -10.0, -10.0, 3.33333;
  const double matrix_err = (k.entries() - expected).cwiseAbs().maxCoeff();
  const double scalar = qfim_upper_bound(scenario_cascade({Scenario::ps_loss, 1.0, false}, theta1), budget)(0, 0);
  const double scalar_err = std::abs(k(0, 0) - scalar);
  return {matrix_err <= 1e-4 && close_scaled(k(0, 0), scalar, 1e-12),
          fmt("K=[[%.9g, %.9g], [%.9g, %.9g]] max abs error=%.3g (tol 1e-4); |K11 - scalar|=%.3g (tol 1e-12 rel)",
              k(0, 0), k(0, 1), k(1, 0), k(1, 1), matrix_err, scalar_err)};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3}, {"AC4", ac4}, {"AC5", ac5},
      {"AC6", ac6}, {"AC7", ac7}, {"AC8", ac8}, {"AC9", ac9}, {"AC10", ac10},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%-4s %s  %s\n", c.name, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(std::size(criteria)) - failures, std::size(criteria));
  return failures == 0 ? 0 : 1;
}
