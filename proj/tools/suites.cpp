#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>

#include "phasecov/errors.hpp"
#include "phasecov/linalg.hpp"
#include "phasecov/nds_probes.hpp"
#include "phasecov/oracles.hpp"
#include "runner.hpp"

namespace phasecov::cli {

namespace {

constexpr std::uint64_t kSeed = 0x5eed2024ULL;
// Amplifier truncation for moment checks: the discarded tail carries many
// photons, so the default 1e-10 would shift means by ~1e-9.
constexpr double kMomentTailTol = 1e-14;

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1.0); }

DensityOperator random_state(std::mt19937_64& rng, int cutoff) {
  std::normal_distribution<double> gauss;
  const Eigen::Index d = cutoff + 1;
  CMatrix g(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) g(i, j) = Complex(gauss(rng), gauss(rng));
  }
  CMatrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  linalg::symmetrize(rho);
  return DensityOperator(FockTruncation::single(cutoff), std::move(rho));
}

KrausChannel scenario_kraus(Scenario kind, double theta, double nb, int cutoff,
                            double tail_tol = kAmplifierTailTolerance) {
  const double t[] = {theta};
  return scenario_channel(ScenarioId{kind, nb, false}, t, FockTruncation::single(cutoff), tail_tol);
}

std::vector<CheckResult> covariance_suite() {
  std::mt19937_64 rng(kSeed);
  std::vector<DensityOperator> samples;
  for (int i = 0; i < 10; ++i) samples.push_back(random_state(rng, 4));
  const std::vector<std::pair<std::string, KrausChannel>> channels = {
      {"attenuator_0.7", attenuator_kraus(0.7, FockTruncation::single(4))},
      {"ps_cascade", scenario_kraus(Scenario::ps_loss, 0.6, 0.2, 4)},
      {"nps_cascade", scenario_kraus(Scenario::nps_loss, 0.6, 1.0, 4)},
      {"addnoise_cascade", scenario_kraus(Scenario::add_noise, 0.7, 0.0, 4)},
  };
  std::vector<CheckResult> out;
  double defect = 0.0;
  for (const auto& [name, channel] : channels) {
    out.push_back({"covariance_" + name, check_phase_covariance(channel, samples), 1e-9});
    defect = std::max(defect, channel.completeness_defect());
  }
  out.push_back({"completeness_defect", defect, 1e-9});
  return out;
}

std::vector<CheckResult> cascade_suite() {
  std::vector<CheckResult> out;
  const double kappa = 0.6, nb = 0.2, alpha = 0.5;
  const DensityOperator coherent = DensityOperator::from_state(coherent_state(alpha));
  const int c = coherent.truncation().cutoff(0);
  const DensityOperator ps_out =
      apply(scenario_kraus(Scenario::ps_loss, kappa, nb, c, kMomentTailTol), coherent);
  out.push_back({"ps_coherent_mean_amplitude",
                 std::abs(mean_amplitude(ps_out, 0) - std::sqrt(kappa) * alpha), 1e-9});
  out.push_back({"ps_coherent_mean_photons",
                 std::abs(mean_photon_number(ps_out, 0) - (kappa * alpha * alpha + (1 - kappa) * nb)),
                 1e-9});

  const DensityOperator vac = DensityOperator::from_state(coherent_state(0.0));
  const DensityOperator ps_vac = apply(scenario_kraus(Scenario::ps_loss, kappa, nb, 0, kMomentTailTol), vac);
  out.push_back({"ps_vacuum_mean_photons", std::abs(mean_photon_number(ps_vac, 0) - (1 - kappa) * nb),
                 1e-9});

  double nps_worst = 0.0;
  for (int i = 1; i <= 9; ++i) {
    const DensityOperator o =
        apply(scenario_kraus(Scenario::nps_loss, 0.1 * i, 1.0, 0, kMomentTailTol), vac);
    nps_worst = std::max(nps_worst, std::abs(mean_photon_number(o, 0) - 1.0));
  }
  out.push_back({"nps_vacuum_no_passive_signature", nps_worst, 1e-9});

  const double gamma = 0.7;
  const DensityOperator add_out =
      apply(scenario_kraus(Scenario::add_noise, gamma, 0.0, c, kMomentTailTol), coherent);
  out.push_back({"addnoise_mean_amplitude", std::abs(mean_amplitude(add_out, 0) - alpha), 1e-9});
  out.push_back({"addnoise_mean_photons",
                 std::abs(mean_photon_number(add_out, 0) - (alpha * alpha + gamma)), 1e-9});
  return out;
}

std::vector<CheckResult> oracle_suite() {
  std::vector<CheckResult> out;
  const ScenarioId ps{Scenario::ps_loss, 0.2, false};
  const double kappa[] = {0.6};
  const OracleProbe tmsv = tmsv_probe(0.3);
  const double oracle = oracle_scenario_qfim(ps, kappa, tmsv)(0, 0);
  const ScenarioQfis cf = closed_form_ps(0.6, 0.2, ResourceBudget(0.3, 1.0));
  out.push_back({"ps_tmsv_oracle_vs_closed_form", rel(oracle, cf.tmsv), 1e-6});
  out.push_back({"ps_tmsv_bound_minus_oracle", std::max(0.0, oracle - cf.bound), 1e-6});

  const double via_fidelity = qfi_from_fidelity(scenario_family(ps, tmsv, kappa), kappa)(0, 0);
  out.push_back({"sld_vs_fidelity_route", rel(via_fidelity, oracle), 1e-4});

  const ScenarioId add{Scenario::add_noise, 0.0, false};
  const double gamma[] = {0.8};
  const double vac = oracle_scenario_qfim(add, gamma, vacuum_probe())(0, 0);
  out.push_back({"addnoise_vacuum_vs_photon_counting", rel(vac, 1.0 / (0.8 * 1.8)), 1e-6});

  const double coh = oracle_scenario_qfim(ps, kappa, coherent_probe(0.3))(0, 0);
  const ScenarioQfis cf_coh = closed_form_ps(0.6, 0.2, ResourceBudget(0.3, 1.0));
  out.push_back({"ps_coherent_oracle_vs_closed_form", rel(coh, cf_coh.classical), 1e-6});
  return out;
}

std::vector<CheckResult> bounds_suite() {
  std::vector<CheckResult> out;
  double dominance = -1.0;
  for (double nb : {0.05, 0.5, 1.0, 5.0}) {
    for (double n : {0.2, 2.0, 10.0}) {
      for (double m : {1.0, 2.0, 5.0}) {
        const ResourceBudget b(n, m);
        for (int i = 1; i <= 19; ++i) {
          const double k = 0.05 * i;
          for (const ScenarioQfis& q : {closed_form_nps(k, nb, b), closed_form_ps(k, nb, b)}) {
            dominance = std::max({dominance, q.tmsv - q.bound, q.classical - q.bound});
          }
          const ScenarioQfis a = closed_form_addnoise(0.1 * i, b);
          dominance = std::max({dominance, a.tmsv - a.bound, a.classical - a.bound});
        }
      }
    }
  }
  out.push_back({"closed_form_dominance", std::max(dominance, 0.0), 1e-9});

  double split = 0.0, scalar = 0.0, derivative = 0.0;
  for (Scenario kind : {Scenario::nps_loss, Scenario::ps_loss, Scenario::add_noise}) {
    for (double t : {0.2, 0.5, 0.8}) {
      const ScenarioId id{kind, 0.7, false};
      const double th[] = {t};
      const CascadeParams p = scenario_cascade(id, th);
      const ResourceBudget b(3.0, 2.0);
      const BoundSplit s = pp_pm_split(p);
      const Eigen::MatrixXd k = qfim_upper_bound(p, b).entries();
      split = std::max(split, (k - (s.per_photon.entries() * 3.0 + s.per_mode.entries() * 2.0))
                                  .cwiseAbs()
                                  .maxCoeff());

      auto eta = [id](std::span<const double> x) { return scenario_cascade(id, x).eta; };
      auto gain = [id](std::span<const double> x) { return scenario_cascade(id, x).gain; };
      const CascadeParams fd = finite_difference_cascade(eta, gain, th);
      derivative = std::max({derivative, rel(fd.d_eta(0), p.d_eta(0)), rel(fd.d_gain(0), p.d_gain(0))});

      if (kind != Scenario::add_noise) {
        const ScenarioId id2{kind, 0.7, true};
        const double th2[] = {t, 0.7};
        const double k2 = qfim_upper_bound(scenario_cascade(id2, th2), b)(0, 0);
        scalar = std::max(scalar, rel(k2, k(0, 0)));
      }
    }
  }
  out.push_back({"split_consistency", split, 1e-12});
  out.push_back({"scalar_matrix_consistency", scalar, 1e-12});
  out.push_back({"cascade_derivatives_vs_fd", derivative, 1e-8});

  const ScenarioId ps2{Scenario::ps_loss, 0.0, true};
  const double th[] = {0.5, 1.0};
  const Eigen::MatrixXd k = qfim_upper_bound(scenario_cascade(ps2, th), ResourceBudget(10.0, 5.0)).entries();
  Eigen::Matrix2d anchor;
  anchor << 46.6667, -10.0, -10.0, 3.33333;
  out.push_back({"ps_k2_anchor", (k - anchor).cwiseAbs().maxCoeff(), 1e-4});
  return out;
}

std::vector<CheckResult> appendix_suite() {
  std::vector<CheckResult> out;
  const int c = geometric_cutoff(2.0 / 3.0);
  const double thermal = uhlmann_fidelity(thermal_state(1.0, c), thermal_state(2.0, c));
  const double anchor = 1.0 / (std::sqrt(6.0) - std::sqrt(2.0));
  out.push_back({"thermal_fidelity_anchor", std::abs(thermal - anchor), 1e-8});
  const PhotonDistribution vac{{{0}, 1.0}};
  out.push_back({"amp_fidelity_vacuum_anchor", std::abs(amp_output_fidelity(vac, vac, 2.0, 3.0, 1) - anchor),
                 1e-8});

  std::mt19937_64 rng(kSeed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto random_dist = [&](int modes, int cutoff) {
    PhotonDistribution d;
    double total = 0.0;
    Occupation n(static_cast<std::size_t>(modes), 0);
    const int count = static_cast<int>(std::pow(cutoff + 1, modes));
    for (int i = 0; i < count; ++i) {
      int rest = i;
      for (int m = modes - 1; m >= 0; --m) {
        n[static_cast<std::size_t>(m)] = rest % (cutoff + 1);
        rest /= cutoff + 1;
      }
      const double w = 0.05 + unit(rng);
      d[n] = w;
      total += w;
    }
    for (auto& e : d) e.second /= total;
    return d;
  };
  double worst = 0.0;
  for (int trial = 0; trial < 4; ++trial) {
    const int modes = trial < 2 ? 1 : 2;
    const int cutoff = modes == 1 ? 3 : 1;
    const double g = 1.0 + 0.4 * unit(rng);
    const double gp = 1.0 + 0.4 * unit(rng);
    const PhotonDistribution r = random_dist(modes, cutoff);
    const PhotonDistribution s = random_dist(modes, cutoff);
    worst = std::max(worst, std::abs(amp_output_fidelity(r, s, g, gp, modes) -
                                     amp_output_fidelity_bruteforce(r, s, g, gp, modes)));
  }
  out.push_back({"amp_fidelity_vs_uhlmann", worst, 1e-8});

  const ProbeSpec spec({{{0}, 0.5}, {{1}, 0.3}, {{2}, 0.2}}, 1);
  const int loss[] = {1};
  out.push_back({"conditional_fidelity_vs_uhlmann",
                 std::abs(conditional_output_fidelity(spec, loss, 0.6, 0.65, 1.3, 1.4) -
                          conditional_output_fidelity_bruteforce(spec, loss, 0.6, 0.65, 1.3, 1.4)),
                 1e-8});
  return out;
}

std::vector<CheckResult> theorem1_suite() {
  std::vector<CheckResult> out;
  std::mt19937_64 rng(kSeed);
  std::normal_distribution<double> gauss;
  const ScenarioId ps{Scenario::ps_loss, 0.2, false};
  const double kappa[] = {0.6};
  double shortfall = 0.0, off_diagonal = 0.0;
  for (int trial = 0; trial < 3; ++trial) {
    const FockTruncation trunc({1, 3});
    CVector amp(static_cast<Eigen::Index>(trunc.dimension()));
    for (Eigen::Index i = 0; i < amp.size(); ++i) amp(i) = Complex(gauss(rng), gauss(rng));
    amp.normalize();
    const StateVector psi(trunc, amp);
    const StateVector aug = augment_probe(psi, 1, 3);

    const OracleProbe original = custom_probe(DensityOperator::from_state(psi), {1});
    const OracleProbe augmented = custom_probe(DensityOperator::from_state(aug), {2});
    const double k0 = oracle_scenario_qfim(ps, kappa, original)(0, 0);
    const double k1 = oracle_scenario_qfim(ps, kappa, augmented)(0, 0);
    shortfall = std::max(shortfall, k0 - k1);

    const std::size_t keep[] = {2};
    const CMatrix reduced = partial_trace(DensityOperator::from_state(aug), keep).matrix();
    CMatrix off = reduced;
    off.diagonal().setZero();
    off_diagonal = std::max(off_diagonal, linalg::trace_norm(off));
  }
  out.push_back({"augmented_qfi_shortfall", std::max(shortfall, 0.0), 1e-8});
  out.push_back({"augmented_reduced_state_offdiag", off_diagonal, 1e-12});
  return out;
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"covariance", "cascade", "oracle",
                                              "bounds",     "appendix", "theorem1"};
  return names;
}

std::vector<CheckResult> run_suite(const std::string& suite, std::optional<double> tol) {
  static const std::map<std::string, std::function<std::vector<CheckResult>()>> suites{
      {"covariance", covariance_suite}, {"cascade", cascade_suite},   {"oracle", oracle_suite},
      {"bounds", bounds_suite},         {"appendix", appendix_suite}, {"theorem1", theorem1_suite},
  };
  const auto it = suites.find(suite);
  if (it == suites.end()) throw DomainError("unknown suite '" + suite + "'");
  std::vector<CheckResult> results = it->second();
  if (tol) {
    for (CheckResult& r : results) r.tol = *tol;
  }
  return results;
}

}  // namespace phasecov::cli
