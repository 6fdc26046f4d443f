#include "phasecov/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "phasecov/errors.hpp"

namespace phasecov {

namespace {

constexpr double kGainMargin = 1e-2;
constexpr int kExtraAdded = 2;

std::vector<int> fixed_max_added(const ScenarioId& scenario, const OracleProbe& probe,
                                 std::span<const double> theta_ref, double tail_tol) {
  const CascadeParams p = scenario_cascade(scenario, theta_ref);
  std::vector<int> out;
  for (std::size_t mode : probe.signal_modes) {
    if (p.gain == 1.0 && p.d_gain.isZero(0.0)) {
      out.push_back(0);
      continue;
    }
    const int cutoff = probe.state.truncation().cutoff(mode);
    out.push_back(amplifier_max_added(p.gain * (1.0 + kGainMargin), cutoff, tail_tol) + kExtraAdded);
  }
  return out;
}

int shared_max_added(double gain, double gain_prime, int cutoff, double tail_tol) {
  return std::max(amplifier_max_added(gain, cutoff, tail_tol),
                  amplifier_max_added(gain_prime, cutoff, tail_tol));
}

}  // namespace

OracleProbe tmsv_probe(double signal_photons, std::optional<int> cutoff) {
  return {DensityOperator::from_state(tmsv_state(signal_photons, cutoff)), {1}, signal_photons,
          "tmsv"};
}

OracleProbe coherent_probe(double signal_photons, std::optional<int> cutoff) {
  if (!(signal_photons >= 0.0)) throw DomainError("coherent probe brightness must be >= 0");
  return {DensityOperator::from_state(coherent_state(std::sqrt(signal_photons), cutoff)), {0},
          signal_photons, "coherent"};
}

OracleProbe vacuum_probe() {
  const int zero[] = {0};
  return {DensityOperator::from_state(number_state(zero, FockTruncation::single(0))), {0}, 0.0,
          "vacuum"};
}

OracleProbe fock_probe(std::span<const int> photons) {
  if (photons.empty()) throw DomainError("fock probe needs at least one mode");
  const FockTruncation trunc(std::vector<int>(photons.begin(), photons.end()));
  std::vector<std::size_t> modes(photons.size());
  double total = 0.0;
  for (std::size_t m = 0; m < photons.size(); ++m) {
    modes[m] = m;
    total += photons[m];
  }
  return {DensityOperator::from_state(number_state(photons, trunc)), std::move(modes), total, "fock"};
}

OracleProbe custom_probe(DensityOperator state, std::vector<std::size_t> signal_modes,
                         std::string label) {
  double total = 0.0;
  for (std::size_t m : signal_modes) total += mean_photon_number(state, m);
  return {std::move(state), std::move(signal_modes), total, std::move(label)};
}

StateFamily scenario_family(const ScenarioId& scenario, const OracleProbe& probe,
                            std::span<const double> theta_ref, double tail_tol) {
  const std::vector<int> max_added = fixed_max_added(scenario, probe, theta_ref, tail_tol);
  StateFamily family;
  family.theta_dim = scenario.theta_dim();
  family.evaluator = [scenario, probe, max_added](std::span<const double> theta) {
    const CascadeParams p = scenario_cascade(scenario, theta);
    DensityOperator rho = probe.state;
    for (std::size_t i = 0; i < probe.signal_modes.size(); ++i) {
      rho = apply_cascade_to_mode(p.eta, p.gain, max_added[i], rho, probe.signal_modes[i]);
    }
    return rho;
  };
  return family;
}

std::size_t scenario_output_dimension(const ScenarioId& scenario, const OracleProbe& probe,
                                      std::span<const double> theta_ref, double tail_tol) {
  const std::vector<int> max_added = fixed_max_added(scenario, probe, theta_ref, tail_tol);
  FockTruncation trunc = probe.state.truncation();
  for (std::size_t i = 0; i < probe.signal_modes.size(); ++i) {
    const std::size_t mode = probe.signal_modes[i];
    trunc = trunc.with_cutoff(mode, trunc.cutoff(mode) + max_added[i]);
  }
  return trunc.dimension();
}

QfiMatrix oracle_scenario_qfim(const ScenarioId& scenario, std::span<const double> theta,
                               const OracleProbe& probe, double tail_tol) {
  return qfim_sld(scenario_family(scenario, probe, theta, tail_tol), theta);
}

DensityOperator amplify_signal_modes(const StateVector& nds, double gain, int max_added) {
  DensityOperator rho = DensityOperator::from_state(nds);
  for (std::size_t m = 1; m < nds.truncation().mode_count(); ++m) {
    const FockTruncation mode_trunc = FockTruncation::single(rho.truncation().cutoff(m));
    rho = apply_to_mode(amplifier_kraus_fixed(gain, mode_trunc, max_added), rho, m);
  }
  return rho;
}

double amp_output_fidelity_bruteforce(const PhotonDistribution& r, const PhotonDistribution& s,
                                      double gain, double gain_prime, int modes,
                                      double tail_tol) {
  std::set<Occupation> labels;
  std::vector<int> cutoffs(static_cast<std::size_t>(modes), 0);
  for (const PhotonDistribution* dist : {&r, &s}) {
    for (const auto& entry : *dist) {
      if (entry.first.size() != static_cast<std::size_t>(modes)) {
        throw DomainError("photon vector length does not match M");
      }
      labels.insert(entry.first);
      for (std::size_t m = 0; m < cutoffs.size(); ++m) {
        cutoffs[m] = std::max(cutoffs[m], entry.first[m]);
      }
    }
  }
  const std::vector<Occupation> basis(labels.begin(), labels.end());
  auto terms = [](const PhotonDistribution& dist) {
    std::vector<NdsTerm> out;
    for (const auto& [n, p] : dist) out.push_back({n, n, p});
    return out;
  };
  const FockTruncation signal(cutoffs);
  const int max_cutoff = *std::max_element(cutoffs.begin(), cutoffs.end());
  const int max_added = shared_max_added(gain, gain_prime, max_cutoff, tail_tol);
  const std::vector<NdsTerm> r_terms = terms(r);
  const std::vector<NdsTerm> s_terms = terms(s);
  return uhlmann_fidelity(amplify_signal_modes(nds_state(r_terms, basis, signal), gain, max_added),
                          amplify_signal_modes(nds_state(s_terms, basis, signal), gain_prime,
                                               max_added));
}

double conditional_output_fidelity_bruteforce(const ProbeSpec& spec, std::span<const int> loss,
                                              double eta, double eta_prime, double gain,
                                              double gain_prime, double tail_tol) {
  const std::vector<int> cutoffs = spec.max_photons();
  const int max_cutoff = *std::max_element(cutoffs.begin(), cutoffs.end());
  const int max_added = shared_max_added(gain, gain_prime, max_cutoff, tail_tol);
  return uhlmann_fidelity(
      amplify_signal_modes(conditional_probe(spec, eta, loss), gain, max_added),
      amplify_signal_modes(conditional_probe(spec, eta_prime, loss), gain_prime, max_added));
}

}  // namespace phasecov
