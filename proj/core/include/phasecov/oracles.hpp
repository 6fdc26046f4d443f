#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "phasecov/bosonic_channels.hpp"
#include "phasecov/nds_probes.hpp"
#include "phasecov/qfi_engine.hpp"

namespace phasecov {

/// Input state for a Fock-space oracle run, with the modes the channel acts on.
struct OracleProbe {
  DensityOperator state;
  std::vector<std::size_t> signal_modes;
  /// Mean total photon number over the signal modes.
  double photons = 0.0;
  std::string label;
};

/// (ancilla, signal) two-mode squeezed vacuum with signal brightness N_S.
OracleProbe tmsv_probe(double signal_photons, std::optional<int> cutoff = std::nullopt);
/// Single-mode coherent state with |alpha|^2 = N_S, real alpha.
OracleProbe coherent_probe(double signal_photons, std::optional<int> cutoff = std::nullopt);
OracleProbe vacuum_probe();
/// Multimode number state; every mode is a signal mode.
OracleProbe fock_probe(std::span<const int> photons);
/// Any state whose listed modes are the signal.
OracleProbe custom_probe(DensityOperator state, std::vector<std::size_t> signal_modes,
                         std::string label = "custom");

/// Family theta -> (id x C_theta per signal mode)(probe). The amplifier Kraus
/// count is fixed from the gain at `theta_ref` (plus a margin) so that every
/// stencil point lives on the same truncation.
StateFamily scenario_family(const ScenarioId& scenario, const OracleProbe& probe,
                            std::span<const double> theta_ref,
                            double tail_tol = kAmplifierTailTolerance);

/// Largest Hilbert-space dimension scenario_family would produce at theta_ref.
std::size_t scenario_output_dimension(const ScenarioId& scenario, const OracleProbe& probe,
                                      std::span<const double> theta_ref,
                                      double tail_tol = kAmplifierTailTolerance);

/// SLD QFIM of the probe through the scenario channel at theta.
QfiMatrix oracle_scenario_qfim(const ScenarioId& scenario, std::span<const double> theta,
                               const OracleProbe& probe,
                               double tail_tol = kAmplifierTailTolerance);

/// Amplifies every signal mode (all modes after the first) of an NDS state.
DensityOperator amplify_signal_modes(const StateVector& nds, double gain, int max_added);

/// Uhlmann fidelity of Kraus-simulated amplifier outputs of the NDS states
/// with distributions r and s on a shared ancilla basis.
double amp_output_fidelity_bruteforce(const PhotonDistribution& r, const PhotonDistribution& s,
                                      double gain, double gain_prime, int modes,
                                      double tail_tol = kAmplifierTailTolerance);

/// Uhlmann fidelity of Kraus-simulated conditional outputs at (eta, G), (eta', G').
double conditional_output_fidelity_bruteforce(const ProbeSpec& spec, std::span<const int> loss,
                                              double eta, double eta_prime, double gain,
                                              double gain_prime,
                                              double tail_tol = kAmplifierTailTolerance);

}  // namespace phasecov
