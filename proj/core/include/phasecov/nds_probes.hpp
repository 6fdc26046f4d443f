#pragma once

#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "phasecov/fock_core.hpp"

namespace phasecov {

/// Probability mass over multimode photon-number vectors.
using PhotonDistribution = std::map<Occupation, double>;

/// Signal photon distribution of a probe together with its mode count and
/// mean total photon number. Zero-probability entries are dropped.
class ProbeSpec {
 public:
  /// Throws DomainError unless every key has `modes` nonnegative entries and
  /// the probabilities are nonnegative and sum to 1 within 1e-12.
  ProbeSpec(PhotonDistribution photon_dist, int modes);

  /// Product of M geometric distributions of mean N_S, truncated once the
  /// discarded mass falls below 1e-14 and renormalized.
  static ProbeSpec iid_geometric(double per_mode_photons, int modes);

  const PhotonDistribution& photon_dist() const noexcept { return dist_; }
  int modes() const noexcept { return modes_; }
  double mean_photons() const noexcept { return mean_; }
  std::size_t support_size() const noexcept { return dist_.size(); }
  /// Largest photon number of each mode over the support.
  std::vector<int> max_photons() const;

 private:
  PhotonDistribution dist_;
  int modes_;
  double mean_;
};

/// One term sqrt(weight) |chi_label>|signal> of an NDS state.
struct NdsTerm {
  Occupation ancilla_label;
  Occupation signal;
  double weight;
};

/// NDS state on (ancilla factor) x (signal modes). The ancilla factor has one
/// basis ket per entry of `ancilla_basis`, in that order; every term label
/// must appear in it.
StateVector nds_state(std::span<const NdsTerm> terms, std::span<const Occupation> ancilla_basis,
                      const FockTruncation& signal);

struct NdsProbe {
  StateVector state;
  ProbeSpec source;
};

/// sum_n sqrt(p_n) |chi_n>|n>, ancilla kets labelled by the support of p.
/// The signal cutoff defaults to the support's per-mode maximum.
NdsProbe nds_probe(const ProbeSpec& spec, std::optional<std::vector<int>> signal_cutoffs = std::nullopt);

/// Phase-randomized probe on R x (modes of psi): the last `signal_modes`
/// modes of psi are the signal. R is one factor of dimension (N0+1)^M.
/// Throws SupportExceedsN0 if psi has amplitude on a signal photon number > N0.
StateVector augment_probe(const StateVector& psi, std::size_t signal_modes, int n0);

/// Distribution of the photons lost in each mode by an attenuator eta.
PhotonDistribution loss_pattern_dist(const ProbeSpec& spec, double eta);

/// Distribution of the surviving photons k given loss pattern l.
/// Throws ZeroProbabilityCondition when p_l(eta) = 0.
PhotonDistribution conditional_residual_dist(const ProbeSpec& spec, double eta,
                                             std::span<const int> loss);

/// Joint distribution of (loss pattern, residual) keyed by (l, k).
std::map<std::pair<Occupation, Occupation>, double> joint_loss_residual_dist(const ProbeSpec& spec,
                                                                            double eta);

/// NDS state conditioned on loss pattern l: sum_k sqrt(p_{k|l}) |chi_{k+l}>|k>,
/// with the ancilla basis of nds_probe(spec).
StateVector conditional_probe(const ProbeSpec& spec, double eta, std::span<const int> loss,
                              std::optional<std::vector<int>> signal_cutoffs = std::nullopt);

double bhattacharyya(const PhotonDistribution& p, const PhotonDistribution& q);
double bhattacharyya(std::span<const double> p, std::span<const double> q);

/// (sqrt(G G') - sqrt((G-1)(G'-1)))^-1.
double nu_coefficient(double gain, double gain_prime);

/// Fidelity of amplifier outputs of two NDS probes sharing an ancilla basis:
/// sum_n sqrt(r_n s_n) nu^(|n| + M).
double amp_output_fidelity(const PhotonDistribution& r, const PhotonDistribution& s, double gain,
                           double gain_prime, int modes);

/// Fidelity between the conditional outputs at (eta, G) and (eta', G').
double conditional_output_fidelity(const ProbeSpec& spec, std::span<const int> loss, double eta,
                                   double eta_prime, double gain, double gain_prime);

}  // namespace phasecov
