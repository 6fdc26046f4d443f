#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "phasecov/fock_core.hpp"

namespace phasecov {

/// Default operator-norm completeness defect targeted by amplifier truncation.
inline constexpr double kAmplifierTailTolerance = 1e-10;

/// Single-mode channel in Kraus form, mapping an input cutoff to an output cutoff.
class KrausChannel {
 public:
  KrausChannel(std::vector<CMatrix> operators, FockTruncation input, FockTruncation output);

  const std::vector<CMatrix>& operators() const noexcept { return operators_; }
  const FockTruncation& input_truncation() const noexcept { return input_; }
  const FockTruncation& output_truncation() const noexcept { return output_; }
  /// Operator norm of I - sum K^dagger K on the input truncation.
  double completeness_defect() const noexcept { return completeness_defect_; }

 private:
  std::vector<CMatrix> operators_;
  FockTruncation input_;
  FockTruncation output_;
  double completeness_defect_;
};

KrausChannel identity_channel(const FockTruncation& truncation);

/// Quantum-limited attenuator of transmittance eta in (0, 1].
KrausChannel attenuator_kraus(double eta, const FockTruncation& input);

/// Number of added-photon Kraus operators (minus one) needed to bring the
/// amplifier completeness defect on `input_cutoff` below `tail_tol`.
int amplifier_max_added(double gain, int input_cutoff, double tail_tol);

/// Quantum-limited amplifier of gain >= 1 with operators a = 0..a_max, where
/// a_max is chosen from `tail_tol`. Output cutoff = input cutoff + a_max.
KrausChannel amplifier_kraus(double gain, const FockTruncation& input,
                             double tail_tol = kAmplifierTailTolerance);

/// Amplifier with an explicit a_max, for families that need a fixed output space.
KrausChannel amplifier_kraus_fixed(double gain, const FockTruncation& input, int max_added);

/// `second` after `first`.
KrausChannel compose(const KrausChannel& first, const KrausChannel& second);

/// Applies a single-mode channel to a single-mode state. The result is
/// symmetrized; throws TraceLossExceeded if the trace drops by more than 1e-9.
DensityOperator apply(const KrausChannel& channel, const DensityOperator& rho);

/// Applies the channel to one mode of a multimode state (identity elsewhere).
DensityOperator apply_to_mode(const KrausChannel& channel, const DensityOperator& rho,
                              std::size_t mode);

/// Max over samples and a fixed phase grid of || C(U rho U^dag) - U C(rho) U^dag ||_1.
double check_phase_covariance(const KrausChannel& channel,
                              std::span<const DensityOperator> samples);

// --- Scenario cascades -----------------------------------------------------

enum class Scenario { nps_loss, ps_loss, add_noise };

/// Channel family identifier. For the loss scenarios `background` is N_B; when
/// `background_is_parameter` is set, theta = (kappa, N_B) instead of (kappa).
struct ScenarioId {
  Scenario kind = Scenario::ps_loss;
  double background = 0.0;
  bool background_is_parameter = false;

  std::size_t theta_dim() const { return background_is_parameter ? 2 : 1; }
};

/// Attenuator transmittance and amplifier gain of a cascade C = A_G o L_eta,
/// with their gradients with respect to theta.
struct CascadeParams {
  double eta = 1.0;
  double gain = 1.0;
  Eigen::VectorXd d_eta;
  Eigen::VectorXd d_gain;
  Eigen::VectorXd theta;

  std::size_t theta_dim() const { return static_cast<std::size_t>(theta.size()); }
  /// Throws DomainError unless 0 < eta <= 1, gain >= 1 and gradients have length K.
  void validate() const;
};

/// Closed-form cascade parameters. Rejects kappa outside (0,1) and gamma <= 0.
CascadeParams scenario_cascade(const ScenarioId& scenario, std::span<const double> theta);

/// Cascade parameters of a user-supplied family, with gradients by central
/// differences at relative step `relative_step`.
CascadeParams finite_difference_cascade(
    const std::function<double(std::span<const double>)>& eta,
    const std::function<double(std::span<const double>)>& gain, std::span<const double> theta,
    double relative_step = 1e-6);

/// Composed Kraus channel A_G o L_eta for a scenario at theta.
KrausChannel scenario_channel(const ScenarioId& scenario, std::span<const double> theta,
                              const FockTruncation& input,
                              double tail_tol = kAmplifierTailTolerance);

/// Applies L_eta then A_G (with a fixed a_max) to one mode. Equivalent to
/// applying the composed channel but cheaper on multimode states.
DensityOperator apply_cascade_to_mode(double eta, double gain, int max_added,
                                      const DensityOperator& rho, std::size_t mode);

}  // namespace phasecov
