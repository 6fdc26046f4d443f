#pragma once

#include <string>

#include <Eigen/Dense>

#include "phasecov/bosonic_channels.hpp"
#include "phasecov/qfi_engine.hpp"

namespace phasecov {

/// Total signal photons N and mode count M. M is real so that per-mode
/// brightness N_S = N/M can be swept continuously.
class ResourceBudget {
 public:
  ResourceBudget(double photons, double modes);

  static ResourceBudget from_brightness(double per_mode_photons, double modes) {
    return ResourceBudget(per_mode_photons * modes, modes);
  }

  double photons() const noexcept { return n_; }
  double modes() const noexcept { return m_; }
  double brightness() const noexcept { return n_ / m_; }

 private:
  double n_;
  double m_;
};

/// Universal QFIM bound for a phase-covariant cascade:
///   N/(eta(1-eta)) d eta d eta^T + (eta N + M)/(G(G-1)) dG dG^T.
/// A term whose gradient vanishes contributes zero; otherwise eta in {0,1}
/// or G = 1 raises SingularBound.
QfiMatrix qfim_upper_bound(const CascadeParams& cascade, const ResourceBudget& budget);

/// The bound written as per_photon * N + per_mode * M.
struct BoundSplit {
  QfiMatrix per_photon;
  QfiMatrix per_mode;
};

BoundSplit pp_pm_split(const CascadeParams& cascade);

/// Inverse Fisher information. Throws SingularInformation when the smallest
/// eigenvalue is <= 1e-12.
Eigen::MatrixXd qcrb(const QfiMatrix& k);

/// Bound, TMSV and classical-probe QFIs of one scenario at one parameter point.
struct ScenarioQfis {
  double bound = 0.0;
  double tmsv = 0.0;
  double classical = 0.0;
  std::string bound_label;
  std::string tmsv_label;
  std::string classical_label;
  /// Set when `classical` is an upper bound on classical probes rather than an
  /// achieved value.
  bool classical_is_upper_bound = false;
};

ScenarioQfis closed_form_nps(double kappa, double nb, const ResourceBudget& budget);
ScenarioQfis closed_form_ps(double kappa, double nb, const ResourceBudget& budget);
ScenarioQfis closed_form_addnoise(double gamma, const ResourceBudget& budget);

/// Dispatches on the scenario (theta is kappa or gamma; N_B from the id).
ScenarioQfis closed_form(const ScenarioId& scenario, double theta, const ResourceBudget& budget);

}  // namespace phasecov
