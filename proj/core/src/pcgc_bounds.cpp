#include "phasecov/pcgc_bounds.hpp"

#include <cmath>
#include <string>

#include "phasecov/errors.hpp"

namespace phasecov {

namespace {

constexpr double kSingularInformationTol = 1e-12;

struct BoundTerms {
  Eigen::MatrixXd loss;  // d eta d eta^T / (eta (1 - eta))
  Eigen::MatrixXd gain;  // dG dG^T / (G (G - 1))
};

BoundTerms bound_terms(const CascadeParams& c) {
  c.validate();
  const auto k = static_cast<Eigen::Index>(c.theta_dim());
  BoundTerms t{Eigen::MatrixXd::Zero(k, k), Eigen::MatrixXd::Zero(k, k)};
  if (!c.d_eta.isZero(0.0)) {
    if (!(c.eta > 0.0 && c.eta < 1.0)) {
      throw SingularBound("bound diverges: eta = " + std::to_string(c.eta) +
                          " with a nonzero eta gradient");
    }
    t.loss = c.d_eta * c.d_eta.transpose() / (c.eta * (1.0 - c.eta));
  }
  if (!c.d_gain.isZero(0.0)) {
    if (!(c.gain > 1.0)) {
      throw SingularBound("bound diverges: G = 1 with a nonzero gain gradient");
    }
    t.gain = c.d_gain * c.d_gain.transpose() / (c.gain * (c.gain - 1.0));
  }
  return t;
}

void check_loss_domain(double kappa, double nb) {
  if (!(kappa > 0.0 && kappa < 1.0)) {
    throw DomainError("kappa must lie strictly inside (0,1), got " + std::to_string(kappa));
  }
  if (!(nb >= 0.0)) throw DomainError("N_B must be >= 0, got " + std::to_string(nb));
}

}  // namespace

ResourceBudget::ResourceBudget(double photons, double modes) : n_(photons), m_(modes) {
  if (!(photons >= 0.0) || !std::isfinite(photons)) throw DomainError("N must be finite and >= 0");
  if (!(modes >= 1.0) || !std::isfinite(modes)) throw DomainError("M must be finite and >= 1");
}

QfiMatrix qfim_upper_bound(const CascadeParams& cascade, const ResourceBudget& budget) {
  const BoundTerms t = bound_terms(cascade);
  return QfiMatrix(budget.photons() * t.loss +
                   (cascade.eta * budget.photons() + budget.modes()) * t.gain);
}

BoundSplit pp_pm_split(const CascadeParams& cascade) {
  const BoundTerms t = bound_terms(cascade);
  return {QfiMatrix(t.loss + cascade.eta * t.gain), QfiMatrix(t.gain)};
}

Eigen::MatrixXd qcrb(const QfiMatrix& k) {
  const Eigen::MatrixXd& a = k.entries();
  if (a.size() == 0) throw SingularInformation("empty information matrix");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a);
  if (solver.eigenvalues().minCoeff() <= kSingularInformationTol) {
    throw SingularInformation("information matrix has eigenvalue " +
                              std::to_string(solver.eigenvalues().minCoeff()));
  }
  const Eigen::VectorXd inv = solver.eigenvalues().cwiseInverse();
  Eigen::MatrixXd out = solver.eigenvectors() * inv.asDiagonal() * solver.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

ScenarioQfis closed_form_nps(double kappa, double nb, const ResourceBudget& budget) {
  check_loss_domain(kappa, nb);
  const double n = budget.photons();
  const double ns = budget.brightness();
  ScenarioQfis out;
  out.bound = n / (kappa * (nb + 1.0 - kappa));
  out.tmsv = n * (nb + 1.0 + ns * (nb + 1.0 - kappa)) /
             (kappa * (nb + 1.0 - kappa) * (nb + 1.0 + ns * (2.0 * nb + 1.0 - kappa)));
  out.classical = n / (kappa * (2.0 * nb + 1.0));
  out.bound_label = "bound";
  out.tmsv_label = "tmsv";
  out.classical_label = "classical_ub";
  out.classical_is_upper_bound = true;
  return out;
}

ScenarioQfis closed_form_ps(double kappa, double nb, const ResourceBudget& budget) {
  check_loss_domain(kappa, nb);
  const double n = budget.photons();
  const double m = budget.modes();
  const double ns = budget.brightness();
  const double g = (1.0 - kappa) * nb + 1.0;
  const double d = (1.0 - kappa) * (ns + nb + 2.0 * ns * nb) + 1.0;
  ScenarioQfis out;
  out.bound = n * ((1.0 + kappa * kappa) * nb + 1.0) / (kappa * (1.0 - kappa) * g * g) +
              m * nb / ((1.0 - kappa) * g);
  out.tmsv = n * ((1.0 - kappa) * ns + 2.0 * kappa * nb + 1.0) / (kappa * (1.0 - kappa) * d) +
             m * nb / ((1.0 - kappa) * d);
  out.classical = n / (kappa * (2.0 * (1.0 - kappa) * nb + 1.0)) + m * nb / ((1.0 - kappa) * g);
  out.bound_label = "bound";
  out.tmsv_label = "tmsv";
  out.classical_label = "coherent";
  return out;
}

ScenarioQfis closed_form_addnoise(double gamma, const ResourceBudget& budget) {
  if (!(gamma > 0.0)) throw DomainError("gamma must be > 0, got " + std::to_string(gamma));
  const double n = budget.photons();
  const double m = budget.modes();
  const double ns = budget.brightness();
  ScenarioQfis out;
  out.bound = 2.0 * n / (gamma * (gamma + 1.0) * (gamma + 1.0)) + m / (gamma * (gamma + 1.0));
  out.classical = m / (gamma * (gamma + 1.0));
  out.tmsv = (2.0 * n + m) / (gamma * ((2.0 * ns + 1.0) * gamma + 1.0));
  out.bound_label = "bound";
  out.tmsv_label = "tmsv";
  out.classical_label = "coherent";
  return out;
}

ScenarioQfis closed_form(const ScenarioId& scenario, double theta, const ResourceBudget& budget) {
  if (scenario.background_is_parameter) {
    throw DomainError("closed forms are scalar in kappa or gamma");
  }
  switch (scenario.kind) {
    case Scenario::nps_loss:
      return closed_form_nps(theta, scenario.background, budget);
    case Scenario::ps_loss:
      return closed_form_ps(theta, scenario.background, budget);
    case Scenario::add_noise:
      return closed_form_addnoise(theta, budget);
  }
  throw DomainError("unknown scenario");
}

}  // namespace phasecov
