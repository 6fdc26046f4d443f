#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "phasecov/errors.hpp"
#include "phasecov/oracles.hpp"
#include "phasecov/pcgc_bounds.hpp"

using namespace phasecov;

namespace {

CascadeParams scalar_cascade(double eta, double gain, double d_eta, double d_gain) {
  CascadeParams p;
  p.eta = eta;
  p.gain = gain;
  p.d_eta = Eigen::VectorXd::Constant(1, d_eta);
  p.d_gain = Eigen::VectorXd::Constant(1, d_gain);
  p.theta = Eigen::VectorXd::Constant(1, 0.5);
  return p;
}

CascadeParams ps_k2() {
  const double theta[] = {0.5, 1.0};
  return scenario_cascade({Scenario::ps_loss, 0.0, true}, theta);
}

}  // namespace

TEST(ResourceBudget, Validation) {
  const ResourceBudget b(10.0, 4.0);
  EXPECT_NEAR(b.brightness(), 2.5, 1e-12);
  EXPECT_NEAR(ResourceBudget::from_brightness(0.3, 7.0).photons(), 2.1, 1e-12);
  EXPECT_THROW(ResourceBudget(-1.0, 1.0), DomainError);
  EXPECT_THROW(ResourceBudget(1.0, 0.5), DomainError);
}

TEST(UpperBound, PureLossLimit) {
  const double eta = 0.3;
  const ResourceBudget b(7.0, 3.0);
  const QfiMatrix k = qfim_upper_bound(scalar_cascade(eta, 1.0, 1.0, 0.0), b);
  EXPECT_NEAR(k(0, 0), 7.0 / (eta * (1.0 - eta)), 1e-12);
}

TEST(UpperBound, QuantumLimitedGainLimit) {
  const double g = 1.7;
  const ResourceBudget b(7.0, 3.0);
  const QfiMatrix k = qfim_upper_bound(scalar_cascade(1.0, g, 0.0, 1.0), b);
  EXPECT_NEAR(k(0, 0), 10.0 / (g * (g - 1.0)), 1e-12);
}

TEST(UpperBound, PsK2Matrix) {
  const QfiMatrix k = qfim_upper_bound(ps_k2(), ResourceBudget(10.0, 5.0));
  EXPECT_NEAR(k(0, 0), 46.6667, 1e-4);
  EXPECT_NEAR(k(0, 1), -10.0, 1e-4);
  EXPECT_NEAR(k(1, 0), -10.0, 1e-4);
  EXPECT_NEAR(k(1, 1), 3.33333, 1e-4);
  EXPECT_NEAR(k(0, 0), 140.0 / 3.0, 1e-12);
}

TEST(UpperBound, SingularEndpoints) {
  const ResourceBudget b(1.0, 1.0);
  EXPECT_THROW(qfim_upper_bound(scalar_cascade(1.0, 1.5, 1.0, 0.0), b), SingularBound);
  EXPECT_THROW(qfim_upper_bound(scalar_cascade(0.5, 1.0, 0.0, 1.0), b), SingularBound);
  EXPECT_NO_THROW(qfim_upper_bound(scalar_cascade(1.0, 1.0, 0.0, 0.0), b));
}

TEST(Split, PureLossHasNoModalTerm) {
  const BoundSplit s = pp_pm_split(scalar_cascade(0.4, 1.0, 1.0, 0.0));
  EXPECT_EQ(s.per_mode(0, 0), 0.0);
  EXPECT_NEAR(s.per_photon(0, 0), 1.0 / 0.24, 1e-12);
}

TEST(Split, NpsHasNoModalTerm) {
  const double theta[] = {0.3};
  const BoundSplit s = pp_pm_split(scenario_cascade({Scenario::nps_loss, 1.0, false}, theta));
  EXPECT_EQ(s.per_mode(0, 0), 0.0);
  EXPECT_GT(s.per_photon(0, 0), 0.0);
}

TEST(Split, AdditiveNoise) {
  const double gamma = 1.0;
  const double theta[] = {gamma};
  const BoundSplit s = pp_pm_split(scenario_cascade({Scenario::add_noise, 0.0, false}, theta));
  EXPECT_NEAR(s.per_photon(0, 0), 2.0 / (gamma * (gamma + 1.0) * (gamma + 1.0)), 1e-12);
  EXPECT_NEAR(s.per_photon(0, 0), 0.5, 1e-12);
  EXPECT_NEAR(s.per_mode(0, 0), 1.0 / (gamma * (gamma + 1.0)), 1e-12);
}

TEST(Split, ReassemblesBound) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (int i = 0; i < 20; ++i) {
    const double theta[] = {u(rng), 3.0 * u(rng)};
    const CascadeParams p = scenario_cascade({i % 2 ? Scenario::ps_loss : Scenario::nps_loss, 0.0, true}, theta);
    const ResourceBudget b(20.0 * u(rng), 1.0 + 9.0 * u(rng));
    const BoundSplit s = pp_pm_split(p);
    const Eigen::MatrixXd sum = s.per_photon.entries() * b.photons() + s.per_mode.entries() * b.modes();
    const Eigen::MatrixXd k = qfim_upper_bound(p, b).entries();
    EXPECT_LT((sum - k).cwiseAbs().maxCoeff(), 1e-12 * std::max(1.0, k.cwiseAbs().maxCoeff()));
  }
}

TEST(Qcrb, Examples) {
  EXPECT_NEAR(qcrb(QfiMatrix(Eigen::MatrixXd::Constant(1, 1, 4.0)))(0, 0), 0.25, 1e-15);
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(2, 2);
  EXPECT_LT((qcrb(QfiMatrix(id)) - id).cwiseAbs().maxCoeff(), 1e-15);
  const QfiMatrix k = qfim_upper_bound(ps_k2(), ResourceBudget(10.0, 5.0));
  EXPECT_LT((k.entries() * qcrb(k) - id).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_THROW(qcrb(QfiMatrix(Eigen::MatrixXd::Zero(2, 2))), SingularInformation);
}

TEST(ClosedFormNps, Anchors) {
  const ScenarioQfis q = closed_form_nps(0.5, 1.0, ResourceBudget(10.0, 5.0));
  EXPECT_NEAR(q.bound, 40.0 / 3.0, 1e-12);
  EXPECT_NEAR(q.classical, 20.0 / 3.0, 1e-12);
  EXPECT_EQ(q.classical_label, "classical_ub");
  EXPECT_TRUE(q.classical_is_upper_bound);
  EXPECT_NEAR(closed_form_nps(0.5, 1.0, ResourceBudget(10.0, 100.0)).tmsv, 12.7407, 1e-4);
}

TEST(ClosedFormNps, WeakSignalLimit) {
  const ScenarioQfis q = closed_form_nps(0.5, 1.0, ResourceBudget::from_brightness(1e-3, 10.0));
  EXPECT_LT((q.bound - q.tmsv) / q.bound, 0.01);
}

TEST(ClosedFormPs, Anchors) {
  const ScenarioQfis q = closed_form_ps(0.5, 1.0, ResourceBudget(10.0, 5.0));
  EXPECT_NEAR(q.bound, 46.6667, 1e-4);
  EXPECT_NEAR(q.tmsv, 28.8889, 1e-4);
  EXPECT_FALSE(q.classical_is_upper_bound);
}

TEST(ClosedFormPs, NoBackgroundIsPureLoss) {
  for (double kappa : {0.1, 0.5, 0.83}) {
    const ScenarioQfis q = closed_form_ps(kappa, 0.0, ResourceBudget(6.0, 2.0));
    const double exact = 6.0 / (kappa * (1.0 - kappa));
    EXPECT_NEAR(q.tmsv, exact, 1e-12 * exact);
    EXPECT_NEAR(q.bound, exact, 1e-12 * exact);
  }
}

TEST(ClosedFormAdd, Anchors) {
  const ScenarioQfis q = closed_form_addnoise(1.0, ResourceBudget(3.0, 2.0));
  EXPECT_NEAR(q.bound, 2.5, 1e-12);
  EXPECT_NEAR(q.classical, 1.0, 1e-12);
  EXPECT_NEAR(q.tmsv, 1.6, 1e-12);
}

TEST(ClosedFormAdd, Limits) {
  const double gamma = 0.7;
  const ScenarioQfis vac = closed_form_addnoise(gamma, ResourceBudget(0.0, 3.0));
  EXPECT_NEAR(vac.tmsv, vac.classical, 1e-12);
  EXPECT_NEAR(vac.classical, 3.0 / (gamma * (gamma + 1.0)), 1e-12);
  const ScenarioQfis bright = closed_form_addnoise(gamma, ResourceBudget::from_brightness(1e3, 3.0));
  EXPECT_LT(std::abs(bright.tmsv - 3.0 / (gamma * gamma)) / (3.0 / (gamma * gamma)), 0.005);
}

TEST(ClosedForm, DomainErrors) {
  const ResourceBudget b(1.0, 1.0);
  EXPECT_THROW(closed_form_ps(0.0, 1.0, b), DomainError);
  EXPECT_THROW(closed_form_nps(1.0, 1.0, b), DomainError);
  EXPECT_THROW(closed_form_ps(0.5, -1.0, b), DomainError);
  EXPECT_THROW(closed_form_addnoise(0.0, b), DomainError);
  EXPECT_THROW(closed_form({Scenario::ps_loss, 1.0, true}, 0.5, b), DomainError);
}

TEST(Invariants, DominanceGrid) {
  for (Scenario kind : {Scenario::nps_loss, Scenario::ps_loss, Scenario::add_noise}) {
    for (double nb : {0.0, 0.05, 1.0, 5.0}) {
      for (double n : {0.0, 1.0, 10.0, 100.0}) {
        for (double m : {1.0, 5.0, 20.0}) {
          for (int i = 1; i < 40; ++i) {
            const double theta = kind == Scenario::add_noise ? 0.1 * i : i / 40.0;
            const ScenarioQfis q = closed_form({kind, nb, false}, theta, ResourceBudget(n, m));
            const double slack = 1e-9 * std::max(1.0, q.bound);
            EXPECT_LE(q.tmsv, q.bound + slack);
            EXPECT_LE(q.classical, q.bound + slack);
          }
        }
      }
    }
  }
}

TEST(Invariants, ScalarMatchesMatrixEntry) {
  for (double kappa : {0.2, 0.5, 0.9}) {
    for (double nb : {0.3, 1.0, 4.0}) {
      const ResourceBudget b(10.0, 5.0);
      const double theta2[] = {kappa, nb};
      const double theta1[] = {kappa};
      const double k11 = qfim_upper_bound(scenario_cascade({Scenario::ps_loss, 0.0, true}, theta2), b)(0, 0);
      const double k = qfim_upper_bound(scenario_cascade({Scenario::ps_loss, nb, false}, theta1), b)(0, 0);
      EXPECT_NEAR(k11, k, 1e-12 * k);
      EXPECT_NEAR(k, closed_form_ps(kappa, nb, b).bound, 1e-12 * k);
    }
  }
}

TEST(Invariants, OracleDominance) {
  const double kappa[] = {0.6};
  const double gamma[] = {0.7};
  struct Case {
    ScenarioId id;
    std::span<const double> theta;
    OracleProbe probe;
  };
  const std::vector<Case> cases = {
      {{Scenario::ps_loss, 0.2, false}, kappa, tmsv_probe(0.3)},
      {{Scenario::ps_loss, 0.2, false}, kappa, coherent_probe(0.5)},
      {{Scenario::nps_loss, 1.0, false}, kappa, coherent_probe(0.5)},
      {{Scenario::add_noise, 0.0, false}, gamma, coherent_probe(0.4)},
  };
  for (const Case& c : cases) {
    const QfiMatrix oracle = oracle_scenario_qfim(c.id, c.theta, c.probe);
    const QfiMatrix bound =
        qfim_upper_bound(scenario_cascade(c.id, c.theta), ResourceBudget(c.probe.photons, 1.0));
    EXPECT_TRUE(psd_order(bound.entries(), oracle.entries(), 1e-6)) << c.probe.label;
  }
}
