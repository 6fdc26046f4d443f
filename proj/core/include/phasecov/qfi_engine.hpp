#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "phasecov/fock_core.hpp"

namespace phasecov {

/// Relative eigenvalue cut below which pairs of eigenvectors are treated as
/// outside the support of rho.
inline constexpr double kDefaultEigTol = 1e-12;

/// Symmetric PSD Fisher-information matrix. The constructor checks symmetry
/// (1e-9) and PSD (-1e-8), both relative to max(1, |K|), then symmetrizes.
class QfiMatrix {
 public:
  explicit QfiMatrix(Eigen::MatrixXd entries);

  const Eigen::MatrixXd& entries() const noexcept { return entries_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return entries_(i, j); }
  Eigen::Index size() const noexcept { return entries_.rows(); }

 private:
  Eigen::MatrixXd entries_;
};

/// A differentiable family theta -> rho_theta with K <= 2 parameters.
/// `fd_steps` overrides the default central-difference step per parameter.
struct StateFamily {
  std::function<DensityOperator(std::span<const double>)> evaluator;
  std::size_t theta_dim = 1;
  std::vector<double> fd_steps;
};

/// Symmetric logarithmic derivative of rho along drho, returned in the Fock basis.
CMatrix sld(const DensityOperator& rho, const CMatrix& drho, double eig_tol = kDefaultEigTol);

/// QFIM from explicit derivatives d rho / d theta_i.
QfiMatrix qfim_from_derivatives(const DensityOperator& rho, std::span<const CMatrix> drho,
                                double eig_tol = kDefaultEigTol);

/// SLD QFIM with central-difference derivatives (step h = 1e-4 max(|theta|,1)
/// unless overridden), one Richardson extrapolation and a step-halving check.
QfiMatrix qfim_sld(const StateFamily& family, std::span<const double> theta,
                   double eig_tol = kDefaultEigTol);

/// Uhlmann fidelity Tr sqrt(sqrt(rho) sigma sqrt(rho)), clamped to [0, 1].
double uhlmann_fidelity(const DensityOperator& rho, const DensityOperator& sigma);

/// QFIM as -4 times the Hessian of F(rho_theta, rho_theta') at theta' = theta.
/// Relative step `step` (default 1e-3) wins over the family's fd_steps.
QfiMatrix qfi_from_fidelity(const StateFamily& family, std::span<const double> theta,
                            std::optional<double> step = std::nullopt);

using DistributionFamily = std::function<std::vector<double>(std::span<const double>)>;

/// Classical Fisher information of a family of probability vectors (fixed
/// outcome ordering). Distributions must be normalized within 1e-10.
QfiMatrix classical_fim(const DistributionFamily& family, std::span<const double> theta,
                        std::optional<double> step = std::nullopt);

/// True iff the smallest eigenvalue of A - B is >= -tol.
bool psd_order(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double tol);

}  // namespace phasecov
