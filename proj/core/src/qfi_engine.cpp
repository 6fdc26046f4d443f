#include "phasecov/qfi_engine.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "phasecov/errors.hpp"
#include "phasecov/linalg.hpp"

namespace phasecov {

namespace {

constexpr double kNegativeEigenvalueTol = 1e-10;
constexpr double kDroppedWeightTol = 1e-6;
constexpr double kSldRelativeStep = 1e-4;
constexpr double kSldHalvingTol = 1e-5;
constexpr double kFidelityRelativeStep = 1e-3;
constexpr double kFidelityHalvingTol = 1e-4;
constexpr double kFidelityClip = 1e-14;
constexpr double kNormalizationTol = 1e-10;

double max_abs(const Eigen::MatrixXd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

void check_spectrum(const linalg::BlockEigensystem& eig, const char* what) {
  const double lowest = eig.min_eigenvalue();
  if (lowest < -kNegativeEigenvalueTol) {
    throw NegativeEigenvalue(std::string(what) + " has eigenvalue " + std::to_string(lowest));
  }
}

std::vector<const CMatrix*> pointers(std::span<const CMatrix> mats) {
  std::vector<const CMatrix*> out;
  out.reserve(mats.size());
  for (const CMatrix& m : mats) out.push_back(&m);
  return out;
}

// K_ij = sum over retained eigenpairs of 2 Re(D_i[a,b] conj(D_j[a,b])) / (l_a + l_b).
Eigen::MatrixXd qfim_on_eigensystem(const linalg::BlockEigensystem& eig,
                                    std::span<const CMatrix> drho, double eig_tol) {
  const auto k = static_cast<Eigen::Index>(drho.size());
  const double cut = eig_tol * std::max(eig.max_eigenvalue(), 0.0);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(k, k);
  double dropped = 0.0;
  std::vector<CMatrix> rotated(drho.size());
  for (std::size_t b = 0; b < eig.blocks.size(); ++b) {
    const linalg::Block& block = eig.blocks[b];
    const linalg::HermitianEigensystem& sys = eig.systems[b];
    bool any = false;
    for (Eigen::Index i = 0; i < k; ++i) {
      CMatrix local = linalg::gather(drho[i], block);
      if (!local.isZero(0.0)) any = true;
      rotated[i] = sys.vectors.adjoint() * local * sys.vectors;
    }
    if (!any) continue;
    const auto n = static_cast<Eigen::Index>(block.size());
    for (Eigen::Index q = 0; q < n; ++q) {
      for (Eigen::Index p = 0; p < n; ++p) {
        const double denom = sys.values(p) + sys.values(q);
        if (denom <= cut) {
          for (Eigen::Index i = 0; i < k; ++i) dropped += std::norm(rotated[i](p, q));
          continue;
        }
        for (Eigen::Index i = 0; i < k; ++i) {
          for (Eigen::Index j = i; j < k; ++j) {
            out(i, j) += 2.0 * (rotated[i](p, q) * std::conj(rotated[j](p, q))).real() / denom;
          }
        }
      }
    }
  }
  if (std::sqrt(dropped) > kDroppedWeightTol) {
    throw DegenerateSupport("derivative has weight " + std::to_string(std::sqrt(dropped)) +
                            " outside the support of rho");
  }
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) out(i, j) = out(j, i);
  }
  return out;
}

std::vector<double> default_steps(std::span<const double> theta, double relative) {
  std::vector<double> h(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) h[i] = relative * std::max(std::abs(theta[i]), 1.0);
  return h;
}

// Richardson combination of K(h) and K(h/2) with a step-halving agreement check.
Eigen::MatrixXd extrapolate(const Eigen::MatrixXd& coarse, const Eigen::MatrixXd& fine,
                            double relative_tol, double floor, const char* what) {
  const double scale = std::max(max_abs(fine), floor);
  const double change = max_abs(coarse - fine);
  if (change > relative_tol * scale) {
    throw NonConvergent(std::string(what) + ": step halving changed entries by " +
                        std::to_string(change) + " (scale " + std::to_string(scale) + ")");
  }
  return (4.0 * fine - coarse) / 3.0;
}

DensityOperator evaluate(const StateFamily& family, std::span<const double> theta,
                         const FockTruncation& expected) {
  DensityOperator rho = family.evaluator(theta);
  if (!(rho.truncation() == expected)) {
    throw DimensionMismatch("state family changed its truncation between parameter points");
  }
  return rho;
}

void check_family(const StateFamily& family, std::span<const double> theta) {
  if (!family.evaluator) throw DomainError("state family has no evaluator");
  if (theta.size() != family.theta_dim) throw DomainError("theta has the wrong dimension");
  if (family.theta_dim == 0 || family.theta_dim > 2) {
    throw DomainError("state families support K = 1 or 2 parameters");
  }
  if (!family.fd_steps.empty() && family.fd_steps.size() != family.theta_dim) {
    throw DomainError("fd_steps must have one entry per parameter");
  }
}

// Hessian-style stencils of a scalar function g(theta') that vanishes to second
// order at theta: diagonal from g(+h) + g(-h) - 2 g(0), mixed from four corners.
template <typename F>
Eigen::MatrixXd second_differences(F&& g, std::span<const double> theta,
                                   const std::vector<double>& h, double g0) {
  const std::size_t k = theta.size();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  std::vector<double> point(theta.begin(), theta.end());
  for (std::size_t i = 0; i < k; ++i) {
    point[i] = theta[i] + h[i];
    const double plus = g(point);
    point[i] = theta[i] - h[i];
    const double minus = g(point);
    point[i] = theta[i];
    out(i, i) = (plus + minus - 2.0 * g0) / (h[i] * h[i]);
    for (std::size_t j = 0; j < i; ++j) {
      double corners = 0.0;
      for (int si : {1, -1}) {
        for (int sj : {1, -1}) {
          point[i] = theta[i] + si * h[i];
          point[j] = theta[j] + sj * h[j];
          corners += si * sj * g(point);
        }
      }
      point[i] = theta[i];
      point[j] = theta[j];
      out(i, j) = out(j, i) = corners / (4.0 * h[i] * h[j]);
    }
  }
  return out;
}

void check_distribution(const std::vector<double>& p) {
  double total = 0.0;
  for (double x : p) {
    if (!(x >= 0.0)) throw DomainError("probability vector has a negative or NaN entry");
    total += x;
  }
  if (std::abs(total - 1.0) > kNormalizationTol) {
    throw DomainError("probability vector sums to " + std::to_string(total));
  }
}

}  // namespace

QfiMatrix::QfiMatrix(Eigen::MatrixXd entries) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols()) throw DimensionMismatch("QFIM must be square");
  const double scale = std::max(1.0, max_abs(entries_));
  const Eigen::MatrixXd transpose = entries_.transpose();
  if (max_abs(entries_ - transpose) > 1e-9 * scale) {
    throw HermiticityViolation("QFIM is not symmetric");
  }
  entries_ = 0.5 * (entries_ + transpose);
  if (entries_.size() > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(entries_, Eigen::EigenvaluesOnly);
    if (solver.eigenvalues().minCoeff() < -1e-8 * scale) {
      throw NegativeEigenvalue("QFIM has eigenvalue " + std::to_string(solver.eigenvalues().minCoeff()));
    }
  }
}

CMatrix sld(const DensityOperator& rho, const CMatrix& drho, double eig_tol) {
  const CMatrix& m = rho.matrix();
  if (drho.rows() != m.rows() || drho.cols() != m.cols()) {
    throw DimensionMismatch("sld: derivative shape does not match rho");
  }
  const CMatrix* companions[] = {&drho};
  const linalg::BlockEigensystem eig = linalg::block_eigh(m, companions);
  check_spectrum(eig, "rho");
  const double cut = eig_tol * std::max(eig.max_eigenvalue(), 0.0);

  CMatrix out = CMatrix::Zero(m.rows(), m.cols());
  double dropped = 0.0;
  for (std::size_t b = 0; b < eig.blocks.size(); ++b) {
    const linalg::HermitianEigensystem& sys = eig.systems[b];
    const CMatrix local = linalg::gather(drho, eig.blocks[b]);
    if (local.isZero(0.0)) continue;
    CMatrix rotated = sys.vectors.adjoint() * local * sys.vectors;
    for (Eigen::Index q = 0; q < rotated.cols(); ++q) {
      for (Eigen::Index p = 0; p < rotated.rows(); ++p) {
        const double denom = sys.values(p) + sys.values(q);
        if (denom <= cut) {
          dropped += std::norm(rotated(p, q));
          rotated(p, q) = 0.0;
        } else {
          rotated(p, q) *= 2.0 / denom;
        }
      }
    }
    linalg::scatter_add(out, eig.blocks[b], sys.vectors * rotated * sys.vectors.adjoint());
  }
  if (std::sqrt(dropped) > kDroppedWeightTol) {
    throw DegenerateSupport("derivative has weight " + std::to_string(std::sqrt(dropped)) +
                            " outside the support of rho");
  }
  return out;
}

QfiMatrix qfim_from_derivatives(const DensityOperator& rho, std::span<const CMatrix> drho,
                                double eig_tol) {
  for (const CMatrix& d : drho) {
    if (d.rows() != rho.matrix().rows() || d.cols() != rho.matrix().cols()) {
      throw DimensionMismatch("qfim: derivative shape does not match rho");
    }
  }
  const std::vector<const CMatrix*> companions = pointers(drho);
  const linalg::BlockEigensystem eig = linalg::block_eigh(rho.matrix(), companions);
  check_spectrum(eig, "rho");
  return QfiMatrix(qfim_on_eigensystem(eig, drho, eig_tol));
}

QfiMatrix qfim_sld(const StateFamily& family, std::span<const double> theta, double eig_tol) {
  check_family(family, theta);
  const DensityOperator rho = family.evaluator(theta);
  const std::vector<double> h =
      family.fd_steps.empty() ? default_steps(theta, kSldRelativeStep) : family.fd_steps;

  auto derivatives = [&](double scale) {
    std::vector<CMatrix> out;
    std::vector<double> point(theta.begin(), theta.end());
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double step = h[i] * scale;
      point[i] = theta[i] + step;
      const DensityOperator plus = evaluate(family, point, rho.truncation());
      point[i] = theta[i] - step;
      const DensityOperator minus = evaluate(family, point, rho.truncation());
      point[i] = theta[i];
      out.push_back((plus.matrix() - minus.matrix()) / (2.0 * step));
    }
    return out;
  };
  const std::vector<CMatrix> coarse = derivatives(1.0);
  const std::vector<CMatrix> fine = derivatives(0.5);

  std::vector<const CMatrix*> companions = pointers(coarse);
  for (const CMatrix& d : fine) companions.push_back(&d);
  const linalg::BlockEigensystem eig = linalg::block_eigh(rho.matrix(), companions);
  check_spectrum(eig, "rho");

  const Eigen::MatrixXd k_coarse = qfim_on_eigensystem(eig, coarse, eig_tol);
  const Eigen::MatrixXd k_fine = qfim_on_eigensystem(eig, fine, eig_tol);
  return QfiMatrix(extrapolate(k_coarse, k_fine, kSldHalvingTol, 1e-10, "qfim_sld"));
}

double uhlmann_fidelity(const DensityOperator& rho, const DensityOperator& sigma) {
  if (!(rho.truncation() == sigma.truncation())) {
    throw DimensionMismatch("uhlmann_fidelity: truncations differ");
  }
  const CMatrix* mats[] = {&rho.matrix(), &sigma.matrix()};
  const std::vector<linalg::Block> blocks = linalg::coupled_blocks(mats);

  std::vector<linalg::HermitianEigensystem> eig_rho, eig_sigma;
  eig_rho.reserve(blocks.size());
  eig_sigma.reserve(blocks.size());
  double max_rho = 0.0, max_sigma = 0.0, min_eig = 0.0;
  for (const linalg::Block& block : blocks) {
    eig_rho.push_back(linalg::eigh(linalg::gather(rho.matrix(), block)));
    eig_sigma.push_back(linalg::eigh(linalg::gather(sigma.matrix(), block)));
    max_rho = std::max(max_rho, eig_rho.back().values.maxCoeff());
    max_sigma = std::max(max_sigma, eig_sigma.back().values.maxCoeff());
    min_eig = std::min({min_eig, eig_rho.back().values.minCoeff(), eig_sigma.back().values.minCoeff()});
  }
  if (min_eig < -kNegativeEigenvalueTol) {
    throw NegativeEigenvalue("uhlmann_fidelity: eigenvalue " + std::to_string(min_eig));
  }

  auto root = [](const linalg::HermitianEigensystem& sys, double cut) {
    Eigen::VectorXd r = sys.values;
    for (Eigen::Index i = 0; i < r.size(); ++i) r(i) = r(i) > cut ? std::sqrt(r(i)) : 0.0;
    return CMatrix(sys.vectors * r.asDiagonal() * sys.vectors.adjoint());
  };

  double total = 0.0;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const CMatrix product =
        root(eig_rho[b], kFidelityClip * max_rho) * root(eig_sigma[b], kFidelityClip * max_sigma);
    if (product.rows() == 1) {
      total += std::abs(product(0, 0));
    } else {
      Eigen::JacobiSVD<CMatrix> svd(product);
      total += svd.singularValues().sum();
    }
  }
  return std::clamp(total, 0.0, 1.0);
}

QfiMatrix qfi_from_fidelity(const StateFamily& family, std::span<const double> theta,
                            std::optional<double> step) {
  check_family(family, theta);
  const DensityOperator rho = family.evaluator(theta);
  const std::vector<double> h =
      step || family.fd_steps.empty()
          ? default_steps(theta, step.value_or(kFidelityRelativeStep))
          : family.fd_steps;
  const double f0 = uhlmann_fidelity(rho, rho);
  auto hessian = [&](double scale) {
    std::vector<double> scaled(h);
    for (double& x : scaled) x *= scale;
    auto f = [&](std::span<const double> point) {
      return uhlmann_fidelity(rho, evaluate(family, point, rho.truncation()));
    };
    return Eigen::MatrixXd(-4.0 * second_differences(f, theta, scaled, f0));
  };
  const Eigen::MatrixXd coarse = hessian(1.0);
  const Eigen::MatrixXd fine = hessian(0.5);
  return QfiMatrix(extrapolate(coarse, fine, kFidelityHalvingTol, 1e-2, "qfi_from_fidelity"));
}

QfiMatrix classical_fim(const DistributionFamily& family, std::span<const double> theta,
                        std::optional<double> step) {
  if (!family) throw DomainError("distribution family has no evaluator");
  if (theta.empty() || theta.size() > 2) throw DomainError("classical_fim supports K = 1 or 2");
  const std::vector<double> p0 = family(theta);
  check_distribution(p0);
  std::vector<double> root0(p0.size());
  std::transform(p0.begin(), p0.end(), root0.begin(), [](double x) { return std::sqrt(x); });

  // Hellinger distance H = (1/2) sum (sqrt p - sqrt q)^2 = 1 - Bhattacharyya,
  // evaluated without the cancellation of 1 - sum sqrt(p q).
  auto hellinger = [&](std::span<const double> point) {
    const std::vector<double> q = family(point);
    if (q.size() != p0.size()) throw DimensionMismatch("distribution length changed with theta");
    check_distribution(q);
    double total = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
      const double d = root0[i] - std::sqrt(q[i]);
      total += d * d;
    }
    return 0.5 * total;
  };
  const std::vector<double> h = default_steps(theta, step.value_or(kSldRelativeStep));
  auto hessian = [&](double scale) {
    std::vector<double> scaled(h);
    for (double& x : scaled) x *= scale;
    return Eigen::MatrixXd(4.0 * second_differences(hellinger, theta, scaled, 0.0));
  };
  const Eigen::MatrixXd coarse = hessian(1.0);
  const Eigen::MatrixXd fine = hessian(0.5);
  return QfiMatrix(extrapolate(coarse, fine, kSldHalvingTol, 1e-10, "classical_fim"));
}

bool psd_order(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols()) {
    throw DimensionMismatch("psd_order: shapes differ");
  }
  if (a.size() == 0) return true;
  const Eigen::MatrixXd diff = 0.5 * ((a - b) + (a - b).transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(diff, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff() >= -tol;
}

}  // namespace phasecov
