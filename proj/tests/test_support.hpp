#pragma once

#include <cmath>
#include <random>

#include "phasecov/bosonic_channels.hpp"
#include "phasecov/fock_core.hpp"
#include "phasecov/linalg.hpp"

namespace phasecov::fixtures {

inline DensityOperator random_density(std::mt19937_64& rng, const FockTruncation& trunc) {
  std::normal_distribution<double> gauss;
  const auto d = static_cast<Eigen::Index>(trunc.dimension());
  CMatrix g(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) g(i, j) = Complex(gauss(rng), gauss(rng));
  }
  CMatrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  linalg::symmetrize(rho);
  return DensityOperator(trunc, std::move(rho));
}

inline StateVector random_pure(std::mt19937_64& rng, const FockTruncation& trunc) {
  std::normal_distribution<double> gauss;
  CVector amp(static_cast<Eigen::Index>(trunc.dimension()));
  for (Eigen::Index i = 0; i < amp.size(); ++i) amp(i) = Complex(gauss(rng), gauss(rng));
  amp.normalize();
  return StateVector(trunc, std::move(amp));
}

// Displacement D(alpha) restricted to inputs n <= input_cutoff, built from the
// spectral decomposition of the generator in a larger space and cropped.
inline KrausChannel displacement_fixture(double alpha, int input_cutoff, int output_cutoff) {
  const int big = output_cutoff + 60;
  CMatrix gen = CMatrix::Zero(big + 1, big + 1);  // H = i(alpha a^dag - alpha a), D = exp(-iH)
  for (int n = 0; n < big; ++n) {
    const double s = alpha * std::sqrt(n + 1.0);
    gen(n + 1, n) = Complex(0.0, s);
    gen(n, n + 1) = Complex(0.0, -s);
  }
  const linalg::HermitianEigensystem eig = linalg::eigh(gen);
  CVector phases(eig.values.size());
  for (Eigen::Index i = 0; i < phases.size(); ++i) phases(i) = std::polar(1.0, -eig.values(i));
  const CMatrix d = eig.vectors * phases.asDiagonal() * eig.vectors.adjoint();
  return KrausChannel({d.topLeftCorner(output_cutoff + 1, input_cutoff + 1)},
                      FockTruncation::single(input_cutoff), FockTruncation::single(output_cutoff));
}

inline double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace phasecov::fixtures
