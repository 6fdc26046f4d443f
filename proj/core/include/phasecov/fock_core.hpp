#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace phasecov {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// Photon numbers of each mode (or tensor factor) of a multimode basis state.
using Occupation = std::vector<int>;

/// Tail probability used when a constructor picks its own cutoff.
inline constexpr double kAutoTailTolerance = 1e-12;

/// Per-mode photon-number cutoffs (inclusive) of a truncated multimode Fock
/// space. Basis states are ordered lexicographically, last mode fastest.
///
/// A "mode" here is any tensor factor; ancilla and reference systems of
/// dimension d are represented as a factor with cutoff d - 1.
class FockTruncation {
 public:
  explicit FockTruncation(std::vector<int> cutoffs);

  static FockTruncation single(int cutoff) { return FockTruncation({cutoff}); }
  static FockTruncation uniform(std::size_t modes, int cutoff);

  std::size_t mode_count() const noexcept { return cutoffs_.size(); }
  int cutoff(std::size_t mode) const { return cutoffs_.at(mode); }
  const std::vector<int>& cutoffs() const noexcept { return cutoffs_; }
  std::size_t mode_dimension(std::size_t mode) const {
    return static_cast<std::size_t>(cutoff(mode)) + 1;
  }
  std::size_t dimension() const noexcept { return dimension_; }
  /// Index distance between basis states differing by one photon in `mode`.
  std::size_t stride(std::size_t mode) const { return strides_.at(mode); }

  bool contains(std::span<const int> occupation) const;
  /// Throws IndexOutOfTruncation when `occupation` exceeds a cutoff.
  std::size_t index_of(std::span<const int> occupation) const;
  Occupation occupation_of(std::size_t index) const;
  int photons_in_mode(std::size_t index, std::size_t mode) const {
    return static_cast<int>((index / strides_[mode]) % mode_dimension(mode));
  }

  FockTruncation with_cutoff(std::size_t mode, int cutoff) const;
  FockTruncation subsystem(std::span<const std::size_t> modes) const;

  friend bool operator==(const FockTruncation& a, const FockTruncation& b) {
    return a.cutoffs_ == b.cutoffs_;
  }

 private:
  std::vector<int> cutoffs_;
  std::vector<std::size_t> strides_;
  std::size_t dimension_ = 1;
};

FockTruncation tensor(const FockTruncation& first, const FockTruncation& second);

/// Pure state on a truncated Fock space. The probability mass lost to the
/// truncation is carried in tail_mass so that |amplitudes|^2 + tail_mass = 1.
class StateVector {
 public:
  StateVector(FockTruncation truncation, CVector amplitudes, double tail_mass = 0.0);

  const FockTruncation& truncation() const noexcept { return truncation_; }
  const CVector& amplitudes() const noexcept { return amplitudes_; }
  double tail_mass() const noexcept { return tail_mass_; }

 private:
  FockTruncation truncation_;
  CVector amplitudes_;
  double tail_mass_;
};

StateVector tensor(const StateVector& first, const StateVector& second);

/// Density operator on a truncated Fock space with its trace defect tracked.
/// Construction checks Hermiticity (1e-12) and trace + defect = 1 (1e-10);
/// the spectrum is checked by the eigen-based consumers.
class DensityOperator {
 public:
  DensityOperator(FockTruncation truncation, CMatrix matrix, double trace_defect = 0.0,
                  double hermiticity_correction = 0.0);

  static DensityOperator from_state(const StateVector& state);

  const FockTruncation& truncation() const noexcept { return truncation_; }
  const CMatrix& matrix() const noexcept { return matrix_; }
  double trace_defect() const noexcept { return trace_defect_; }
  /// Max-norm of the anti-Hermitian part removed when this operator was produced.
  double hermiticity_correction() const noexcept { return hermiticity_correction_; }
  double trace() const { return matrix_.trace().real(); }
  std::size_t dimension() const noexcept { return truncation_.dimension(); }

 private:
  FockTruncation truncation_;
  CMatrix matrix_;
  double trace_defect_;
  double hermiticity_correction_;
};

DensityOperator tensor(const DensityOperator& first, const DensityOperator& second);

/// Smallest cutoff n with ratio^(n+1) < tol, i.e. the geometric tail beyond n.
int geometric_cutoff(double ratio, double tol = kAutoTailTolerance);
/// Smallest cutoff n whose Poisson(mean) tail beyond n is below tol.
int poisson_cutoff(double mean, double tol = kAutoTailTolerance);

StateVector number_state(std::span<const int> photons, const FockTruncation& truncation);

/// Single-mode coherent state. Throws TruncationTooSevere if the tail exceeds 1e-6.
StateVector coherent_state(Complex alpha, std::optional<int> cutoff = std::nullopt);

/// Single-mode thermal state. Throws TruncationTooSevere if the defect exceeds 1e-9.
DensityOperator thermal_state(double mean_photons, std::optional<int> cutoff = std::nullopt);

/// Two-mode squeezed vacuum on (ancilla, signal), both with the same cutoff.
/// Throws TruncationTooSevere if the tail exceeds 1e-12.
StateVector tmsv_state(double signal_photons, std::optional<int> cutoff = std::nullopt);

/// Diagonal unitary in the Fock basis.
class DiagonalUnitary {
 public:
  DiagonalUnitary(FockTruncation truncation, CVector diagonal)
      : truncation_(std::move(truncation)), diagonal_(std::move(diagonal)) {}

  const FockTruncation& truncation() const noexcept { return truncation_; }
  const CVector& diagonal() const noexcept { return diagonal_; }
  CMatrix dense() const { return diagonal_.asDiagonal(); }

  StateVector apply(const StateVector& state) const;
  /// U rho U^dagger.
  DensityOperator conjugate(const DensityOperator& rho) const;

 private:
  FockTruncation truncation_;
  CVector diagonal_;
};

/// exp(-i sum_m phi_m N_m) over all modes of the truncation.
DiagonalUnitary phase_shift_unitary(std::span<const double> phases,
                                    const FockTruncation& truncation);

/// Reduced state on `keep_modes` (kept in ascending mode order).
DensityOperator partial_trace(const DensityOperator& rho, std::span<const std::size_t> keep_modes);

double mean_photon_number(const DensityOperator& rho, std::size_t mode);
/// Tr(rho a) for the annihilation operator of `mode`.
Complex mean_amplitude(const DensityOperator& rho, std::size_t mode);

}  // namespace phasecov
