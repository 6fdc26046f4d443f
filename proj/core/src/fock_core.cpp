#include "phasecov/fock_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

#include "phasecov/errors.hpp"
#include "phasecov/linalg.hpp"

namespace phasecov {

namespace {

constexpr double kNormTolerance = 1e-12;
constexpr double kTraceTolerance = 1e-10;
constexpr double kHermiticityTolerance = 1e-12;

constexpr double kCoherentMaxTail = 1e-6;
constexpr double kThermalMaxDefect = 1e-9;
constexpr double kTmsvMaxTail = 1e-12;

std::string describe(std::span<const int> occupation) {
  std::ostringstream out;
  out << '(';
  for (std::size_t i = 0; i < occupation.size(); ++i) {
    out << (i ? "," : "") << occupation[i];
  }
  out << ')';
  return out.str();
}

// Poisson tail P(X > n), summed directly so small tails keep full precision.
double poisson_tail(double mean, int n) {
  if (mean == 0.0) return 0.0;
  double log_term = -mean + (n + 1) * std::log(mean) - std::lgamma(n + 2.0);
  double term = std::exp(log_term);
  double tail = 0.0;
  for (int k = n + 1; term > 0.0; ++k) {
    tail += term;
    term *= mean / (k + 1);
    if (term < tail * 1e-18 && k > mean) break;
  }
  return tail;
}

}  // namespace

FockTruncation::FockTruncation(std::vector<int> cutoffs) : cutoffs_(std::move(cutoffs)) {
  if (cutoffs_.empty()) throw DomainError("FockTruncation needs at least one mode");
  strides_.assign(cutoffs_.size(), 1);
  dimension_ = 1;
  for (std::size_t m = cutoffs_.size(); m-- > 0;) {
    if (cutoffs_[m] < 0) throw DomainError("FockTruncation cutoffs must be >= 0");
    strides_[m] = dimension_;
    dimension_ *= static_cast<std::size_t>(cutoffs_[m]) + 1;
  }
}

FockTruncation FockTruncation::uniform(std::size_t modes, int cutoff) {
  return FockTruncation(std::vector<int>(modes, cutoff));
}

bool FockTruncation::contains(std::span<const int> occupation) const {
  if (occupation.size() != cutoffs_.size()) return false;
  for (std::size_t m = 0; m < cutoffs_.size(); ++m) {
    if (occupation[m] < 0 || occupation[m] > cutoffs_[m]) return false;
  }
  return true;
}

std::size_t FockTruncation::index_of(std::span<const int> occupation) const {
  if (occupation.size() != cutoffs_.size()) {
    throw DimensionMismatch("occupation has " + std::to_string(occupation.size()) +
                            " modes, truncation has " + std::to_string(cutoffs_.size()));
  }
  if (!contains(occupation)) {
    throw IndexOutOfTruncation("occupation " + describe(occupation) + " outside truncation " +
                               describe(cutoffs_));
  }
  std::size_t index = 0;
  for (std::size_t m = 0; m < cutoffs_.size(); ++m) {
    index += static_cast<std::size_t>(occupation[m]) * strides_[m];
  }
  return index;
}

Occupation FockTruncation::occupation_of(std::size_t index) const {
  if (index >= dimension_) throw IndexOutOfTruncation("basis index out of range");
  Occupation occupation(cutoffs_.size());
  for (std::size_t m = 0; m < cutoffs_.size(); ++m) {
    occupation[m] = photons_in_mode(index, m);
  }
  return occupation;
}

FockTruncation FockTruncation::with_cutoff(std::size_t mode, int cutoff) const {
  std::vector<int> cutoffs = cutoffs_;
  cutoffs.at(mode) = cutoff;
  return FockTruncation(std::move(cutoffs));
}

FockTruncation FockTruncation::subsystem(std::span<const std::size_t> modes) const {
  std::vector<int> cutoffs;
  cutoffs.reserve(modes.size());
  for (std::size_t m : modes) cutoffs.push_back(cutoffs_.at(m));
  return FockTruncation(std::move(cutoffs));
}

FockTruncation tensor(const FockTruncation& first, const FockTruncation& second) {
  std::vector<int> cutoffs = first.cutoffs();
  cutoffs.insert(cutoffs.end(), second.cutoffs().begin(), second.cutoffs().end());
  return FockTruncation(std::move(cutoffs));
}

StateVector::StateVector(FockTruncation truncation, CVector amplitudes, double tail_mass)
    : truncation_(std::move(truncation)), amplitudes_(std::move(amplitudes)), tail_mass_(tail_mass) {
  if (static_cast<std::size_t>(amplitudes_.size()) != truncation_.dimension()) {
    throw DimensionMismatch("amplitude vector does not match truncation dimension");
  }
  if (tail_mass_ < 0.0) throw DomainError("tail_mass must be >= 0");
  const double total = amplitudes_.squaredNorm() + tail_mass_;
  if (std::abs(total - 1.0) > kNormTolerance) {
    throw DomainError("state norm plus tail mass is " + std::to_string(total) + ", expected 1");
  }
}

StateVector tensor(const StateVector& first, const StateVector& second) {
  const auto& a = first.amplitudes();
  const auto& b = second.amplitudes();
  CVector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    out.segment(i * b.size(), b.size()) = a(i) * b;
  }
  const double kept = a.squaredNorm() * b.squaredNorm();
  return StateVector(tensor(first.truncation(), second.truncation()), std::move(out),
                     std::max(0.0, 1.0 - kept));
}

DensityOperator::DensityOperator(FockTruncation truncation, CMatrix matrix, double trace_defect,
                                 double hermiticity_correction)
    : truncation_(std::move(truncation)),
      matrix_(std::move(matrix)),
      trace_defect_(trace_defect),
      hermiticity_correction_(hermiticity_correction) {
  const auto dim = static_cast<Eigen::Index>(truncation_.dimension());
  if (matrix_.rows() != dim || matrix_.cols() != dim) {
    throw DimensionMismatch("density matrix does not match truncation dimension");
  }
  if (linalg::hermiticity_defect(matrix_) > kHermiticityTolerance) {
    throw HermiticityViolation("density matrix is not Hermitian within 1e-12");
  }
  const double total = trace() + trace_defect_;
  if (std::abs(total - 1.0) > kTraceTolerance) {
    throw DomainError("trace plus trace defect is " + std::to_string(total) + ", expected 1");
  }
}

DensityOperator DensityOperator::from_state(const StateVector& state) {
  const CVector& psi = state.amplitudes();
  CMatrix rho = psi * psi.adjoint();
  return DensityOperator(state.truncation(), std::move(rho), state.tail_mass());
}

DensityOperator tensor(const DensityOperator& first, const DensityOperator& second) {
  const CMatrix& a = first.matrix();
  const CMatrix& b = second.matrix();
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  const double kept = first.trace() * second.trace();
  return DensityOperator(tensor(first.truncation(), second.truncation()), std::move(out),
                         1.0 - kept);
}

int geometric_cutoff(double ratio, double tol) {
  if (!(ratio >= 0.0 && ratio < 1.0)) throw DomainError("geometric ratio must lie in [0,1)");
  if (!(tol > 0.0)) throw DomainError("tail tolerance must be > 0");
  int n = 0;
  double tail = ratio;  // ratio^(n+1)
  while (tail >= tol) {
    tail *= ratio;
    ++n;
  }
  return n;
}

int poisson_cutoff(double mean, double tol) {
  if (!(mean >= 0.0)) throw DomainError("Poisson mean must be >= 0");
  if (!(tol > 0.0)) throw DomainError("tail tolerance must be > 0");
  int n = 0;
  while (poisson_tail(mean, n) >= tol) ++n;
  return n;
}

StateVector number_state(std::span<const int> photons, const FockTruncation& truncation) {
  CVector amplitudes = CVector::Zero(static_cast<Eigen::Index>(truncation.dimension()));
  amplitudes(static_cast<Eigen::Index>(truncation.index_of(photons))) = 1.0;
  return StateVector(truncation, std::move(amplitudes), 0.0);
}

StateVector coherent_state(Complex alpha, std::optional<int> cutoff) {
  const double mean = std::norm(alpha);
  const int n_max = cutoff ? *cutoff : poisson_cutoff(mean);
  if (n_max < 0) throw DomainError("cutoff must be >= 0");
  CVector amplitudes(n_max + 1);
  // c_n = e^{-|a|^2/2} a^n / sqrt(n!), by recursion c_n = c_{n-1} a / sqrt(n).
  amplitudes(0) = std::exp(-mean / 2.0);
  for (int n = 1; n <= n_max; ++n) {
    amplitudes(n) = amplitudes(n - 1) * alpha / std::sqrt(static_cast<double>(n));
  }
  const double tail = std::max(0.0, 1.0 - amplitudes.squaredNorm());
  if (tail > kCoherentMaxTail) {
    throw TruncationTooSevere("coherent state with |alpha|^2=" + std::to_string(mean) +
                              " loses " + std::to_string(tail) + " at cutoff " +
                              std::to_string(n_max));
  }
  return StateVector(FockTruncation::single(n_max), std::move(amplitudes), tail);
}

DensityOperator thermal_state(double mean_photons, std::optional<int> cutoff) {
  if (!(mean_photons >= 0.0)) throw DomainError("thermal brightness must be >= 0");
  const double ratio = mean_photons / (mean_photons + 1.0);
  const int n_max = cutoff ? *cutoff : geometric_cutoff(ratio);
  if (n_max < 0) throw DomainError("cutoff must be >= 0");
  CMatrix rho = CMatrix::Zero(n_max + 1, n_max + 1);
  double p = 1.0 / (mean_photons + 1.0);
  for (int n = 0; n <= n_max; ++n) {
    rho(n, n) = p;
    p *= ratio;
  }
  const double defect = std::pow(ratio, n_max + 1);
  if (defect > kThermalMaxDefect) {
    throw TruncationTooSevere("thermal state with N_B=" + std::to_string(mean_photons) +
                              " has defect " + std::to_string(defect) + " at cutoff " +
                              std::to_string(n_max));
  }
  return DensityOperator(FockTruncation::single(n_max), std::move(rho), defect);
}

StateVector tmsv_state(double signal_photons, std::optional<int> cutoff) {
  if (!(signal_photons >= 0.0)) throw DomainError("TMSV brightness must be >= 0");
  const double ratio = signal_photons / (signal_photons + 1.0);
  const int n_max = cutoff ? *cutoff : geometric_cutoff(ratio);
  if (n_max < 0) throw DomainError("cutoff must be >= 0");
  const double tail = std::pow(ratio, n_max + 1);
  if (tail > kTmsvMaxTail) {
    throw TruncationTooSevere("TMSV with N_S=" + std::to_string(signal_photons) + " loses " +
                              std::to_string(tail) + " at cutoff " + std::to_string(n_max));
  }
  FockTruncation truncation = FockTruncation::uniform(2, n_max);
  CVector amplitudes = CVector::Zero(static_cast<Eigen::Index>(truncation.dimension()));
  double p = 1.0 / (signal_photons + 1.0);
  for (int n = 0; n <= n_max; ++n) {
    const int occupation[] = {n, n};
    amplitudes(static_cast<Eigen::Index>(truncation.index_of(occupation))) = std::sqrt(p);
    p *= ratio;
  }
  return StateVector(std::move(truncation), std::move(amplitudes), tail);
}

StateVector DiagonalUnitary::apply(const StateVector& state) const {
  if (!(state.truncation() == truncation_)) {
    throw DimensionMismatch("unitary and state truncations differ");
  }
  CVector out = diagonal_.cwiseProduct(state.amplitudes());
  return StateVector(truncation_, std::move(out), state.tail_mass());
}

DensityOperator DiagonalUnitary::conjugate(const DensityOperator& rho) const {
  if (!(rho.truncation() == truncation_)) {
    throw DimensionMismatch("unitary and state truncations differ");
  }
  CMatrix out = rho.matrix();
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
      if (i != j) out(i, j) *= diagonal_(i) * std::conj(diagonal_(j));
    }
  }
  return DensityOperator(truncation_, std::move(out), rho.trace_defect());
}

DiagonalUnitary phase_shift_unitary(std::span<const double> phases,
                                    const FockTruncation& truncation) {
  if (phases.size() != truncation.mode_count()) {
    throw DimensionMismatch("one phase per mode is required");
  }
  const auto dim = static_cast<Eigen::Index>(truncation.dimension());
  CVector diagonal(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    double angle = 0.0;
    for (std::size_t m = 0; m < phases.size(); ++m) {
      angle += phases[m] * truncation.photons_in_mode(static_cast<std::size_t>(i), m);
    }
    diagonal(i) = std::polar(1.0, -angle);
  }
  return DiagonalUnitary(truncation, std::move(diagonal));
}

DensityOperator partial_trace(const DensityOperator& rho, std::span<const std::size_t> keep_modes) {
  const FockTruncation& full = rho.truncation();
  if (keep_modes.empty()) throw DomainError("partial_trace needs at least one kept mode");
  std::vector<std::size_t> keep(keep_modes.begin(), keep_modes.end());
  std::sort(keep.begin(), keep.end());
  if (std::adjacent_find(keep.begin(), keep.end()) != keep.end() ||
      keep.back() >= full.mode_count()) {
    throw DomainError("keep_modes must be distinct valid modes");
  }
  std::vector<std::size_t> traced;
  for (std::size_t m = 0; m < full.mode_count(); ++m) {
    if (!std::binary_search(keep.begin(), keep.end(), m)) traced.push_back(m);
  }
  if (traced.empty()) return rho;

  const FockTruncation kept_trunc = full.subsystem(keep);
  const FockTruncation traced_trunc = full.subsystem(traced);

  // Group full basis indices by their traced-out occupation.
  std::vector<std::vector<std::pair<Eigen::Index, Eigen::Index>>> groups(
      traced_trunc.dimension());
  for (std::size_t i = 0; i < full.dimension(); ++i) {
    std::size_t k_index = 0;
    for (std::size_t j = 0; j < keep.size(); ++j) {
      k_index += static_cast<std::size_t>(full.photons_in_mode(i, keep[j])) * kept_trunc.stride(j);
    }
    std::size_t t_index = 0;
    for (std::size_t j = 0; j < traced.size(); ++j) {
      t_index +=
          static_cast<std::size_t>(full.photons_in_mode(i, traced[j])) * traced_trunc.stride(j);
    }
    groups[t_index].emplace_back(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k_index));
  }

  const auto kdim = static_cast<Eigen::Index>(kept_trunc.dimension());
  CMatrix out = CMatrix::Zero(kdim, kdim);
  const CMatrix& m = rho.matrix();
  for (const auto& group : groups) {
    for (const auto& [fb, kb] : group) {
      for (const auto& [fa, ka] : group) {
        out(ka, kb) += m(fa, fb);
      }
    }
  }
  return DensityOperator(kept_trunc, std::move(out), rho.trace_defect());
}

double mean_photon_number(const DensityOperator& rho, std::size_t mode) {
  const FockTruncation& trunc = rho.truncation();
  if (mode >= trunc.mode_count()) throw DomainError("mode index out of range");
  double mean = 0.0;
  for (std::size_t i = 0; i < trunc.dimension(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    mean += trunc.photons_in_mode(i, mode) * rho.matrix()(ii, ii).real();
  }
  return mean;
}

Complex mean_amplitude(const DensityOperator& rho, std::size_t mode) {
  const FockTruncation& trunc = rho.truncation();
  if (mode >= trunc.mode_count()) throw DomainError("mode index out of range");
  const std::size_t stride = trunc.stride(mode);
  Complex mean = 0.0;
  // Tr(rho a) = sum_i sqrt(n_i) rho(i, i - e_mode)
  for (std::size_t i = 0; i < trunc.dimension(); ++i) {
    const int n = trunc.photons_in_mode(i, mode);
    if (n == 0) continue;
    const auto row = static_cast<Eigen::Index>(i);
    const auto col = static_cast<Eigen::Index>(i - stride);
    mean += std::sqrt(static_cast<double>(n)) * rho.matrix()(row, col);
  }
  return mean;
}

}  // namespace phasecov
