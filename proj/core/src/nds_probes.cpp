#include "phasecov/nds_probes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "phasecov/errors.hpp"

namespace phasecov {

namespace {

constexpr double kNormalizationTol = 1e-12;
constexpr double kGeometricTail = 1e-14;

double binomial(int n, int k) {
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

// Calls fn(l) for every l with 0 <= l <= n componentwise.
template <typename F>
void for_each_below(const Occupation& n, F&& fn) {
  Occupation l(n.size(), 0);
  while (true) {
    fn(static_cast<const Occupation&>(l));
    std::size_t m = l.size();
    while (m > 0) {
      --m;
      if (l[m] < n[m]) {
        ++l[m];
        break;
      }
      l[m] = 0;
      if (m == 0) return;
    }
    if (l.empty()) return;
  }
}

// prod_m C(n_m, l_m) eta^(n_m - l_m) (1 - eta)^l_m
double loss_weight(const Occupation& n, const Occupation& l, double eta) {
  double w = 1.0;
  for (std::size_t m = 0; m < n.size(); ++m) {
    w *= binomial(n[m], l[m]) * std::pow(eta, n[m] - l[m]) * std::pow(1.0 - eta, l[m]);
  }
  return w;
}

bool dominates(const Occupation& n, std::span<const int> l) {
  for (std::size_t m = 0; m < n.size(); ++m) {
    if (n[m] < l[m]) return false;
  }
  return true;
}

void check_eta(double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) throw DomainError("eta must lie in (0,1]");
}

void check_loss(const ProbeSpec& spec, std::span<const int> loss) {
  if (loss.size() != static_cast<std::size_t>(spec.modes())) {
    throw DomainError("loss pattern must have one entry per mode");
  }
}

int total(const Occupation& n) {
  int t = 0;
  for (int x : n) t += x;
  return t;
}

}  // namespace

ProbeSpec::ProbeSpec(PhotonDistribution photon_dist, int modes) : modes_(modes), mean_(0.0) {
  if (modes < 1) throw DomainError("probe needs at least one mode");
  double sum = 0.0;
  for (const auto& [n, p] : photon_dist) {
    if (n.size() != static_cast<std::size_t>(modes)) {
      throw DomainError("photon vector length does not match the mode count");
    }
    if (std::any_of(n.begin(), n.end(), [](int x) { return x < 0; })) {
      throw DomainError("photon numbers must be nonnegative");
    }
    if (!(p >= 0.0)) throw DomainError("probabilities must be nonnegative");
    if (p == 0.0) continue;
    dist_.emplace(n, p);
    sum += p;
    mean_ += total(n) * p;
  }
  if (std::abs(sum - 1.0) > kNormalizationTol) {
    throw DomainError("photon distribution sums to " + std::to_string(sum));
  }
}

ProbeSpec ProbeSpec::iid_geometric(double per_mode_photons, int modes) {
  if (!(per_mode_photons >= 0.0)) throw DomainError("N_S must be >= 0");
  if (modes < 1) throw DomainError("probe needs at least one mode");
  const double ratio = per_mode_photons / (per_mode_photons + 1.0);
  std::vector<double> single;
  double kept = 0.0;
  for (int n = 0; 1.0 - kept >= kGeometricTail / modes; ++n) {
    single.push_back(std::pow(ratio, n) / (per_mode_photons + 1.0));
    kept += single.back();
    if (ratio == 0.0) break;
  }
  PhotonDistribution dist;
  double sum = 0.0;
  for_each_below(Occupation(static_cast<std::size_t>(modes), static_cast<int>(single.size()) - 1),
                 [&](const Occupation& n) {
                   double p = 1.0;
                   for (int x : n) p *= single[static_cast<std::size_t>(x)];
                   dist.emplace(n, p);
                   sum += p;
                 });
  for (auto& entry : dist) entry.second /= sum;
  return ProbeSpec(std::move(dist), modes);
}

std::vector<int> ProbeSpec::max_photons() const {
  std::vector<int> out(static_cast<std::size_t>(modes_), 0);
  for (const auto& entry : dist_) {
    for (std::size_t m = 0; m < out.size(); ++m) out[m] = std::max(out[m], entry.first[m]);
  }
  return out;
}

StateVector nds_state(std::span<const NdsTerm> terms, std::span<const Occupation> ancilla_basis,
                      const FockTruncation& signal) {
  if (ancilla_basis.empty()) throw DomainError("ancilla basis is empty");
  const FockTruncation ancilla = FockTruncation::single(static_cast<int>(ancilla_basis.size()) - 1);
  const FockTruncation whole = tensor(ancilla, signal);
  CVector amplitudes = CVector::Zero(static_cast<Eigen::Index>(whole.dimension()));
  for (const NdsTerm& term : terms) {
    const auto it = std::find(ancilla_basis.begin(), ancilla_basis.end(), term.ancilla_label);
    if (it == ancilla_basis.end()) throw DomainError("NDS term label is not in the ancilla basis");
    const auto a = static_cast<std::size_t>(it - ancilla_basis.begin());
    const std::size_t index = a * signal.dimension() + signal.index_of(term.signal);
    amplitudes(static_cast<Eigen::Index>(index)) += std::sqrt(term.weight);
  }
  const double tail = std::max(0.0, 1.0 - amplitudes.squaredNorm());
  return StateVector(whole, std::move(amplitudes), tail);
}

NdsProbe nds_probe(const ProbeSpec& spec, std::optional<std::vector<int>> signal_cutoffs) {
  std::vector<Occupation> basis;
  std::vector<NdsTerm> terms;
  for (const auto& [n, p] : spec.photon_dist()) {
    basis.push_back(n);
    terms.push_back({n, n, p});
  }
  const FockTruncation signal(signal_cutoffs.value_or(spec.max_photons()));
  return {nds_state(terms, basis, signal), spec};
}

StateVector augment_probe(const StateVector& psi, std::size_t signal_modes, int n0) {
  const FockTruncation& trunc = psi.truncation();
  if (signal_modes == 0 || signal_modes > trunc.mode_count()) {
    throw DomainError("augment_probe: invalid signal mode count");
  }
  if (n0 < 0) throw DomainError("augment_probe: N0 must be >= 0");
  const std::size_t first_signal = trunc.mode_count() - signal_modes;
  const CVector& amp = psi.amplitudes();
  for (Eigen::Index i = 0; i < amp.size(); ++i) {
    if (amp(i) == 0.0) continue;
    for (std::size_t m = first_signal; m < trunc.mode_count(); ++m) {
      if (trunc.photons_in_mode(static_cast<std::size_t>(i), m) > n0) {
        throw SupportExceedsN0("probe has amplitude above N0 = " + std::to_string(n0));
      }
    }
  }

  std::size_t references = 1;
  for (std::size_t m = 0; m < signal_modes; ++m) references *= static_cast<std::size_t>(n0) + 1;
  const FockTruncation reference = FockTruncation::single(static_cast<int>(references) - 1);
  const FockTruncation whole = tensor(reference, trunc);
  const double norm = 1.0 / std::sqrt(static_cast<double>(references));
  const double base = 2.0 * std::numbers::pi / (n0 + 1);

  CVector out = CVector::Zero(static_cast<Eigen::Index>(whole.dimension()));
  for (std::size_t r = 0; r < references; ++r) {
    // Digits of r in base N0+1, most significant first, pair with signal modes.
    std::vector<int> digits(signal_modes);
    std::size_t rest = r;
    for (std::size_t m = signal_modes; m-- > 0;) {
      digits[m] = static_cast<int>(rest % (static_cast<std::size_t>(n0) + 1));
      rest /= static_cast<std::size_t>(n0) + 1;
    }
    for (Eigen::Index i = 0; i < amp.size(); ++i) {
      if (amp(i) == 0.0) continue;
      long long dot = 0;
      for (std::size_t m = 0; m < signal_modes; ++m) {
        dot += static_cast<long long>(digits[m]) *
               trunc.photons_in_mode(static_cast<std::size_t>(i), first_signal + m);
      }
      const double phase = -base * static_cast<double>(dot % (n0 + 1));
      out(static_cast<Eigen::Index>(r * trunc.dimension()) + i) =
          norm * amp(i) * Complex(std::cos(phase), std::sin(phase));
    }
  }
  return StateVector(whole, std::move(out), psi.tail_mass());
}

PhotonDistribution loss_pattern_dist(const ProbeSpec& spec, double eta) {
  check_eta(eta);
  PhotonDistribution out;
  for (const auto& [n, p] : spec.photon_dist()) {
    for_each_below(n, [&](const Occupation& l) {
      const double w = p * loss_weight(n, l, eta);
      if (w > 0.0) out[l] += w;
    });
  }
  return out;
}

PhotonDistribution conditional_residual_dist(const ProbeSpec& spec, double eta,
                                             std::span<const int> loss) {
  check_eta(eta);
  check_loss(spec, loss);
  const Occupation l(loss.begin(), loss.end());
  PhotonDistribution out;
  double sum = 0.0;
  for (const auto& [n, p] : spec.photon_dist()) {
    if (!dominates(n, loss)) continue;
    const double w = p * loss_weight(n, l, eta);
    if (w <= 0.0) continue;
    Occupation k(n);
    for (std::size_t m = 0; m < k.size(); ++m) k[m] -= l[m];
    out.emplace(std::move(k), w);
    sum += w;
  }
  if (!(sum > 0.0)) throw ZeroProbabilityCondition("loss pattern has zero probability");
  for (auto& entry : out) entry.second /= sum;
  return out;
}

std::map<std::pair<Occupation, Occupation>, double> joint_loss_residual_dist(const ProbeSpec& spec,
                                                                            double eta) {
  check_eta(eta);
  std::map<std::pair<Occupation, Occupation>, double> out;
  for (const auto& [n, p] : spec.photon_dist()) {
    for_each_below(n, [&](const Occupation& l) {
      const double w = p * loss_weight(n, l, eta);
      if (w <= 0.0) return;
      Occupation k(n);
      for (std::size_t m = 0; m < k.size(); ++m) k[m] -= l[m];
      out[{l, std::move(k)}] += w;
    });
  }
  return out;
}

StateVector conditional_probe(const ProbeSpec& spec, double eta, std::span<const int> loss,
                              std::optional<std::vector<int>> signal_cutoffs) {
  const PhotonDistribution residual = conditional_residual_dist(spec, eta, loss);
  std::vector<Occupation> basis;
  for (const auto& entry : spec.photon_dist()) basis.push_back(entry.first);
  std::vector<NdsTerm> terms;
  for (const auto& [k, p] : residual) {
    Occupation label(k);
    for (std::size_t m = 0; m < label.size(); ++m) label[m] += loss[m];
    terms.push_back({std::move(label), k, p});
  }
  const FockTruncation signal(signal_cutoffs.value_or(spec.max_photons()));
  return nds_state(terms, basis, signal);
}

double bhattacharyya(const PhotonDistribution& p, const PhotonDistribution& q) {
  double total_sum = 0.0;
  for (const auto& [n, pn] : p) {
    const auto it = q.find(n);
    if (it != q.end()) total_sum += std::sqrt(pn * it->second);
  }
  return total_sum;
}

double bhattacharyya(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw DimensionMismatch("bhattacharyya: lengths differ");
  double total_sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) total_sum += std::sqrt(p[i] * q[i]);
  return total_sum;
}

double nu_coefficient(double gain, double gain_prime) {
  if (!(gain >= 1.0) || !(gain_prime >= 1.0)) throw DomainError("gains must be >= 1");
  return 1.0 / (std::sqrt(gain * gain_prime) - std::sqrt((gain - 1.0) * (gain_prime - 1.0)));
}

double amp_output_fidelity(const PhotonDistribution& r, const PhotonDistribution& s, double gain,
                           double gain_prime, int modes) {
  if (modes < 1) throw DomainError("amp_output_fidelity needs M >= 1");
  const double nu = nu_coefficient(gain, gain_prime);
  double out = 0.0;
  for (const auto& [n, rn] : r) {
    if (n.size() != static_cast<std::size_t>(modes)) {
      throw DomainError("photon vector length does not match M");
    }
    const auto it = s.find(n);
    if (it == s.end()) continue;
    out += std::sqrt(rn * it->second) * std::pow(nu, total(n) + modes);
  }
  return out;
}

double conditional_output_fidelity(const ProbeSpec& spec, std::span<const int> loss, double eta,
                                   double eta_prime, double gain, double gain_prime) {
  return amp_output_fidelity(conditional_residual_dist(spec, eta, loss),
                             conditional_residual_dist(spec, eta_prime, loss), gain, gain_prime,
                             spec.modes());
}

}  // namespace phasecov
