#include "phasecov/bosonic_channels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "phasecov/errors.hpp"
#include "phasecov/linalg.hpp"

namespace phasecov {

namespace {

constexpr double kMaxTraceLoss = 1e-9;
constexpr double kMaxHermiticityCorrection = 1e-10;
constexpr int kMaxAddedPhotonsLimit = 20000;

struct Entry {
  Eigen::Index row;
  Eigen::Index col;
  Complex value;
};

std::vector<Entry> nonzeros(const CMatrix& op) {
  std::vector<Entry> out;
  for (Eigen::Index j = 0; j < op.cols(); ++j) {
    for (Eigen::Index i = 0; i < op.rows(); ++i) {
      if (op(i, j) != 0.0) out.push_back({i, j, op(i, j)});
    }
  }
  return out;
}

double log_binomial(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

void require_single_mode(const FockTruncation& trunc, const char* what) {
  if (trunc.mode_count() != 1) {
    throw DomainError(std::string(what) + " acts on a single mode");
  }
}

}  // namespace

KrausChannel::KrausChannel(std::vector<CMatrix> operators, FockTruncation input,
                           FockTruncation output)
    : operators_(std::move(operators)), input_(std::move(input)), output_(std::move(output)) {
  require_single_mode(input_, "KrausChannel");
  require_single_mode(output_, "KrausChannel");
  if (operators_.empty()) throw DomainError("KrausChannel needs at least one operator");
  const auto d_in = static_cast<Eigen::Index>(input_.dimension());
  const auto d_out = static_cast<Eigen::Index>(output_.dimension());
  CMatrix completeness = CMatrix::Zero(d_in, d_in);
  for (const CMatrix& op : operators_) {
    if (op.rows() != d_out || op.cols() != d_in) {
      throw DimensionMismatch("Kraus operator shape does not match truncations");
    }
    completeness.noalias() += op.adjoint() * op;
  }
  CMatrix defect = CMatrix::Identity(d_in, d_in) - completeness;
  linalg::symmetrize(defect);
  completeness_defect_ = linalg::eigh(defect).values.cwiseAbs().maxCoeff();
}

KrausChannel identity_channel(const FockTruncation& truncation) {
  const auto d = static_cast<Eigen::Index>(truncation.dimension());
  return KrausChannel({CMatrix::Identity(d, d)}, truncation, truncation);
}

KrausChannel attenuator_kraus(double eta, const FockTruncation& input) {
  require_single_mode(input, "attenuator");
  if (!(eta > 0.0 && eta <= 1.0)) {
    throw DomainError("attenuator transmittance must lie in (0,1], got " + std::to_string(eta));
  }
  const int n_max = input.cutoff(0);
  if (eta == 1.0) return identity_channel(input);
  std::vector<CMatrix> ops;
  ops.reserve(static_cast<std::size_t>(n_max) + 1);
  for (int l = 0; l <= n_max; ++l) {
    CMatrix op = CMatrix::Zero(n_max + 1, n_max + 1);
    for (int n = l; n <= n_max; ++n) {
      // sqrt(C(n,l) eta^(n-l) (1-eta)^l) |n-l><n|
      const double log_w = log_binomial(n, l) + (n - l) * std::log(eta) + l * std::log1p(-eta);
      op(n - l, n) = std::exp(0.5 * log_w);
    }
    ops.push_back(std::move(op));
  }
  return KrausChannel(std::move(ops), input, input);
}

int amplifier_max_added(double gain, int input_cutoff, double tail_tol) {
  if (!(gain >= 1.0)) throw DomainError("amplifier gain must be >= 1");
  if (!(tail_tol > 0.0)) throw DomainError("tail tolerance must be > 0");
  if (gain == 1.0) return 0;
  const double t = (gain - 1.0) / gain;
  // w(k,a) = C(k+a,a) t^a G^-(k+1): probability of adding a photons to |k>.
  std::vector<double> weight(static_cast<std::size_t>(input_cutoff) + 1);
  std::vector<double> cumulative(weight.size(), 0.0);
  for (int k = 0; k <= input_cutoff; ++k) weight[k] = std::pow(gain, -(k + 1.0));
  for (int a = 0; a <= kMaxAddedPhotonsLimit; ++a) {
    double worst = 0.0;
    for (int k = 0; k <= input_cutoff; ++k) {
      cumulative[k] += weight[k];
      worst = std::max(worst, 1.0 - cumulative[k]);
      weight[k] *= t * (k + a + 1.0) / (a + 1.0);
    }
    if (worst < tail_tol) return a;
  }
  throw DomainError("amplifier gain " + std::to_string(gain) + " needs too many Kraus operators");
}

KrausChannel amplifier_kraus_fixed(double gain, const FockTruncation& input, int max_added) {
  require_single_mode(input, "amplifier");
  if (!(gain >= 1.0)) throw DomainError("amplifier gain must be >= 1, got " + std::to_string(gain));
  if (max_added < 0) throw DomainError("max_added must be >= 0");
  const int n_in = input.cutoff(0);
  const int n_out = n_in + max_added;
  const FockTruncation output = FockTruncation::single(n_out);
  if (gain == 1.0) {
    CMatrix op = CMatrix::Zero(n_out + 1, n_in + 1);
    op.topRows(n_in + 1).setIdentity();
    return KrausChannel({std::move(op)}, input, output);
  }
  const double log_t = std::log((gain - 1.0) / gain);
  const double log_g = std::log(gain);
  std::vector<CMatrix> ops;
  ops.reserve(static_cast<std::size_t>(max_added) + 1);
  for (int a = 0; a <= max_added; ++a) {
    CMatrix op = CMatrix::Zero(n_out + 1, n_in + 1);
    for (int k = 0; k <= n_in; ++k) {
      // tanh^a(tau) sqrt(C(k+a,a)) sech^(k+1)(tau) |k+a><k|, G = cosh^2(tau)
      const double log_w = log_binomial(k + a, a) + a * log_t - (k + 1) * log_g;
      op(k + a, k) = std::exp(0.5 * log_w);
    }
    ops.push_back(std::move(op));
  }
  return KrausChannel(std::move(ops), input, output);
}

KrausChannel amplifier_kraus(double gain, const FockTruncation& input, double tail_tol) {
  require_single_mode(input, "amplifier");
  return amplifier_kraus_fixed(gain, input, amplifier_max_added(gain, input.cutoff(0), tail_tol));
}

KrausChannel compose(const KrausChannel& first, const KrausChannel& second) {
  if (!(first.output_truncation() == second.input_truncation())) {
    throw DimensionMismatch("compose: first output does not match second input");
  }
  std::vector<CMatrix> ops;
  ops.reserve(first.operators().size() * second.operators().size());
  for (const CMatrix& b : second.operators()) {
    for (const CMatrix& a : first.operators()) {
      CMatrix product = b * a;
      if (!product.isZero(0.0)) ops.push_back(std::move(product));
    }
  }
  return KrausChannel(std::move(ops), first.input_truncation(), second.output_truncation());
}

DensityOperator apply_to_mode(const KrausChannel& channel, const DensityOperator& rho,
                              std::size_t mode) {
  const FockTruncation& in = rho.truncation();
  if (mode >= in.mode_count()) throw DomainError("apply_to_mode: mode index out of range");
  if (in.cutoff(mode) != channel.input_truncation().cutoff(0)) {
    throw DimensionMismatch("apply_to_mode: channel input cutoff " +
                            std::to_string(channel.input_truncation().cutoff(0)) +
                            " does not match mode cutoff " + std::to_string(in.cutoff(mode)));
  }
  const FockTruncation out_trunc = in.with_cutoff(mode, channel.output_truncation().cutoff(0));

  const auto d_in = static_cast<Eigen::Index>(in.mode_dimension(mode));
  const auto d_out = static_cast<Eigen::Index>(out_trunc.mode_dimension(mode));
  const auto after = static_cast<Eigen::Index>(in.stride(mode));
  const Eigen::Index before = static_cast<Eigen::Index>(in.dimension()) / (d_in * after);
  const Eigen::Index rest = before * after;

  // Basis offsets of the untouched modes in the output space.
  std::vector<Eigen::Index> base_out(static_cast<std::size_t>(rest));
  for (Eigen::Index b = 0; b < before; ++b) {
    for (Eigen::Index a = 0; a < after; ++a) {
      base_out[b * after + a] = b * d_out * after + a;
    }
  }

  // Nonzeros of rho grouped by the (row, column) photon numbers of `mode`.
  struct Element {
    Eigen::Index r1;
    Eigen::Index r2;
    Complex value;
  };
  const CMatrix& m = rho.matrix();
  std::vector<std::vector<Element>> buckets(static_cast<std::size_t>(d_in * d_in));
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    const Eigen::Index kc = (j / after) % d_in;
    const Eigen::Index rc = (j / (d_in * after)) * after + j % after;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const Complex v = m(i, j);
      if (v == Complex(0.0)) continue;
      const Eigen::Index kr = (i / after) % d_in;
      const Eigen::Index rr = (i / (d_in * after)) * after + i % after;
      buckets[static_cast<std::size_t>(kr * d_in + kc)].push_back({rr, rc, v});
    }
  }

  const auto dim_out = static_cast<Eigen::Index>(out_trunc.dimension());
  CMatrix out = CMatrix::Zero(dim_out, dim_out);
  for (const CMatrix& op : channel.operators()) {
    const std::vector<Entry> entries = nonzeros(op);
    for (const Entry& col_entry : entries) {
      const Complex right = std::conj(col_entry.value);
      for (const Entry& row_entry : entries) {
        const auto& bucket = buckets[static_cast<std::size_t>(row_entry.col * d_in + col_entry.col)];
        if (bucket.empty()) continue;
        const Complex factor = row_entry.value * right;
        const Eigen::Index row_shift = row_entry.row * after;
        const Eigen::Index col_shift = col_entry.row * after;
        for (const Element& e : bucket) {
          out(base_out[e.r1] + row_shift, base_out[e.r2] + col_shift) += factor * e.value;
        }
      }
    }
  }

  const double correction = linalg::symmetrize(out);
  if (correction > kMaxHermiticityCorrection) {
    throw HermiticityViolation("channel output needed a Hermiticity correction of " +
                               std::to_string(correction));
  }
  const double trace_in = rho.trace();
  const double trace_out = out.trace().real();
  if (trace_in - trace_out > kMaxTraceLoss) {
    throw TraceLossExceeded("channel application lost trace " +
                            std::to_string(trace_in - trace_out));
  }
  return DensityOperator(out_trunc, std::move(out), rho.trace_defect() + (trace_in - trace_out),
                         correction);
}

DensityOperator apply(const KrausChannel& channel, const DensityOperator& rho) {
  if (!(rho.truncation() == channel.input_truncation())) {
    throw DimensionMismatch("apply: state truncation does not match channel input");
  }
  return apply_to_mode(channel, rho, 0);
}

double check_phase_covariance(const KrausChannel& channel,
                              std::span<const DensityOperator> samples) {
  static constexpr double kPhases[] = {0.37, 1.1, 2.0, std::numbers::pi, 4.4, 5.9};
  double worst = 0.0;
  for (const DensityOperator& rho : samples) {
    for (double phi : kPhases) {
      const double phase[] = {phi};
      const DiagonalUnitary u_in = phase_shift_unitary(phase, channel.input_truncation());
      const DiagonalUnitary u_out = phase_shift_unitary(phase, channel.output_truncation());
      const DensityOperator shifted_then_channel = apply(channel, u_in.conjugate(rho));
      const DensityOperator channel_then_shifted = u_out.conjugate(apply(channel, rho));
      const CMatrix diff = shifted_then_channel.matrix() - channel_then_shifted.matrix();
      worst = std::max(worst, linalg::trace_norm(diff));
    }
  }
  return worst;
}

void CascadeParams::validate() const {
  if (!(eta > 0.0 && eta <= 1.0)) throw DomainError("cascade eta must lie in (0,1]");
  if (!(gain >= 1.0)) throw DomainError("cascade gain must be >= 1");
  if (d_eta.size() != theta.size() || d_gain.size() != theta.size()) {
    throw DomainError("cascade gradients must have one entry per parameter");
  }
}

CascadeParams scenario_cascade(const ScenarioId& scenario, std::span<const double> theta) {
  if (theta.size() != scenario.theta_dim()) {
    throw DomainError("scenario expects " + std::to_string(scenario.theta_dim()) +
                      " parameters, got " + std::to_string(theta.size()));
  }
  CascadeParams p;
  p.theta = Eigen::Map<const Eigen::VectorXd>(theta.data(), static_cast<Eigen::Index>(theta.size()));
  p.d_eta = Eigen::VectorXd::Zero(p.theta.size());
  p.d_gain = Eigen::VectorXd::Zero(p.theta.size());

  if (scenario.kind == Scenario::add_noise) {
    if (scenario.background_is_parameter) {
      throw DomainError("additive-noise scenario has no background parameter");
    }
    const double gamma = theta[0];
    if (!(gamma > 0.0)) throw DomainError("noise level gamma must be > 0");
    p.eta = 1.0 / (gamma + 1.0);
    p.gain = gamma + 1.0;
    p.d_eta(0) = -1.0 / ((gamma + 1.0) * (gamma + 1.0));
    p.d_gain(0) = 1.0;
    return p;
  }

  const double kappa = theta[0];
  const double nb = scenario.background_is_parameter ? theta[1] : scenario.background;
  if (!(kappa > 0.0 && kappa < 1.0)) {
    throw DomainError("transmittance kappa must lie strictly inside (0,1)");
  }
  if (!(nb >= 0.0)) throw DomainError("background brightness N_B must be >= 0");

  if (scenario.kind == Scenario::nps_loss) {
    p.eta = kappa / (nb + 1.0);
    p.gain = nb + 1.0;
    p.d_eta(0) = 1.0 / (nb + 1.0);
    p.d_gain(0) = 0.0;
    if (scenario.background_is_parameter) {
      p.d_eta(1) = -kappa / ((nb + 1.0) * (nb + 1.0));
      p.d_gain(1) = 1.0;
    }
  } else {
    const double g = (1.0 - kappa) * nb + 1.0;
    p.eta = kappa / g;
    p.gain = g;
    p.d_eta(0) = (nb + 1.0) / (g * g);
    p.d_gain(0) = -nb;
    if (scenario.background_is_parameter) {
      p.d_eta(1) = -kappa * (1.0 - kappa) / (g * g);
      p.d_gain(1) = 1.0 - kappa;
    }
  }
  return p;
}

CascadeParams finite_difference_cascade(
    const std::function<double(std::span<const double>)>& eta,
    const std::function<double(std::span<const double>)>& gain, std::span<const double> theta,
    double relative_step) {
  CascadeParams p;
  const auto k = static_cast<Eigen::Index>(theta.size());
  p.theta = Eigen::Map<const Eigen::VectorXd>(theta.data(), k);
  p.eta = eta(theta);
  p.gain = gain(theta);
  p.d_eta.resize(k);
  p.d_gain.resize(k);
  std::vector<double> shifted(theta.begin(), theta.end());
  for (Eigen::Index i = 0; i < k; ++i) {
    const double h = relative_step * std::max(std::abs(theta[i]), 1.0);
    shifted[i] = theta[i] + h;
    const double eta_plus = eta(shifted);
    const double gain_plus = gain(shifted);
    shifted[i] = theta[i] - h;
    const double eta_minus = eta(shifted);
    const double gain_minus = gain(shifted);
    shifted[i] = theta[i];
    p.d_eta(i) = (eta_plus - eta_minus) / (2.0 * h);
    p.d_gain(i) = (gain_plus - gain_minus) / (2.0 * h);
  }
  p.validate();
  return p;
}

KrausChannel scenario_channel(const ScenarioId& scenario, std::span<const double> theta,
                              const FockTruncation& input, double tail_tol) {
  const CascadeParams p = scenario_cascade(scenario, theta);
  const KrausChannel loss = attenuator_kraus(p.eta, input);
  const KrausChannel gain = amplifier_kraus(p.gain, loss.output_truncation(), tail_tol);
  return compose(loss, gain);
}

DensityOperator apply_cascade_to_mode(double eta, double gain, int max_added,
                                      const DensityOperator& rho, std::size_t mode) {
  const FockTruncation mode_trunc = FockTruncation::single(rho.truncation().cutoff(mode));
  DensityOperator lossy = apply_to_mode(attenuator_kraus(eta, mode_trunc), rho, mode);
  if (gain == 1.0 && max_added == 0) return lossy;
  return apply_to_mode(amplifier_kraus_fixed(gain, mode_trunc, max_added), lossy, mode);
}

}  // namespace phasecov
