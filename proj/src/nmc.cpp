#include "stct/nmc.hpp"

#include "stct/errors.hpp"
#include "stct/random.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

namespace stct::nmc {

void NmcConfig::validate() const {
  if (!(r > 0.0 && r < 1.0)) throw InputDomainError("nmc: sampling rate r must lie in (0,1)");
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw InputDomainError("nmc: eta must be >= 0");
  if (!(beta > 0.0 && beta < 1.0)) throw InputDomainError("nmc: beta must lie in (0,1)");
  if (!(delta > 0.0 && delta <= 1.0)) throw InputDomainError("nmc: delta must lie in (0,1]");
  if (steps_per_split < 1) throw InputDomainError("nmc: steps_per_split must be positive");
  if (!(reg_scale >= 0.0)) throw InputDomainError("nmc: reg_scale must be >= 0");
  if (reg && !(*reg >= 0.0)) throw InputDomainError("nmc: reg must be >= 0");
  if (max_rounds < 0) throw InputDomainError("nmc: max_rounds must be >= 0");
}

SplitIndices sample_split(Index n, double r, std::uint64_t seed) {
  if (n < 2) throw DegenerateSplitError("sample_split: need at least two samples");
  if (!(r > 0.0 && r < 1.0)) throw InputDomainError("sample_split: r must lie in (0,1)");
  const auto n_v = static_cast<Index>(std::llround(r * static_cast<double>(n)));
  if (n_v <= 0 || n_v >= n) {
    throw DegenerateSplitError("sample_split: round(" + std::to_string(r) + "·" +
                               std::to_string(n) + ") = " + std::to_string(n_v) +
                               " leaves one side empty");
  }
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  Rng rng(seed);
  // Partial Fisher–Yates: the first n_v slots become a uniform subset.
  for (Index i = 0; i < n_v; ++i) {
    const auto j = i + static_cast<Index>(uniform_below(rng, static_cast<std::uint64_t>(n - i)));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }
  SplitIndices out;
  out.n = n;
  out.val_idx.assign(perm.begin(), perm.begin() + n_v);
  out.train_idx.assign(perm.begin() + n_v, perm.end());
  std::sort(out.val_idx.begin(), out.val_idx.end());
  std::sort(out.train_idx.begin(), out.train_idx.end());
  return out;
}

SplitCorrector::SplitCorrector(const Matrix& ht, const Matrix& hv, double reg)
    : ht_(ht), hv_(hv), factor_(ht, reg) {
  if (ht.cols() != hv.cols()) {
    throw InputDomainError("nmc: sub-training and validation features differ in width");
  }
}

Matrix SplitCorrector::predict(const Matrix& yt) const {
  if (yt.rows() != ht_.rows()) {
    throw InputDomainError("nmc: sub-training labels and features differ in row count");
  }
  return hv_ * factor_.solve(ht_.transpose() * yt);
}

Matrix SplitCorrector::step(const Matrix& yt, const Matrix& yv, double eta) const {
  if (yv.rows() != hv_.rows() || yv.cols() != yt.cols()) {
    throw InputDomainError("nmc: validation labels have the wrong shape");
  }
  const Matrix residual = yv - predict(yt);
  const double scale = 2.0 * eta / static_cast<double>(hv_.rows());
  return yt + scale * (ht_ * factor_.solve(hv_.transpose() * residual));
}

double SplitCorrector::lipschitz() const {
  // σ_max(S)² for S = Hv K Htᵀ equals λ_max(V^½ K G K V^½), with
  // K = (G + reg·I)⁻¹, G = HtᵀHt and V = HvᵀHv. All d×d.
  const Eigen::MatrixXd kgk = factor_.solve(factor_.solve(factor_.gram()).transpose());
  const Eigen::MatrixXd v = hv_.transpose() * hv_;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> vs(v);
  const Eigen::VectorXd root = vs.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Eigen::MatrixXd v_half = vs.eigenvectors() * root.asDiagonal() * vs.eigenvectors().transpose();
  Eigen::MatrixXd m = v_half * kgk * v_half;
  m = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ms(m, Eigen::EigenvaluesOnly);
  const double sigma2 = std::max(0.0, ms.eigenvalues().maxCoeff());
  return 2.0 * sigma2 / static_cast<double>(hv_.rows());
}

SoftLabelMatrix predict_validation(const FeatureMatrix& ht, const SoftLabelMatrix& yt,
                                   const FeatureMatrix& hv, double reg) {
  SplitCorrector corrector(ht.data(), hv.data(), reg);
  return SoftLabelMatrix(corrector.predict(yt.data()));
}

double validation_loss(const SoftLabelMatrix& yv, const SoftLabelMatrix& yv_pred) {
  if (yv.rows() != yv_pred.rows() || yv.classes() != yv_pred.classes()) {
    throw InputDomainError("validation_loss: shape mismatch");
  }
  if (yv.rows() == 0) throw InputDomainError("validation_loss: empty validation set");
  return (yv.data() - yv_pred.data()).squaredNorm() / static_cast<double>(yv.rows());
}

SoftLabelMatrix meta_label_update(const FeatureMatrix& ht, const FeatureMatrix& hv,
                                  const SoftLabelMatrix& yt, const SoftLabelMatrix& yv,
                                  double eta, double reg) {
  if (!(eta >= 0.0)) throw InputDomainError("meta_label_update: eta must be >= 0");
  SplitCorrector corrector(ht.data(), hv.data(), reg);
  return SoftLabelMatrix(corrector.step(yt.data(), yv.data(), eta));
}

int sampling_times_for_subtrain_prob(long long n, double p_sub, double beta) {
  if (n < 1) throw InputDomainError("sampling times: n must be >= 1");
  if (!(p_sub > 0.0 && p_sub < 1.0)) {
    throw InputDomainError("sampling times: selection probability must lie in (0,1)");
  }
  if (!(beta > 0.0 && beta < 1.0)) throw InputDomainError("sampling times: beta must lie in (0,1)");
  const double miss = 1.0 - p_sub;
  const double log_beta = std::log(beta);
  const auto satisfied = [&](int s) {
    // n·ln(1 − miss^s) ≥ ln β
    return static_cast<double>(n) * std::log1p(-std::pow(miss, s)) >= log_beta;
  };
  // Closed form, then a direct search to absorb rounding at integer boundaries.
  const double closed = std::log(-std::expm1(log_beta / static_cast<double>(n))) / std::log(miss);
  int s = std::max(1, static_cast<int>(std::ceil(closed - 1e-9)));
  while (s > 1 && satisfied(s - 1)) --s;
  while (!satisfied(s)) ++s;
  return s;
}

int required_sampling_times(long long n, double r, double beta) {
  if (!(r > 0.0 && r < 1.0)) throw InputDomainError("sampling times: r must lie in (0,1)");
  return sampling_times_for_subtrain_prob(n, 1.0 - r, beta);
}

namespace {

Matrix gather_rows(const Matrix& m, const std::vector<Index>& idx) {
  Matrix out(static_cast<Index>(idx.size()), m.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Index>(i)) = m.row(idx[i]);
  return out;
}

double accuracy(const HardLabelVector& a, const HardLabelVector& b) {
  return label_agreement(a, b);
}

}  // namespace

NmcResult run_nmc(const FeatureMatrix& features, const SoftLabelMatrix& labels,
                  const NmcConfig& cfg, const std::optional<HardLabelVector>& clean) {
  cfg.validate();
  const Index n = features.rows();
  if (labels.rows() != n) {
    throw InputDomainError("run_nmc: " + std::to_string(n) + " feature rows but " +
                           std::to_string(labels.rows()) + " label rows");
  }
  if (clean && static_cast<Index>(clean->size()) != n) {
    throw InputDomainError("run_nmc: clean label count does not match feature rows");
  }
  const int cap = cfg.max_rounds > 0 ? cfg.max_rounds : required_sampling_times(n, cfg.r, cfg.beta);

  Matrix y = labels.data();
  HardLabelVector previous = harden(y);
  NmcResult result;
  result.stop = StopReason::SamplingBound;

  for (int round = 1; round <= cap; ++round) {
    const SplitIndices split = sample_split(n, cfg.r, derive_seed(cfg.seed, static_cast<std::uint64_t>(round)));
    const Matrix ht = gather_rows(features.data(), split.train_idx);
    const Matrix hv = gather_rows(features.data(), split.val_idx);
    Matrix yt = gather_rows(y, split.train_idx);
    const Matrix yv = gather_rows(y, split.val_idx);

    const Matrix gram = ht.transpose() * ht;
    const double reg = cfg.reg ? *cfg.reg : numerics::scaled_trace_ridge(gram, cfg.reg_scale);
    const SplitCorrector corrector(ht, hv, reg);

    double eta = cfg.eta;
    if (cfg.eta_mode == EtaMode::RelativeToLipschitz && cfg.eta > 0.0) {
      const double lip = corrector.lipschitz();
      eta = lip > 0.0 ? cfg.eta / lip : 0.0;
    }
    for (int s = 0; s < cfg.steps_per_split; ++s) yt = corrector.step(yt, yv, eta);
    if (!all_finite(yt)) {
      std::ostringstream msg;
      msg << "run_nmc: labels became non-finite in round " << round << " (eta = " << cfg.eta
          << ", effective step " << eta << "); lower eta";
      throw DivergenceError(msg.str());
    }
    for (std::size_t i = 0; i < split.train_idx.size(); ++i) {
      y.row(split.train_idx[i]) = yt.row(static_cast<Index>(i));
    }

    HardLabelVector current = harden(y);
    NmcRecord rec;
    rec.round = round;
    rec.val_loss = (yv - corrector.predict(yt)).squaredNorm() / static_cast<double>(yv.rows());
    rec.agreement = label_agreement(current, previous);
    if (clean) rec.label_acc = accuracy(current, *clean);
    result.trace.records.push_back(rec);
    previous = std::move(current);

    if (round >= 2 && rec.agreement >= cfg.delta) {
      result.stop = StopReason::Agreement;
      break;
    }
  }
  result.corrected = SoftLabelMatrix(std::move(y));
  return result;
}

}  // namespace stct::nmc
