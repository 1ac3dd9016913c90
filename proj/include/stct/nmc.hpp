#pragma once

// Noisy meta correction: closed-form ridge predictions on a randomly drawn
// noisy validation split, and gradient steps on the sub-training labels that
// reduce the validation mismatch.

#include "stct/numerics.hpp"
#include "stct/types.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace stct::nmc {

enum class EtaMode {
  /// eta multiplies 1/L, L being the Lipschitz constant of the validation
  /// loss gradient in the sub-training labels. Scale free.
  RelativeToLipschitz,
  /// eta is used verbatim as the learning rate of the label update.
  Absolute,
};

struct NmcConfig {
  double r = 0.5;  ///< fraction of samples drawn into the noisy validation split
  double eta = 0.2;
  EtaMode eta_mode = EtaMode::RelativeToLipschitz;
  double beta = 0.9999;  ///< coverage target for the sampling-times bound
  double delta = 0.998;  ///< hardened-label agreement that stops the loop
  int steps_per_split = 10;
  /// Ridge = reg_scale · trace(HtᵀHt) / d, unless `reg` is set.
  double reg_scale = 5.0;
  std::optional<double> reg;
  /// Hard cap on rounds; 0 uses required_sampling_times(n, r, beta).
  int max_rounds = 0;
  std::uint64_t seed = 0;

  /// Throws InputDomainError on out-of-range fields.
  void validate() const;
};

struct NmcRecord {
  int round = 0;
  double val_loss = 0.0;
  double agreement = 0.0;
  std::optional<double> label_acc;
};

struct NmcTrace {
  std::vector<NmcRecord> records;
};

enum class StopReason { Agreement, SamplingBound };

struct NmcResult {
  SoftLabelMatrix corrected;
  NmcTrace trace;
  StopReason stop = StopReason::Agreement;
  int rounds() const noexcept { return static_cast<int>(trace.records.size()); }
};

/// Uniformly random partition with |val_idx| = round(r·n).
SplitIndices sample_split(Index n, double r, std::uint64_t seed);

/// Ŷ'_v = Hv·(HtᵀHt + reg·I)⁻¹·Htᵀ·Yt.
SoftLabelMatrix predict_validation(const FeatureMatrix& ht, const SoftLabelMatrix& yt,
                                   const FeatureMatrix& hv, double reg);

/// ||Yv − Ŷ'_v||² / n_v.
double validation_loss(const SoftLabelMatrix& yv, const SoftLabelMatrix& yv_pred);

/// One meta-gradient step on the sub-training labels:
/// Yt + (2·eta/n_v)·Ht·(HtᵀHt + reg·I)⁻¹·Hvᵀ·(Yv − Ŷ'_v).
SoftLabelMatrix meta_label_update(const FeatureMatrix& ht, const FeatureMatrix& hv,
                                  const SoftLabelMatrix& yt, const SoftLabelMatrix& yv,
                                  double eta, double reg);

/// Holds the factorized sub-training Gram matrix for one split so repeated
/// steps and predictions reuse it.
class SplitCorrector {
 public:
  SplitCorrector(const Matrix& ht, const Matrix& hv, double reg);

  Matrix predict(const Matrix& yt) const;
  Matrix step(const Matrix& yt, const Matrix& yv, double eta) const;
  /// L = 2·σ_max(Hv·(HtᵀHt + reg·I)⁻¹·Htᵀ)² / n_v.
  double lipschitz() const;

 private:
  Matrix ht_;
  Matrix hv_;
  numerics::RidgeFactor factor_;
};

/// Smallest s with n·ln(1 − (1 − p_sub)^s) ≥ ln(beta), where p_sub is the
/// per-round probability that a sample lands in the sub-training split.
int sampling_times_for_subtrain_prob(long long n, double p_sub, double beta);

/// Same bound for a validation fraction r, i.e. p_sub = 1 − r.
int required_sampling_times(long long n, double r, double beta);

/// Repeats split → steps_per_split label updates → write-back until the
/// hardened labels agree with the previous round's to at least delta
/// (checked from round 2 on) or the sampling bound is reached. `clean` only
/// feeds the trace's label_acc column.
NmcResult run_nmc(const FeatureMatrix& features, const SoftLabelMatrix& labels,
                  const NmcConfig& cfg,
                  const std::optional<HardLabelVector>& clean = std::nullopt);

}  // namespace stct::nmc
